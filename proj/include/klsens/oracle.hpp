#pragma once

#include <cstdint>
#include <string>

#include "klsens/cost.hpp"
#include "klsens/distribution.hpp"
#include "klsens/model.hpp"
#include "klsens/sense.hpp"

namespace klsens {

enum class OracleMethod { tilt_closed_form, simplex_search };

std::string to_string(OracleMethod m);

struct OracleResult {
  double optimum = 0.0;
  FiniteDistribution argmax;  // perturbed marginal on the same atoms
  double kl_at_opt = 0.0;
  OracleMethod method = OracleMethod::tilt_closed_form;
};

/// Brute-force solution of max/min E_f[h] over product measures with
/// KL(f || P0) <= eta on a small finite support.
///
/// T = 1 scans the exponential-tilt family directly (probability-space
/// arithmetic, no cumulant machinery), bisecting the KL constraint to the
/// active budget.  T > 1 runs a multi-start projected gradient search over
/// the marginal simplex with bisection-based feasibility restoration; the
/// returned value is the best feasible point across restarts, compared by
/// (objective, restart index) so the outcome is deterministic given the
/// seed.  Claims best-of-restarts quality only.
OracleResult brute_force(const StochasticModel& model, const CostSpec& cost,
                         double eta, Sense sense, std::uint64_t seed = 20240801,
                         int restarts = 64);

}  // namespace klsens
