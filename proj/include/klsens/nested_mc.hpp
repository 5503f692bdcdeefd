#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "klsens/cost.hpp"
#include "klsens/model.hpp"
#include "klsens/rng.hpp"

namespace klsens {

struct NestedDesign {
  std::size_t outer = 30;    // K: conditioning draws per section
  std::size_t inner = 10;    // n: evaluations per conditioning draw
  std::size_t sections = 20; // N: independent sections for the t interval
  double confidence = 0.95;
};

struct AnovaEstimate {
  double sigma_m2 = 0.0;   // unbiased estimate of Var(E[H|X]); may be negative
  double sigma_eps2 = 0.0; // within-group variance estimate
};

/// Variance-decomposition estimate from a K x n matrix of nested samples
/// (row k holds the inner evaluations sharing the k-th conditioning draw).
AnovaEstimate anova_sigma_m2(const std::vector<std::vector<double>>& H);

struct SectionedEstimate {
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double confidence = 0.95;
  std::vector<double> raw_sections;  // per-section variance estimates Z_l
  bool clamped = false;              // mean of Z_l was <= 0; CI suppressed
};

/// One inner evaluation of the swap sum given the conditioning value x.
using ConditionalSampler = std::function<double(double x, StreamRng& rng)>;

/// Inner sampler for a generic fixed-horizon cost: fresh draws for the other
/// coordinates and the auxiliary path, swap sum over coordinate exchanges.
ConditionalSampler swap_sum_sampler(const StochasticModel& model, const CostSpec& cost);

/// Sectioned estimate of sqrt(2 Var(E[S_h | X])): per section an outer/inner
/// nested sample feeds anova_sigma_m2, and the section values enter a
/// Student-t interval through the delta method for the square root.
SectionedEstimate sectioned_zeta1(const StochasticModel& model,
                                  const ConditionalSampler& sampler,
                                  const NestedDesign& design, std::uint64_t seed,
                                  std::uint64_t stream = 0);

SectionedEstimate sectioned_zeta1(const StochasticModel& model, const CostSpec& cost,
                                  const NestedDesign& design, std::uint64_t seed,
                                  std::uint64_t stream = 0);

struct PilotRow {
  std::size_t inner = 0;
  double sigma_m2 = 0.0;    // mean of section variance estimates
  double std_error = 0.0;   // standard error of that mean across sections
  double zeta1_point = 0.0; // sqrt(2 max(sigma_m2, 0))
};

/// Sweeps the inner sample count and reports the estimator noise at each
/// setting, so the inner budget can be chosen before a production run.
std::vector<PilotRow> pilot_inner_sweep(const StochasticModel& model,
                                        const ConditionalSampler& sampler,
                                        const NestedDesign& design,
                                        const std::vector<std::size_t>& inner_grid,
                                        std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace klsens
