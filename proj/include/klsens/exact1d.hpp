#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "klsens/distribution.hpp"
#include "klsens/sense.hpp"

namespace klsens {

/// log E0[exp(beta h)] with max-shift guarding.
double log_mgf(const FiniteDistribution& d, std::span<const double> h, double beta);

struct TiltedMoments {
  double log_mgf = 0.0;
  double mean = 0.0;      // E of h under the tilted measure
  double variance = 0.0;  // Var of h under the tilted measure
};
TiltedMoments tilted_moments(const FiniteDistribution& d, std::span<const double> h,
                             double beta);

/// Likelihood vector exp(h/alpha) / E0 exp(h/alpha).
std::vector<double> tilt_likelihood(const FiniteDistribution& d, std::span<const double> h,
                                    double alpha);

struct TiltSolution {
  double beta_star = 0.0;    // positive for max, negative for min
  double eta = 0.0;
  double optimum = 0.0;      // psi'(beta_star) = worst-case E_f[h]
  double psi_at_beta = 0.0;  // psi(beta_star)
  int iterations = 0;
  double residual = 0.0;     // |beta psi'(beta) - psi(beta) - eta|

  nlohmann::json to_json() const;
};

/// Worst-case mean of a scalar cost over the KL ball of radius eta: solves
/// beta psi'(beta) - psi(beta) = eta on the positive (max) or negative (min)
/// branch by bracketed, safeguarded Newton iteration, then evaluates
/// psi'(beta).  The equation residual is driven to 1e-12 or better.
TiltSolution solve_tilt(const FiniteDistribution& d, std::span<const double> h,
                        double eta, Sense sense);

struct Expansion1d {
  double benchmark = 0.0;
  double zeta1 = 0.0;  // sqrt(2 Var0 h), magnitude
  double zeta2 = 0.0;  // k3(h) / (3 Var0 h)
};

/// Square-root-order and first-order KL sensitivity coefficients of a scalar
/// cost.  The max branch adds zeta1 sqrt(eta), the min branch subtracts it;
/// zeta2 is shared by both branches.
Expansion1d expansion1d(const FiniteDistribution& d, std::span<const double> h);

}  // namespace klsens
