#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "klsens/cost.hpp"
#include "klsens/distribution.hpp"
#include "klsens/model.hpp"

namespace klsens {

/// Change of measure on a finite support: nonnegative weights with unit mean
/// under the benchmark distribution.
struct LikelihoodVector {
  std::vector<double> weights;
};

/// Validation error unless L >= 0 and E0[L] = 1 within 1e-12.
void check_likelihood(const FiniteDistribution& d, const LikelihoodVector& L);

LikelihoodVector ones_likelihood(std::size_t n);

/// One application of the tilting operator: computes
/// gL(x) = Sum_t E0[h(path) * prod_{r != t} L(X_r) | X_t = x] by product-space
/// enumeration and returns exp(gL/alpha) normalized to unit mean under d.
LikelihoodVector apply_tilt_operator(const LikelihoodVector& L, double alpha,
                                     const StochasticModel& model,
                                     const CostSpec& cost);

struct FixedPointSolution {
  LikelihoodVector L_star;
  double alpha = 0.0;
  double kl = 0.0;         // E0[L* log L*]
  double objective = 0.0;  // E0[h * prod_t L*(X_t)]
  int iterations = 0;
  double residual = 0.0;   // L1 distance between the last two iterates
  std::vector<double> residual_history;

  nlohmann::json to_json() const;
};

/// Iterates the tilting operator from `start` (all-ones when omitted) until
/// the L1 residual falls below tol.  T = 1 short-circuits to the closed-form
/// exponential tilt.  A 10-iteration window of non-decreasing residuals
/// raises a regime error: alpha is below the contraction range.
FixedPointSolution solve_fixed_point(const StochasticModel& model, const CostSpec& cost,
                                     double alpha,
                                     std::optional<LikelihoodVector> start = {},
                                     double tol = 1e-12, int max_iter = 2000);

/// Finds alpha whose fixed point spends exactly eta of KL budget:
/// bisection on E0[L*(alpha) log L*(alpha)], which decreases in alpha along
/// the fixed-point family (verified during bracketing).
FixedPointSolution calibrate_alpha(const StochasticModel& model, const CostSpec& cost,
                                   double eta, double tol = 1e-10);

/// Ingredients of the second-order likelihood expansion around beta = 0.
struct QuadraticApprox {
  std::vector<double> g;        // symmetrized conditional cost per atom
  std::vector<double> w;        // pairwise cross-moment term per atom
  std::vector<double> v;        // centered quadratic correction per atom
  std::vector<double> approx;   // 1 + beta (g - E0 g) + beta^2 v
  double mean_g = 0.0;
  double var_g = 0.0;
  double kappa3_g = 0.0;
  double e0_gv = 0.0;           // E0[g V], drives the beta^3 terms
};

/// Quadratic-in-beta approximation of the optimal change of measure; its
/// mean under the benchmark is 1 for every beta by construction.
QuadraticApprox quadratic_approx(const StochasticModel& model, const CostSpec& cost,
                                 double beta);

}  // namespace klsens
