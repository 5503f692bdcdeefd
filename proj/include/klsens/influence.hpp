#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "klsens/cost.hpp"
#include "klsens/model.hpp"

namespace klsens {

/// Sum over t of the cost evaluated with coordinates 1 and t swapped.
/// For a symmetric cost this equals T times the plain evaluation.
double swap_sum(const CostSpec& cost, std::span<const double> path,
                std::span<const double> aux = {});

struct InfluenceExact {
  std::vector<double> values;  // g at each atom
  double mean_h = 0.0;         // E0[h]; E0 of `values` equals T * mean_h
};

/// First-order influence g(x) = sum_t E0[h | X_t = x] on a finite-support
/// model, by full product-space enumeration (budget guarded).
InfluenceExact influence_exact(const StochasticModel& model, const CostSpec& cost);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t replications = 0;
};

/// Monte Carlo estimate of g(x) as the mean of swap sums with X_1 = x.
McEstimate influence_mc(const StochasticModel& model, const CostSpec& cost, double x,
                        std::size_t replications, std::uint64_t seed,
                        std::uint64_t stream = 0);

struct InteractionExact {
  std::vector<std::vector<double>> pair_values;  // G(x_i, x_j)
  double nu = 0.0;  // E0[(G(X,Y)-E G)(g(X)-E g)(g(Y)-E g)], X,Y independent
};

/// Second-order interaction G(x, y) = sum_{t != s} E0[h | X_t = x, X_s = y]
/// and the centered triple moment nu, by full enumeration.
InteractionExact interaction_exact(const StochasticModel& model, const CostSpec& cost);

/// Sampling distribution of the randomized horizon index.
struct RandomizedHorizonConfig {
  /// pmf of the conditioning position omega; defaults to geometric(0.2).
  std::function<double(int)> pmf;
  double pmf_param = 0.2;
};

struct InfluenceTruncated {
  std::vector<double> values;  // g~ at each atom
  int t_cut = 0;
  double tail_bound = 0.0;  // sup|h| * P0(tau > t_cut); 0 for bounded tau
};

/// Random-horizon influence g~(x) = sum_t E0[h(X_tau); tau >= t | X_t = x]
/// on a finite support.  Bounded stopping times are enumerated exactly;
/// independent stopping times are truncated at t_cut (0 = choose the
/// smallest cut whose tail bound falls below 1e-10).
InfluenceTruncated influence_exact_random(const StochasticModel& model,
                                          const CostSpec& cost, int t_cut = 0);

/// Randomized-horizon estimator of g~(x): draw the conditioning position
/// omega from config.pmf, run the path with X_omega pinned to x, and return
/// h(X_tau)/pmf(omega) when tau >= omega (0 otherwise), averaged over
/// `replications` draws.
McEstimate influence_mc_random(const StochasticModel& model, const CostSpec& cost,
                               const RandomizedHorizonConfig& config, double x,
                               std::size_t replications, std::uint64_t seed,
                               std::uint64_t stream = 0);

struct InteractionTruncated {
  std::vector<std::vector<double>> pair_values;  // G~(x_i, x_j)
  double nu = 0.0;
  int t_cut = 0;
  double tail_bound = 0.0;
};

/// Random-horizon interaction G~ and its centered triple moment, truncated
/// at t_cut for independent stopping times (same cut rule as above).
InteractionTruncated interaction_exact_random(const StochasticModel& model,
                                              const CostSpec& cost, int t_cut = 0);

}  // namespace klsens
