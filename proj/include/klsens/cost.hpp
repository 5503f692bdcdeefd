#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "klsens/model.hpp"

namespace klsens {

/// Time horizon of a path cost: a fixed length, a bounded stopping time, or a
/// stopping time independent of the path.
struct HorizonSpec {
  enum class Kind { fixed, random_bounded, random_independent };

  Kind kind = Kind::fixed;
  /// Horizon T (fixed) or almost-sure bound T_max (random_bounded); unused
  /// for random_independent.
  int length = 1;
  /// random_bounded: stopping rule on (primary path, auxiliary path).  Its
  /// value must be determined by the first tau coordinates (caller's duty).
  std::function<int(std::span<const double>, std::span<const double>)> stop;
  /// random_independent: pmf of tau on {1, 2, ...}.
  std::function<double(int)> tau_pmf;

  static HorizonSpec single() { return fixed(1); }
  static HorizonSpec fixed(int T);
  static HorizonSpec bounded(
      int t_max, std::function<int(std::span<const double>, std::span<const double>)> stop);
  static HorizonSpec independent(std::function<double(int)> pmf);
  /// pmf(t) = q (1-q)^{t-1} on {1, 2, ...}.
  static std::function<double(int)> geometric_pmf(double q);

  bool is_random() const { return kind != Kind::fixed; }
  int stop_at(std::span<const double> x, std::span<const double> y) const;
  /// P(tau >= t) for the independent kind.
  double tau_tail(int t) const;
  /// Inverse-CDF draw of tau for the independent kind.
  int sample_tau(StreamRng& rng) const;
};

/// Path cost h.  The evaluator sees the primary path x (drawn from the model
/// under perturbation) and an optional auxiliary path y (never perturbed).
struct CostSpec {
  std::function<double(std::span<const double>, std::span<const double>)> eval;
  HorizonSpec horizon = HorizonSpec::single();
  /// Auxiliary input model and the number of auxiliary draws per evaluation.
  std::optional<StochasticModel> auxiliary;
  std::size_t aux_count = 0;
  /// Set when eval is invariant under permutations of x; enables shortcuts.
  bool symmetric = false;
  /// Caller-asserted bound on |eval|, required by the independent-horizon
  /// estimator and used in truncation tail bounds.
  std::optional<double> sup_abs;

  double operator()(std::span<const double> x, std::span<const double> y = {}) const;
};

/// Draw the auxiliary path; empty when the cost has no auxiliary model.
std::vector<double> draw_auxiliary(const CostSpec& cost, StreamRng& rng);

/// Cost whose evaluator integrates the auxiliary coordinates out exactly by
/// enumerating the auxiliary product space (auxiliary model must be finite).
CostSpec integrate_auxiliary(const CostSpec& cost);

/// Per-atom cost table for single-variable problems (horizon T = 1).
std::vector<double> cost_table(const FiniteDistribution& d, const CostSpec& cost);

}  // namespace klsens
