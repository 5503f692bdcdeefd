#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

namespace klsens {

/// Probability-weighted atoms on the real line.
///
/// Probabilities must be nonnegative and sum to 1 within 1e-12; a sum inside
/// that tolerance is renormalized, anything further off is rejected.
class FiniteDistribution {
public:
  FiniteDistribution() = default;  // empty placeholder; size() == 0
  FiniteDistribution(std::vector<double> atoms, std::vector<double> probs);

  std::size_t size() const { return atoms_.size(); }
  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& probs() const { return probs_; }
  double atom(std::size_t i) const { return atoms_[i]; }
  double prob(std::size_t i) const { return probs_[i]; }

  /// E0 of per-atom values.
  double mean_of(std::span<const double> values) const;

  /// Inverse-CDF draw; u in [0, 1).
  std::size_t index_from_uniform(double u) const;

  static FiniteDistribution from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

private:
  std::vector<double> atoms_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

struct CumulantTriple {
  double mean = 0.0;
  double variance = 0.0;
  double kappa3 = 0.0;
};

/// Mean, variance and third cumulant (= third central moment) of per-atom
/// values under d.
CumulantTriple cumulants(const FiniteDistribution& d, std::span<const double> values);

/// KL divergence D(f || p0) for two weightings of the same atom set.
/// Fails when f puts mass where p0 has none (absolute continuity).
double kl_divergence(const FiniteDistribution& f, const FiniteDistribution& p0);
double kl_divergence(std::span<const double> f_probs, const FiniteDistribution& p0);

/// Equal-probability quantile discretization of N(mean, sigma^2): one atom
/// per bin at the bin-conditional mean, clipped to mean +- 8 sigma.  With the
/// default 2001 atoms the first two moments are accurate to ~1e-4 relative.
FiniteDistribution discretize_normal(double mean, double sigma, std::size_t n_atoms = 2001);

}  // namespace klsens
