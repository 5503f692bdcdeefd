#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "klsens/distribution.hpp"
#include "klsens/rng.hpp"

namespace klsens {

/// Benchmark input model: a sampler, plus an exact finite-support
/// representation when one exists (enabling enumeration-based routines).
class StochasticModel {
public:
  using Sampler = std::function<double(StreamRng&)>;

  /// Placeholder with no sampler; usable only after assignment.
  StochasticModel() = default;

  static StochasticModel finite(FiniteDistribution d);
  static StochasticModel exponential(double rate);
  static StochasticModel gamma(double shape, double rate);
  static StochasticModel uniform(double lo, double hi);
  static StochasticModel normal(double mean, double sigma);
  /// Arbitrary sampler without exact support.
  static StochasticModel from_sampler(std::string name, Sampler s);

  double draw(StreamRng& rng) const { return sample_(rng); }
  bool has_exact() const { return exact_.has_value(); }
  const FiniteDistribution& exact() const;
  const std::string& name() const { return name_; }

private:
  StochasticModel(std::string name, Sampler s, std::optional<FiniteDistribution> exact);

  std::string name_;
  Sampler sample_;
  std::optional<FiniteDistribution> exact_;
};

/// `count` draws from (seed, stream); draw i depends only on (seed, stream, i).
std::vector<double> sample_stream(const StochasticModel& model, std::uint64_t seed,
                                  std::uint64_t stream, std::size_t count);

}  // namespace klsens
