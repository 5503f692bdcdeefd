#pragma once

#include <cstdint>
#include <random>

namespace klsens {

/// SplitMix64 finalizer; whitens seed material before it reaches an engine.
std::uint64_t mix64(std::uint64_t z);

/// Engine seed for (seed, stream): two SplitMix64 rounds over the pair,
///   mix64(mix64(seed + C) ^ (stream + 1) * C)   with C = 0x9E3779B97F4A7C15.
/// Distinct streams of the same base seed give statistically independent
/// sequences, so replicated work can be assigned one stream per index and
/// aggregated in index order independently of the thread schedule.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

/// Deterministic per-stream random engine.  A draw depends only on
/// (seed, stream, draw index), never on what other streams have consumed.
class StreamRng {
public:
  StreamRng(std::uint64_t seed, std::uint64_t stream);

  /// Engine for a nested replication inside this stream; children of
  /// distinct indices are independent of each other and of the parent.
  StreamRng child(std::uint64_t index) const;

  std::mt19937_64& engine() { return engine_; }

  double uniform();  // U(0,1)
  double uniform_ab(double lo, double hi);
  double normal(double mean = 0.0, double sigma = 1.0);
  double exponential(double rate);
  double gamma(double shape, double rate);

private:
  explicit StreamRng(std::uint64_t key);

  std::uint64_t key_;
  std::mt19937_64 engine_;
};

}  // namespace klsens
