#include "klsens/rng.hpp"

#include "klsens/errors.hpp"

namespace klsens {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed + kGolden) ^ ((stream + 1) * kGolden));
}

StreamRng::StreamRng(std::uint64_t key) : key_(key), engine_(key) {}

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream)
    : StreamRng(stream_seed(seed, stream)) {}

StreamRng StreamRng::child(std::uint64_t index) const {
  return StreamRng(stream_seed(key_, index));
}

double StreamRng::uniform() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

double StreamRng::uniform_ab(double lo, double hi) {
  require(lo < hi, ErrorKind::validation, "uniform bounds must satisfy lo < hi");
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double StreamRng::normal(double mean, double sigma) {
  require(sigma > 0.0, ErrorKind::validation, "normal sigma must be positive");
  return std::normal_distribution<double>(mean, sigma)(engine_);
}

double StreamRng::exponential(double rate) {
  require(rate > 0.0, ErrorKind::validation, "exponential rate must be positive");
  return std::exponential_distribution<double>(rate)(engine_);
}

double StreamRng::gamma(double shape, double rate) {
  require(shape > 0.0 && rate > 0.0, ErrorKind::validation,
          "gamma shape and rate must be positive");
  return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
}

}  // namespace klsens
