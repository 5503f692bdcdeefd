#include "klsens/model.hpp"

#include "klsens/errors.hpp"

namespace klsens {

StochasticModel::StochasticModel(std::string name, Sampler s,
                                 std::optional<FiniteDistribution> exact)
    : name_(std::move(name)), sample_(std::move(s)), exact_(std::move(exact)) {}

StochasticModel StochasticModel::finite(FiniteDistribution d) {
  auto shared = std::make_shared<FiniteDistribution>(d);
  Sampler s = [shared](StreamRng& rng) {
    return shared->atom(shared->index_from_uniform(rng.uniform()));
  };
  return StochasticModel("finite", std::move(s), std::move(d));
}

StochasticModel StochasticModel::exponential(double rate) {
  require(rate > 0.0, ErrorKind::validation, "exponential rate must be positive");
  return StochasticModel("exponential",
                         [rate](StreamRng& rng) { return rng.exponential(rate); },
                         std::nullopt);
}

StochasticModel StochasticModel::gamma(double shape, double rate) {
  require(shape > 0.0 && rate > 0.0, ErrorKind::validation,
          "gamma shape and rate must be positive");
  return StochasticModel("gamma",
                         [shape, rate](StreamRng& rng) { return rng.gamma(shape, rate); },
                         std::nullopt);
}

StochasticModel StochasticModel::uniform(double lo, double hi) {
  require(lo < hi, ErrorKind::validation, "uniform bounds must satisfy lo < hi");
  return StochasticModel("uniform",
                         [lo, hi](StreamRng& rng) { return rng.uniform_ab(lo, hi); },
                         std::nullopt);
}

StochasticModel StochasticModel::normal(double mean, double sigma) {
  require(sigma > 0.0, ErrorKind::validation, "normal sigma must be positive");
  return StochasticModel("normal",
                         [mean, sigma](StreamRng& rng) { return rng.normal(mean, sigma); },
                         std::nullopt);
}

StochasticModel StochasticModel::from_sampler(std::string name, Sampler s) {
  require(static_cast<bool>(s), ErrorKind::validation, "sampler must be callable");
  return StochasticModel(std::move(name), std::move(s), std::nullopt);
}

const FiniteDistribution& StochasticModel::exact() const {
  require(exact_.has_value(), ErrorKind::validation,
          "model '" + name_ + "' has no exact finite-support representation");
  return *exact_;
}

std::vector<double> sample_stream(const StochasticModel& model, std::uint64_t seed,
                                  std::uint64_t stream, std::size_t count) {
  StreamRng rng(seed, stream);
  std::vector<double> out(count);
  for (auto& v : out) v = model.draw(rng);
  return out;
}

}  // namespace klsens
