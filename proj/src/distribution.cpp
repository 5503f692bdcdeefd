#include "klsens/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <json.hpp>

#include "klsens/errors.hpp"
#include "klsens/stats.hpp"

namespace klsens {

namespace {
constexpr double kProbTol = 1e-12;
}

FiniteDistribution::FiniteDistribution(std::vector<double> atoms,
                                       std::vector<double> probs)
    : atoms_(std::move(atoms)), probs_(std::move(probs)) {
  require(!atoms_.empty(), ErrorKind::validation, "distribution needs at least one atom");
  require(atoms_.size() == probs_.size(), ErrorKind::validation,
          "atoms and probabilities must have equal length");
  double total = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    require(std::isfinite(atoms_[i]), ErrorKind::validation, "atoms must be finite");
    require(probs_[i] >= 0.0 && std::isfinite(probs_[i]), ErrorKind::validation,
            "probabilities must be nonnegative and finite");
    total += probs_[i];
  }
  require(std::fabs(total - 1.0) <= kProbTol, ErrorKind::validation,
          "probabilities must sum to 1 within 1e-12");
  for (double& p : probs_) p /= total;
  std::unordered_set<double> seen(atoms_.begin(), atoms_.end());
  require(seen.size() == atoms_.size(), ErrorKind::validation,
          "atoms must be distinct");
  cumulative_.resize(probs_.size());
  double run = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    run += probs_[i];
    cumulative_[i] = run;
  }
  cumulative_.back() = 1.0;
}

double FiniteDistribution::mean_of(std::span<const double> values) const {
  require(values.size() == atoms_.size(), ErrorKind::validation,
          "value table must align with atoms");
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += probs_[i] * values[i];
  return s;
}

std::size_t FiniteDistribution::index_from_uniform(double u) const {
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return static_cast<std::size_t>(it - cumulative_.begin());
}

FiniteDistribution FiniteDistribution::from_json(const nlohmann::json& j) {
  require(j.is_object(), ErrorKind::validation, "distribution JSON must be an object");
  for (const auto& [key, _] : j.items())
    require(key == "atoms" || key == "probs", ErrorKind::validation,
            "unknown distribution field: " + key);
  require(j.contains("atoms") && j.contains("probs"), ErrorKind::validation,
          "distribution JSON needs 'atoms' and 'probs'");
  require(j["atoms"].is_array() && j["probs"].is_array(), ErrorKind::validation,
          "'atoms' and 'probs' must be arrays");
  return FiniteDistribution(j["atoms"].get<std::vector<double>>(),
                            j["probs"].get<std::vector<double>>());
}

nlohmann::json FiniteDistribution::to_json() const {
  return nlohmann::json{{"atoms", atoms_}, {"probs", probs_}};
}

CumulantTriple cumulants(const FiniteDistribution& d, std::span<const double> values) {
  double m = d.mean_of(values);
  double v = 0.0, t = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    double c = values[i] - m;
    v += d.prob(i) * c * c;
    t += d.prob(i) * c * c * c;
  }
  return {m, v, t};
}

double kl_divergence(std::span<const double> f_probs, const FiniteDistribution& p0) {
  require(f_probs.size() == p0.size(), ErrorKind::validation,
          "KL divergence needs matching atom sets");
  double s = 0.0;
  for (std::size_t i = 0; i < f_probs.size(); ++i) {
    double f = f_probs[i];
    require(f >= 0.0, ErrorKind::validation, "probabilities must be nonnegative");
    if (f == 0.0) continue;
    require(p0.prob(i) > 0.0, ErrorKind::validation,
            "absolute continuity violated: mass on an atom the benchmark excludes");
    s += f * std::log(f / p0.prob(i));
  }
  return s;
}

double kl_divergence(const FiniteDistribution& f, const FiniteDistribution& p0) {
  require(f.atoms() == p0.atoms(), ErrorKind::validation,
          "KL divergence needs identical atom sets");
  return kl_divergence(f.probs(), p0);
}

FiniteDistribution discretize_normal(double mean, double sigma, std::size_t n_atoms) {
  require(sigma > 0.0, ErrorKind::validation, "sigma must be positive");
  require(n_atoms >= 2, ErrorKind::validation, "need at least two atoms");
  const auto n = n_atoms;
  std::vector<double> atoms(n), probs(n, 1.0 / static_cast<double>(n));
  // E[Z | bin] = n (phi(z_lo) - phi(z_hi)) for equal-probability bins.
  double pdf_lo = 0.0;  // phi at -inf
  for (std::size_t i = 0; i < n; ++i) {
    double pdf_hi = (i + 1 == n) ? 0.0
                                 : stats::normal_pdf(stats::normal_quantile(
                                       static_cast<double>(i + 1) / static_cast<double>(n)));
    double z = static_cast<double>(n) * (pdf_lo - pdf_hi);
    z = std::clamp(z, -8.0, 8.0);
    atoms[i] = mean + sigma * z;
    pdf_lo = pdf_hi;
  }
  return FiniteDistribution(std::move(atoms), std::move(probs));
}

}  // namespace klsens
