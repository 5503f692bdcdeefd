#include "klsens/exact1d.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "klsens/errors.hpp"

namespace klsens {

namespace {

void check_table(const FiniteDistribution& d, std::span<const double> h) {
  require(h.size() == d.size(), ErrorKind::validation,
          "cost table must align with atoms");
  for (double v : h)
    require(std::isfinite(v), ErrorKind::validation, "cost values must be finite");
}

// KL divergence of the tilted measure from P0: beta psi'(beta) - psi(beta).
double tilt_kl(const TiltedMoments& m, double beta) {
  return beta * m.mean - m.log_mgf;
}

}  // namespace

double log_mgf(const FiniteDistribution& d, std::span<const double> h, double beta) {
  check_table(d, h);
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < h.size(); ++i)
    if (d.prob(i) > 0.0) shift = std::max(shift, beta * h[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i)
    s += d.prob(i) * std::exp(beta * h[i] - shift);
  require(s > 0.0 && std::isfinite(s), ErrorKind::numeric_range,
          "moment generating function evaluation lost precision");
  return shift + std::log(s);
}

TiltedMoments tilted_moments(const FiniteDistribution& d, std::span<const double> h,
                             double beta) {
  check_table(d, h);
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < h.size(); ++i)
    if (d.prob(i) > 0.0) shift = std::max(shift, beta * h[i]);
  double z = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    double w = d.prob(i) * std::exp(beta * h[i] - shift);
    z += w;
    m1 += w * h[i];
    m2 += w * h[i] * h[i];
  }
  require(z > 0.0 && std::isfinite(z), ErrorKind::numeric_range,
          "tilted moment evaluation lost precision");
  TiltedMoments out;
  out.log_mgf = shift + std::log(z);
  out.mean = m1 / z;
  out.variance = std::max(0.0, m2 / z - out.mean * out.mean);
  return out;
}

std::vector<double> tilt_likelihood(const FiniteDistribution& d, std::span<const double> h,
                                    double alpha) {
  check_table(d, h);
  require(alpha > 0.0, ErrorKind::validation, "tilt temperature must be positive");
  double shift = *std::max_element(h.begin(), h.end());
  std::vector<double> L(h.size());
  double z = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    L[i] = std::exp((h[i] - shift) / alpha);
    z += d.prob(i) * L[i];
  }
  for (double& v : L) v /= z;
  return L;
}

nlohmann::json TiltSolution::to_json() const {
  return nlohmann::json{{"beta_star", beta_star}, {"eta", eta},
                        {"optimum", optimum},     {"psi_at_beta", psi_at_beta},
                        {"iterations", iterations}, {"residual", residual}};
}

TiltSolution solve_tilt(const FiniteDistribution& d, std::span<const double> h,
                        double eta, Sense sense) {
  check_table(d, h);
  require(sense != Sense::both, ErrorKind::validation,
          "solve_tilt needs a single sense (max or min)");
  require(eta >= 0.0, ErrorKind::validation, "eta must be nonnegative");
  auto base = cumulants(d, h);
  if (eta == 0.0) return {0.0, 0.0, base.mean, 0.0, 0, 0.0};
  require(base.variance > 1e-12, ErrorKind::degeneracy,
          "cost is almost surely constant under the benchmark; "
          "nondegeneracy assumption violated");

  const double dir = sense == Sense::max ? 1.0 : -1.0;
  // On the chosen branch, kl(beta) = beta psi'(beta) - psi(beta) increases
  // from 0 as |beta| grows, but is bounded by -log P0(h = extreme value).
  // Expand the bracket geometrically until it straddles eta.
  double lo = 0.0, hi = dir / std::sqrt(base.variance);
  TiltedMoments mh = tilted_moments(d, h, hi);
  int iters = 0;
  while (tilt_kl(mh, hi) < eta) {
    lo = hi;
    hi *= 2.0;
    mh = tilted_moments(d, h, hi);
    require(++iters < 200, ErrorKind::regime,
            "eta is at or beyond the KL radius attainable by exponential "
            "tilting of this support");
  }
  // Safeguarded Newton on f(beta) = kl(beta) - eta, f'(beta) = beta psi''.
  double beta = 0.5 * (lo + hi);
  double residual = std::numeric_limits<double>::infinity();
  TiltedMoments m = tilted_moments(d, h, beta);
  const double scale = std::max(1.0, eta);
  for (int i = 0; i < 200; ++i) {
    ++iters;
    double f = tilt_kl(m, beta) - eta;
    residual = std::fabs(f);
    if (residual <= 1e-15 * scale) break;
    if (f > 0.0) hi = beta; else lo = beta;
    double deriv = beta * m.variance;
    double next = deriv != 0.0 ? beta - f / deriv : 0.5 * (lo + hi);
    bool inside = dir > 0 ? (next > lo && next < hi)
                          : (next < lo && next > hi);
    beta = inside ? next : 0.5 * (lo + hi);
    m = tilted_moments(d, h, beta);
    if (beta == lo || beta == hi) {  // bracket exhausted at double precision
      double f2 = tilt_kl(m, beta) - eta;
      residual = std::fabs(f2);
      break;
    }
  }
  require(residual <= 1e-12 * scale, ErrorKind::regime,
          "tilt equation residual did not reach tolerance");
  return {beta, eta, m.mean, m.log_mgf, iters, residual};
}

Expansion1d expansion1d(const FiniteDistribution& d, std::span<const double> h) {
  check_table(d, h);
  auto c = cumulants(d, h);
  require(c.variance > 1e-12, ErrorKind::degeneracy,
          "cost is almost surely constant under the benchmark; "
          "nondegeneracy assumption violated");
  return {c.mean, std::sqrt(2.0 * c.variance), c.kappa3 / (3.0 * c.variance)};
}

}  // namespace klsens
