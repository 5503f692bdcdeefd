#include "klsens/cost.hpp"

#include <cmath>
#include <memory>

#include "klsens/enumeration.hpp"
#include "klsens/errors.hpp"

namespace klsens {

HorizonSpec HorizonSpec::fixed(int T) {
  require(T >= 1, ErrorKind::validation, "horizon length must be at least 1");
  HorizonSpec h;
  h.kind = Kind::fixed;
  h.length = T;
  return h;
}

HorizonSpec HorizonSpec::bounded(
    int t_max, std::function<int(std::span<const double>, std::span<const double>)> stop) {
  require(t_max >= 1, ErrorKind::validation, "stopping-time bound must be at least 1");
  require(static_cast<bool>(stop), ErrorKind::validation, "stopping rule must be callable");
  HorizonSpec h;
  h.kind = Kind::random_bounded;
  h.length = t_max;
  h.stop = std::move(stop);
  return h;
}

HorizonSpec HorizonSpec::independent(std::function<double(int)> pmf) {
  require(static_cast<bool>(pmf), ErrorKind::validation, "tau pmf must be callable");
  HorizonSpec h;
  h.kind = Kind::random_independent;
  h.length = 0;
  h.tau_pmf = std::move(pmf);
  return h;
}

std::function<double(int)> HorizonSpec::geometric_pmf(double q) {
  require(q > 0.0 && q < 1.0, ErrorKind::validation,
          "geometric success probability must lie in (0, 1)");
  return [q](int t) { return t >= 1 ? q * std::pow(1.0 - q, t - 1) : 0.0; };
}

int HorizonSpec::stop_at(std::span<const double> x, std::span<const double> y) const {
  require(kind == Kind::random_bounded, ErrorKind::validation,
          "stop_at applies to bounded stopping times only");
  int tau = stop(x, y);
  require(tau >= 1 && tau <= length, ErrorKind::validation,
          "stopping rule returned a time outside [1, T_max]");
  return tau;
}

double HorizonSpec::tau_tail(int t) const {
  require(kind == Kind::random_independent, ErrorKind::validation,
          "tau_tail applies to independent stopping times only");
  if (t <= 1) return 1.0;
  double cdf = 0.0;
  for (int k = 1; k < t; ++k) cdf += tau_pmf(k);
  return std::max(0.0, 1.0 - cdf);
}

int HorizonSpec::sample_tau(StreamRng& rng) const {
  require(kind == Kind::random_independent, ErrorKind::validation,
          "sample_tau applies to independent stopping times only");
  double u = rng.uniform();
  double acc = 0.0;
  for (int t = 1; t <= 1 << 22; ++t) {
    acc += tau_pmf(t);
    if (u < acc) return t;
  }
  fail(ErrorKind::numeric_range, "tau pmf mass does not reach the sampled uniform");
}

double CostSpec::operator()(std::span<const double> x, std::span<const double> y) const {
  return eval(x, y);
}

std::vector<double> draw_auxiliary(const CostSpec& cost, StreamRng& rng) {
  std::vector<double> y(cost.aux_count);
  if (cost.auxiliary)
    for (auto& v : y) v = cost.auxiliary->draw(rng);
  return y;
}

CostSpec integrate_auxiliary(const CostSpec& cost) {
  if (!cost.auxiliary || cost.aux_count == 0) return cost;
  require(cost.auxiliary->has_exact(), ErrorKind::validation,
          "exact auxiliary integration needs a finite-support auxiliary model");
  auto aux = std::make_shared<FiniteDistribution>(cost.auxiliary->exact());
  path_count_checked(aux->size(), static_cast<int>(cost.aux_count), kEnumBudget,
                     "auxiliary integration");
  auto inner = cost.eval;
  int depth = static_cast<int>(cost.aux_count);
  CostSpec out = cost;
  out.auxiliary.reset();
  out.aux_count = 0;
  out.eval = [aux, inner, depth](std::span<const double> x, std::span<const double>) {
    double acc = 0.0;
    for_each_path(*aux, depth,
                  [&](std::span<const int>, std::span<const double> yvals, double p) {
                    acc += p * inner(x, yvals);
                  });
    return acc;
  };
  return out;
}

std::vector<double> cost_table(const FiniteDistribution& d, const CostSpec& cost) {
  require(cost.horizon.kind == HorizonSpec::Kind::fixed && cost.horizon.length == 1,
          ErrorKind::validation, "cost table applies to horizon 1 only");
  CostSpec flat = integrate_auxiliary(cost);
  std::vector<double> h(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    double x = d.atom(i);
    h[i] = flat.eval(std::span<const double>(&x, 1), {});
  }
  return h;
}

}  // namespace klsens
