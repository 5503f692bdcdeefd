#include "klsens/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "klsens/enumeration.hpp"
#include "klsens/errors.hpp"
#include "klsens/fixed_point.hpp"
#include "klsens/influence.hpp"
#include "klsens/parallel.hpp"
#include "klsens/rng.hpp"

namespace klsens {

std::string to_string(OracleMethod m) {
  return m == OracleMethod::tilt_closed_form ? "tilt-closed-form" : "simplex-search";
}

namespace {

std::vector<double> benchmark_probs(const FiniteDistribution& d) {
  std::vector<double> p(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) p[i] = d.prob(i);
  return p;
}

double kl_to_benchmark(const std::vector<double>& q, const std::vector<double>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    if (p[i] <= 0.0) return std::numeric_limits<double>::infinity();
    s += q[i] * std::log(q[i] / p[i]);
  }
  return std::max(s, 0.0);
}

// E_f[h] and its gradient in the product-measure marginal q, by enumeration
// with leave-one-out probability products.
double objective_and_grad(const FiniteDistribution& d, const CostSpec& flat, int T,
                          const std::vector<double>& q, std::vector<double>* grad) {
  const std::size_t n = d.size();
  if (grad) std::fill(grad->begin(), grad->end(), 0.0);
  double total = 0.0;
  std::vector<double> pre(T + 1), suf(T + 1);
  for_each_path(d, T, [&](std::span<const int> idx, std::span<const double> vals,
                          double) {
    double h = flat.eval(vals, {});
    pre[0] = 1.0;
    for (int t = 0; t < T; ++t) pre[t + 1] = pre[t] * q[idx[t]];
    total += pre[T] * h;
    if (grad) {
      suf[T] = 1.0;
      for (int t = T - 1; t >= 0; --t) suf[t] = suf[t + 1] * q[idx[t]];
      for (int t = 0; t < T; ++t) (*grad)[idx[t]] += pre[t] * suf[t + 1] * h;
    }
  });
  return total;
}

// Euclidean projection onto the probability simplex.
void project_simplex(std::vector<double>& q) {
  std::vector<double> u = q;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  int rho = 0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    css += u[j];
    double t = (css - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) {
      rho = static_cast<int>(j + 1);
      theta = t;
    }
  }
  (void)rho;
  for (double& v : q) v = std::max(v - theta, 0.0);
  double s = std::accumulate(q.begin(), q.end(), 0.0);
  for (double& v : q) v /= s;
}

// Pull q toward p along the segment until the KL budget holds; the KL is 0
// at p, so the bisection always terminates feasible.
void restore_feasibility(std::vector<double>& q, const std::vector<double>& p,
                         double eta) {
  if (kl_to_benchmark(q, p) <= eta) return;
  double lo = 0.0, hi = 1.0;  // blend weight toward p
  for (int k = 0; k < 60; ++k) {
    double mid = 0.5 * (lo + hi);
    std::vector<double> blend(q.size());
    for (std::size_t i = 0; i < q.size(); ++i)
      blend[i] = (1.0 - mid) * q[i] + mid * p[i];
    if (kl_to_benchmark(blend, p) <= eta)
      hi = mid;
    else
      lo = mid;
  }
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = (1.0 - hi) * q[i] + hi * p[i];
}

struct Candidate {
  double value = 0.0;
  std::vector<double> q;
  double kl = 0.0;
};

Candidate polish(const FiniteDistribution& d, const CostSpec& flat, int T,
                 const std::vector<double>& p, std::vector<double> q, double eta,
                 double dir) {
  restore_feasibility(q, p, eta);
  std::vector<double> grad(q.size());
  Candidate best{dir * -std::numeric_limits<double>::infinity(), q, 0.0};
  double scale = 0.0;
  objective_and_grad(d, flat, T, q, &grad);
  for (double gmag : grad) scale = std::max(scale, std::fabs(gmag));
  double step = scale > 0.0 ? 0.5 / scale : 0.1;
  for (int k = 0; k < 400; ++k) {
    double val = objective_and_grad(d, flat, T, q, &grad);
    bool better = dir > 0 ? val > best.value : val < best.value;
    if (better) {
      best.value = val;
      best.q = q;
    }
    for (std::size_t i = 0; i < q.size(); ++i)
      q[i] += dir * step * grad[i];
    project_simplex(q);
    restore_feasibility(q, p, eta);
    step *= 0.99;
  }
  double final_val = objective_and_grad(d, flat, T, q, nullptr);
  if (dir > 0 ? final_val > best.value : final_val < best.value) {
    best.value = final_val;
    best.q = q;
  }
  best.kl = kl_to_benchmark(best.q, p);
  return best;
}

// T = 1: scan the exponential-tilt family f_i ~ p_i e^{beta h_i}; all
// arithmetic stays in probability space so the scan is an independent check
// of the cumulant-based solver.
OracleResult tilt_scan(const FiniteDistribution& d, const std::vector<double>& h,
                       double eta, Sense sense) {
  const std::vector<double> p = benchmark_probs(d);
  const std::size_t n = d.size();
  auto tilted = [&](double beta) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
      if (p[i] > 0.0) mx = std::max(mx, beta * h[i]);
    std::vector<double> f(n);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += (f[i] = p[i] * std::exp(beta * h[i] - mx));
    for (double& v : f) v /= z;
    return f;
  };
  auto kl_at = [&](double beta) { return kl_to_benchmark(tilted(beta), p); };

  double mean = 0.0, var = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += p[i] * h[i];
  for (std::size_t i = 0; i < n; ++i) var += p[i] * (h[i] - mean) * (h[i] - mean);
  require(var > 1e-12, ErrorKind::degeneracy,
          "cost is almost surely constant under the benchmark; "
          "nondegeneracy assumption violated");

  const double dir = sense == Sense::max ? 1.0 : -1.0;
  double lo = 0.0, hi = dir / std::sqrt(var);
  int guard = 0;
  while (kl_at(hi) < eta) {
    lo = hi;
    hi *= 2.0;
    require(++guard < 200, ErrorKind::regime,
            "eta is at or beyond the KL radius attainable by exponential "
            "tilting of this support");
  }
  for (int k = 0; k < 200; ++k) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (kl_at(mid) < eta ? lo : hi) = mid;
  }
  double beta = 0.5 * (lo + hi);
  std::vector<double> f = tilted(beta);
  OracleResult out;
  out.method = OracleMethod::tilt_closed_form;
  out.kl_at_opt = kl_to_benchmark(f, p);
  out.optimum = 0.0;
  for (std::size_t i = 0; i < n; ++i) out.optimum += f[i] * h[i];
  std::vector<double> atoms(n);
  for (std::size_t i = 0; i < n; ++i) atoms[i] = d.atom(i);
  out.argmax = FiniteDistribution(atoms, f);
  return out;
}

}  // namespace

OracleResult brute_force(const StochasticModel& model, const CostSpec& cost,
                         double eta, Sense sense, std::uint64_t seed, int restarts) {
  require(model.has_exact(), ErrorKind::validation,
          "the brute-force oracle needs a finite-support model");
  require(eta >= 0.0, ErrorKind::validation, "eta must be nonnegative");
  require(sense != Sense::both, ErrorKind::validation,
          "the oracle needs a single sense (max or min)");
  require(restarts >= 50, ErrorKind::validation,
          "the restart protocol requires at least 50 restarts");
  const FiniteDistribution& d = model.exact();
  const std::size_t n = d.size();
  require(cost.horizon.kind == HorizonSpec::Kind::fixed, ErrorKind::validation,
          "the oracle handles fixed horizons only");
  const int T = cost.horizon.length;
  require(n <= 8 && T <= 3, ErrorKind::budget,
          "oracle budget: support size <= 8 and horizon <= 3");

  const CostSpec flat = integrate_auxiliary(cost);
  const std::vector<double> p = benchmark_probs(d);
  std::vector<double> atoms(n);
  for (std::size_t i = 0; i < n; ++i) atoms[i] = d.atom(i);

  if (eta == 0.0) {
    OracleResult out;
    out.method = T == 1 ? OracleMethod::tilt_closed_form : OracleMethod::simplex_search;
    out.optimum = objective_and_grad(d, flat, T, p, nullptr);
    out.argmax = d;
    out.kl_at_opt = 0.0;
    return out;
  }

  if (T == 1) return tilt_scan(d, cost_table(d, cost), eta, sense);

  const double dir = sense == Sense::max ? 1.0 : -1.0;
  std::vector<std::vector<double>> starts;
  starts.push_back(p);
  // Aggregated-tilt start: tilt the marginal by the symmetrized conditional
  // cost, budgeted to eta.
  {
    CostSpec flat_copy = flat;
    InfluenceExact inf = influence_exact(model, flat_copy);
    OracleResult agg = [&]() -> OracleResult {
      try {
        return tilt_scan(d, inf.values, eta, sense);
      } catch (const Error&) {
        OracleResult r;
        r.argmax = d;
        return r;
      }
    }();
    starts.push_back(benchmark_probs(agg.argmax));
  }
  // The fixed-point solution under test, so the oracle never reports worse.
  try {
    FixedPointSolution fp = calibrate_alpha(model, sense == Sense::max ? cost : [&] {
      CostSpec neg = cost;
      auto inner = cost.eval;
      neg.eval = [inner](std::span<const double> x, std::span<const double> y) {
        return -inner(x, y);
      };
      return neg;
    }(), eta, 1e-9);
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = p[i] * fp.L_star.weights[i];
    starts.push_back(q);
  } catch (const Error&) {
  }
  StreamRng base(seed, 0);
  while (static_cast<int>(starts.size()) < restarts) {
    StreamRng rng = base.child(starts.size());
    std::vector<double> q(n);
    double s = 0.0;
    for (double& v : q) s += (v = rng.exponential(1.0));
    for (double& v : q) v /= s;
    starts.push_back(q);
  }

  std::vector<Candidate> results(starts.size());
  par::for_indexed(starts.size(), [&](std::size_t r) {
    results[r] = polish(d, flat, T, p, starts[r], eta, dir);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < results.size(); ++r) {
    bool better = dir > 0 ? results[r].value > results[best].value
                          : results[r].value < results[best].value;
    if (better) best = r;
  }
  OracleResult out;
  out.method = OracleMethod::simplex_search;
  out.optimum = results[best].value;
  out.kl_at_opt = results[best].kl;
  out.argmax = FiniteDistribution(atoms, results[best].q);
  require(out.kl_at_opt <= eta + 1e-9, ErrorKind::numeric_range,
          "oracle returned an infeasible point");
  return out;
}

}  // namespace klsens
