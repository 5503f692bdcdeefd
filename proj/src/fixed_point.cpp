#include "klsens/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "klsens/enumeration.hpp"
#include "klsens/errors.hpp"
#include "klsens/exact1d.hpp"
#include "klsens/influence.hpp"
#include "klsens/parallel.hpp"

namespace klsens {

void check_likelihood(const FiniteDistribution& d, const LikelihoodVector& L) {
  require(L.weights.size() == d.size(), ErrorKind::validation,
          "likelihood vector must align with the support");
  double mean = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    require(L.weights[i] >= 0.0 && std::isfinite(L.weights[i]), ErrorKind::validation,
            "likelihood weights must be finite and nonnegative");
    mean += d.prob(i) * L.weights[i];
  }
  require(std::fabs(mean - 1.0) <= 1e-12 * std::max(1.0, std::fabs(mean)),
          ErrorKind::validation, "likelihood vector must have unit mean");
}

LikelihoodVector ones_likelihood(std::size_t n) {
  return {std::vector<double>(n, 1.0)};
}

namespace {

int fixed_horizon(const CostSpec& cost) {
  require(cost.horizon.kind == HorizonSpec::Kind::fixed, ErrorKind::validation,
          "fixed-point computation needs a fixed time horizon");
  return cost.horizon.length;
}

// gL(x_i) = Sum_t E0[h * prod_{r != t} L(X_r) | X_t = x_i] via leave-one-out
// prefix/suffix products, blocked over the first coordinate.
std::vector<double> g_of_likelihood(const FiniteDistribution& d, const CostSpec& flat,
                                    int T, const std::vector<double>& L) {
  const std::size_t n = d.size();
  struct Block { std::vector<double> acc; };
  std::vector<Block> blocks(n);
  par::for_indexed(n, [&](std::size_t first) {
    Block b{std::vector<double>(static_cast<std::size_t>(T) * n, 0.0)};
    std::vector<double> pre(T + 1), suf(T + 1);
    for_each_path_with_first(
        d, T, static_cast<int>(first),
        [&](std::span<const int> idx, std::span<const double> vals, double prob) {
          double ph = prob * flat.eval(vals, {});
          pre[0] = 1.0;
          for (int t = 0; t < T; ++t) pre[t + 1] = pre[t] * L[idx[t]];
          suf[T] = 1.0;
          for (int t = T - 1; t >= 0; --t) suf[t] = suf[t + 1] * L[idx[t]];
          for (int t = 0; t < T; ++t)
            b.acc[static_cast<std::size_t>(t) * n + idx[t]] +=
                ph * pre[t] * suf[t + 1];
        });
    blocks[first] = std::move(b);
  });
  std::vector<double> acc(static_cast<std::size_t>(T) * n, 0.0);
  for (const auto& b : blocks)
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += b.acc[j];
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int t = 0; t < T; ++t) g[i] += acc[static_cast<std::size_t>(t) * n + i];
    g[i] /= d.prob(i);
  }
  return g;
}

LikelihoodVector exp_normalize(const FiniteDistribution& d,
                               const std::vector<double>& g, double alpha) {
  const std::size_t n = d.size();
  double mx = *std::max_element(g.begin(), g.end());
  LikelihoodVector out{std::vector<double>(n)};
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.weights[i] = std::exp((g[i] - mx) / alpha);
    z += d.prob(i) * out.weights[i];
  }
  require(z > 0.0 && std::isfinite(z), ErrorKind::numeric_range,
          "tilting operator overflowed after max-shift guarding; alpha is "
          "too small for this cost");
  for (double& w : out.weights) w /= z;
  return out;
}

double l1_distance(const FiniteDistribution& d, const std::vector<double>& a,
                   const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) s += d.prob(i) * std::fabs(a[i] - b[i]);
  return s;
}

double likelihood_kl(const FiniteDistribution& d, const std::vector<double>& L) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (L[i] > 0.0) s += d.prob(i) * L[i] * std::log(L[i]);
  return std::max(s, 0.0);
}

// E0[h * prod_t L(X_t)] by enumeration.
double weighted_objective(const FiniteDistribution& d, const CostSpec& flat, int T,
                          const std::vector<double>& L) {
  const std::size_t n = d.size();
  std::vector<double> partial(n, 0.0);
  par::for_indexed(n, [&](std::size_t first) {
    double s = 0.0;
    for_each_path_with_first(
        d, T, static_cast<int>(first),
        [&](std::span<const int> idx, std::span<const double> vals, double prob) {
          double w = 1.0;
          for (int t = 0; t < T; ++t) w *= L[idx[t]];
          s += prob * w * flat.eval(vals, {});
        });
    partial[first] = s;
  });
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

struct Flattened {
  CostSpec flat;
  int T;
};

Flattened flatten(const StochasticModel& model, const CostSpec& cost) {
  int T = fixed_horizon(cost);
  require(model.has_exact(), ErrorKind::validation,
          "fixed-point computation needs a finite-support model");
  path_count_checked(model.exact().size(), T, kEnumBudget, "fixed-point enumeration");
  return {integrate_auxiliary(cost), T};
}

}  // namespace

LikelihoodVector apply_tilt_operator(const LikelihoodVector& L, double alpha,
                                     const StochasticModel& model,
                                     const CostSpec& cost) {
  require(alpha > 0.0, ErrorKind::validation, "alpha must be positive");
  const FiniteDistribution& d = model.exact();
  check_likelihood(d, L);
  auto [flat, T] = flatten(model, cost);
  return exp_normalize(d, g_of_likelihood(d, flat, T, L.weights), alpha);
}

nlohmann::json FixedPointSolution::to_json() const {
  return nlohmann::json{{"weights", L_star.weights}, {"alpha", alpha},
                        {"kl", kl},                  {"objective", objective},
                        {"iterations", iterations},  {"residual", residual}};
}

FixedPointSolution solve_fixed_point(const StochasticModel& model, const CostSpec& cost,
                                     double alpha,
                                     std::optional<LikelihoodVector> start,
                                     double tol, int max_iter) {
  require(alpha > 0.0, ErrorKind::validation, "alpha must be positive");
  require(tol > 0.0, ErrorKind::validation, "tolerance must be positive");
  const FiniteDistribution& d = model.exact();
  auto [flat, T] = flatten(model, cost);

  FixedPointSolution out;
  out.alpha = alpha;

  if (T == 1) {
    std::vector<double> h = cost_table(d, cost);
    out.L_star = LikelihoodVector{tilt_likelihood(d, h, alpha)};
    out.iterations = 1;
    out.residual = l1_distance(
        d, exp_normalize(d, g_of_likelihood(d, flat, 1, out.L_star.weights), alpha)
               .weights,
        out.L_star.weights);
    out.residual_history = {out.residual};
  } else {
    LikelihoodVector L = start ? *start : ones_likelihood(d.size());
    check_likelihood(d, L);
    int worse = 0;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= max_iter; ++k) {
      LikelihoodVector next =
          exp_normalize(d, g_of_likelihood(d, flat, T, L.weights), alpha);
      double res = l1_distance(d, next.weights, L.weights);
      out.residual_history.push_back(res);
      out.iterations = k;
      L = std::move(next);
      if (res <= tol) {
        out.residual = res;
        break;
      }
      worse = res >= prev ? worse + 1 : 0;
      require(worse < 10, ErrorKind::regime,
              "fixed-point residuals stopped contracting (last ratio " +
                  std::to_string(res / prev) +
                  "); alpha is below the contraction range for this cost");
      prev = res;
      require(k < max_iter, ErrorKind::regime,
              "fixed-point iteration did not converge within the iteration cap");
    }
    out.L_star = std::move(L);
    // Re-verify the fixed-point property on the returned iterate.
    out.residual = l1_distance(
        d, exp_normalize(d, g_of_likelihood(d, flat, T, out.L_star.weights), alpha)
               .weights,
        out.L_star.weights);
  }
  out.kl = likelihood_kl(d, out.L_star.weights);
  out.objective = weighted_objective(d, flat, T, out.L_star.weights);
  return out;
}

FixedPointSolution calibrate_alpha(const StochasticModel& model, const CostSpec& cost,
                                   double eta, double tol) {
  require(eta > 0.0, ErrorKind::validation, "eta must be positive");
  require(tol > 0.0, ErrorKind::validation, "tolerance must be positive");
  const FiniteDistribution& d = model.exact();
  auto [flat, T] = flatten(model, cost);

  double lo_h = std::numeric_limits<double>::infinity();
  double hi_h = -lo_h;
  for_each_path(d, T, [&](std::span<const int>, std::span<const double> vals,
                          double) {
    double v = flat.eval(vals, {});
    lo_h = std::min(lo_h, v);
    hi_h = std::max(hi_h, v);
  });
  require(hi_h - lo_h > 0.0, ErrorKind::degeneracy,
          "cost is constant over the product space; nondegeneracy assumption "
          "violated");

  // KL spent by the fixed point decreases in alpha; bracket eta then bisect
  // in log alpha.  Warm starts keep the inner solves cheap and deterministic.
  auto solve_at = [&](double alpha, const std::optional<LikelihoodVector>& warm) {
    return solve_fixed_point(model, cost, alpha, warm, 1e-13, 2000);
  };
  double alpha0 = 10.0 * (hi_h - lo_h);
  FixedPointSolution sol = solve_at(alpha0, {});
  double lo_a, hi_a;        // kl(lo_a) >= eta >= kl(hi_a)
  FixedPointSolution lo_sol = sol, hi_sol = sol;
  if (sol.kl >= eta) {
    lo_a = alpha0;
    lo_sol = sol;
    hi_a = alpha0;
    while (hi_sol.kl > eta) {
      double prev_kl = hi_sol.kl;
      hi_a *= 2.0;
      hi_sol = solve_at(hi_a, hi_sol.L_star);
      require(hi_sol.kl <= prev_kl + 1e-12, ErrorKind::regime,
              "KL spent by the fixed point increased with alpha; outside the "
              "calibration regime");
      require(hi_a < 1e18, ErrorKind::regime,
              "alpha bracket expansion failed to cross eta");
    }
  } else {
    hi_a = alpha0;
    hi_sol = sol;
    lo_a = alpha0;
    int steps = 0;
    while (lo_sol.kl < eta) {
      double prev_kl = lo_sol.kl;
      lo_a *= 0.5;
      try {
        lo_sol = solve_at(lo_a, lo_sol.L_star);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::regime)
          fail(ErrorKind::regime,
               "eta is too large for the fixed-point method: the iteration "
               "stops contracting before the KL budget is reached");
        throw;
      }
      require(lo_sol.kl >= prev_kl - 1e-12, ErrorKind::regime,
              "KL spent by the fixed point decreased with smaller alpha; "
              "outside the calibration regime");
      require(++steps < 200, ErrorKind::regime,
              "alpha bracket contraction failed to cross eta");
    }
  }

  FixedPointSolution best = std::fabs(lo_sol.kl - eta) < std::fabs(hi_sol.kl - eta)
                                ? lo_sol
                                : hi_sol;
  for (int k = 0; k < 200 && std::fabs(best.kl - eta) > tol; ++k) {
    double mid = std::sqrt(lo_a * hi_a);
    if (mid == lo_a || mid == hi_a) break;
    FixedPointSolution mid_sol = solve_at(mid, best.L_star);
    if (mid_sol.kl >= eta) {
      lo_a = mid;
      lo_sol = mid_sol;
    } else {
      hi_a = mid;
      hi_sol = mid_sol;
    }
    if (std::fabs(mid_sol.kl - eta) < std::fabs(best.kl - eta)) best = mid_sol;
  }
  require(std::fabs(best.kl - eta) <= tol, ErrorKind::regime,
          "alpha bisection stalled before matching the KL budget");
  return best;
}

QuadraticApprox quadratic_approx(const StochasticModel& model, const CostSpec& cost,
                                 double beta) {
  const FiniteDistribution& d = model.exact();
  auto [flat, T] = flatten(model, cost);
  const std::size_t n = d.size();

  CostSpec flat_spec = flat;  // keep a stable copy for the influence pass
  InfluenceExact inf = influence_exact(model, flat_spec);
  QuadraticApprox out;
  out.g = inf.values;
  out.mean_g = d.mean_of(out.g);
  std::vector<double> gc(n);
  for (std::size_t i = 0; i < n; ++i) gc[i] = out.g[i] - out.mean_g;
  for (std::size_t i = 0; i < n; ++i) {
    out.var_g += d.prob(i) * gc[i] * gc[i];
    out.kappa3_g += d.prob(i) * gc[i] * gc[i] * gc[i];
  }

  // W(x_i) = Sum_t Sum_{r != t} E0[h * (g(X_r) - E0 g) | X_t = x_i].
  struct Block { std::vector<double> acc; };
  std::vector<Block> blocks(n);
  par::for_indexed(n, [&](std::size_t first) {
    Block b{std::vector<double>(static_cast<std::size_t>(T) * n, 0.0)};
    for_each_path_with_first(
        d, T, static_cast<int>(first),
        [&](std::span<const int> idx, std::span<const double> vals, double prob) {
          double ph = prob * flat.eval(vals, {});
          double sum_gc = 0.0;
          for (int t = 0; t < T; ++t) sum_gc += gc[idx[t]];
          for (int t = 0; t < T; ++t)
            b.acc[static_cast<std::size_t>(t) * n + idx[t]] +=
                ph * (sum_gc - gc[idx[t]]);
        });
    blocks[first] = std::move(b);
  });
  std::vector<double> acc(static_cast<std::size_t>(T) * n, 0.0);
  for (const auto& b : blocks)
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += b.acc[j];
  out.w.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int t = 0; t < T; ++t) out.w[i] += acc[static_cast<std::size_t>(t) * n + i];
    out.w[i] /= d.prob(i);
  }

  double mean_w = d.mean_of(out.w);
  out.v.assign(n, 0.0);
  out.approx.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.v[i] = out.w[i] - mean_w + 0.5 * (gc[i] * gc[i] - out.var_g);
    out.approx[i] = 1.0 + beta * gc[i] + beta * beta * out.v[i];
    out.e0_gv += d.prob(i) * gc[i] * out.v[i];
  }
  return out;
}

}  // namespace klsens
