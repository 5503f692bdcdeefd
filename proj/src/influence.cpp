#include "klsens/influence.hpp"

#include <algorithm>
#include <cmath>

#include "klsens/enumeration.hpp"
#include "klsens/errors.hpp"
#include "klsens/parallel.hpp"
#include "klsens/stats.hpp"

namespace klsens {

namespace {

int fixed_horizon(const CostSpec& cost) {
  require(cost.horizon.kind == HorizonSpec::Kind::fixed, ErrorKind::validation,
          "this operation needs a fixed time horizon");
  return cost.horizon.length;
}

const FiniteDistribution& exact_support(const StochasticModel& model) {
  require(model.has_exact(), ErrorKind::validation,
          "exact computation needs a finite-support model");
  return model.exact();
}

void require_no_auxiliary(const CostSpec& cost) {
  require(!cost.auxiliary || cost.aux_count == 0, ErrorKind::validation,
          "random-horizon exact computation does not integrate auxiliary "
          "models; integrate the auxiliary first");
}

double sup_abs_or_fail(const CostSpec& cost) {
  require(cost.sup_abs.has_value(), ErrorKind::validation,
          "independent stopping times need a declared bound sup_abs on |h| "
          "(bounded-cost assumption)");
  require(*cost.sup_abs >= 0.0 && std::isfinite(*cost.sup_abs), ErrorKind::validation,
          "sup_abs must be finite and nonnegative");
  return *cost.sup_abs;
}

// Smallest cut with sup|h| * P0(tau >= t) below 1e-10, respecting the
// enumeration budget Sum_k n^k.
int choose_t_cut(const CostSpec& cost, std::size_t n_atoms) {
  const double c = sup_abs_or_fail(cost);
  double tail = 1.0;
  std::size_t states = 0;
  for (int t = 1; t <= 1 << 20; ++t) {
    std::size_t layer = path_count_checked(n_atoms, t, kEnumBudget,
                                           "random-horizon truncation");
    require(states <= kEnumBudget - layer, ErrorKind::budget,
            "random-horizon truncation exceeds the enumeration budget before "
            "the tail bound reaches 1e-10; pass an explicit t_cut");
    states += layer;
    if (c * tail < 1e-10) return t;
    tail -= cost.horizon.tau_pmf(t);
    tail = std::max(tail, 0.0);
    if (c * tail < 1e-10) return t;
  }
  fail(ErrorKind::regime, "tau tail bound never reached 1e-10");
}

// Verify the sampling pmf covers every position the stopping time can reach.
void check_pmf_support(const RandomizedHorizonConfig& config, const CostSpec& cost) {
  require(static_cast<bool>(config.pmf), ErrorKind::validation,
          "randomized-horizon pmf must be callable");
  if (cost.horizon.kind == HorizonSpec::Kind::random_bounded) {
    for (int w = 1; w <= cost.horizon.length; ++w)
      require(config.pmf(w) > 0.0, ErrorKind::bias,
              "sampling pmf assigns zero mass to position " + std::to_string(w) +
                  " which the stopping time can reach; the estimator would be biased");
    return;
  }
  double tau_tail = 1.0;
  for (int w = 1; w <= 200000 && tau_tail > 1e-14; ++w) {
    require(config.pmf(w) > 0.0, ErrorKind::bias,
            "sampling pmf assigns zero mass to position " + std::to_string(w) +
                " which the stopping time can reach; the estimator would be biased");
    tau_tail -= cost.horizon.tau_pmf(w);
  }
}

int sample_pmf(const std::function<double(int)>& pmf, StreamRng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (int t = 1; t <= 1 << 22; ++t) {
    acc += pmf(t);
    if (u < acc) return t;
  }
  fail(ErrorKind::numeric_range, "sampling pmf mass does not reach the drawn uniform");
}

McEstimate summarize(const std::vector<double>& draws) {
  McEstimate e;
  e.replications = draws.size();
  e.value = stats::mean(draws);
  e.std_error = draws.size() > 1
                    ? std::sqrt(stats::sample_variance(draws) /
                                static_cast<double>(draws.size()))
                    : 0.0;
  return e;
}

// One accumulator per first-coordinate block, merged in block order so the
// result is identical under any thread count.  merge must be associative
// image of elementwise addition over `Block`.
template <class Block, class SweepFn>
std::vector<Block> sweep_blocks(std::size_t n, const SweepFn& sweep) {
  std::vector<Block> blocks(n);
  par::for_indexed(n, [&](std::size_t first) { blocks[first] = sweep(first); });
  return blocks;
}

}  // namespace

double swap_sum(const CostSpec& cost, std::span<const double> path,
                std::span<const double> aux) {
  const int T = fixed_horizon(cost);
  require(path.size() == static_cast<std::size_t>(T), ErrorKind::validation,
          "path length must equal the horizon");
  if (cost.symmetric) return static_cast<double>(T) * cost.eval(path, aux);
  std::vector<double> buf(path.begin(), path.end());
  double total = 0.0;
  for (int t = 0; t < T; ++t) {
    std::swap(buf[0], buf[t]);
    total += cost.eval(buf, aux);
    std::swap(buf[0], buf[t]);
  }
  return total;
}

InfluenceExact influence_exact(const StochasticModel& model, const CostSpec& cost) {
  const int T = fixed_horizon(cost);
  const FiniteDistribution& d = exact_support(model);
  const std::size_t n = d.size();
  path_count_checked(n, T, kEnumBudget, "influence enumeration");
  const CostSpec flat = integrate_auxiliary(cost);

  struct Block {
    std::vector<double> acc;  // acc[t * n + i] = Sum prob * h over paths with X_t = atom i
    double mean_h = 0.0;
  };
  auto blocks = sweep_blocks<Block>(n, [&](std::size_t first) {
    Block b{std::vector<double>(static_cast<std::size_t>(T) * n, 0.0), 0.0};
    for_each_path_with_first(
        d, T, static_cast<int>(first),
        [&](std::span<const int> idx, std::span<const double> vals, double prob) {
          double h = flat.eval(vals, {});
          b.mean_h += prob * h;
          for (int t = 0; t < T; ++t)
            b.acc[static_cast<std::size_t>(t) * n + idx[t]] += prob * h;
        });
    return b;
  });

  std::vector<double> acc(static_cast<std::size_t>(T) * n, 0.0);
  double mean_h = 0.0;
  for (const auto& b : blocks) {
    mean_h += b.mean_h;
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += b.acc[j];
  }
  InfluenceExact out;
  out.mean_h = mean_h;
  out.values.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double g = 0.0;
    for (int t = 0; t < T; ++t) g += acc[static_cast<std::size_t>(t) * n + i];
    out.values[i] = g / d.prob(i);
  }
  return out;
}

McEstimate influence_mc(const StochasticModel& model, const CostSpec& cost, double x,
                        std::size_t replications, std::uint64_t seed,
                        std::uint64_t stream) {
  const int T = fixed_horizon(cost);
  require(replications >= 1, ErrorKind::validation, "need at least one replication");
  StreamRng base(seed, stream);
  std::vector<double> draws(replications);
  par::for_indexed(replications, [&](std::size_t r) {
    StreamRng rng = base.child(r);
    std::vector<double> path(T);
    path[0] = x;
    for (int t = 1; t < T; ++t) path[t] = model.draw(rng);
    std::vector<double> aux = draw_auxiliary(cost, rng);
    draws[r] = swap_sum(cost, path, aux);
  });
  return summarize(draws);
}

InteractionExact interaction_exact(const StochasticModel& model, const CostSpec& cost) {
  const int T = fixed_horizon(cost);
  const FiniteDistribution& d = exact_support(model);
  const std::size_t n = d.size();
  path_count_checked(n, T, kEnumBudget, "interaction enumeration");
  const CostSpec flat = integrate_auxiliary(cost);

  // acc2[(t * T + s) * n^2 + i * n + j], entries with t == s unused.
  const std::size_t pair_stride = n * n;
  const std::size_t acc2_size = static_cast<std::size_t>(T) * T * pair_stride;

  struct Block {
    std::vector<double> acc2;
    std::vector<double> acc;
    double mean_h = 0.0;
  };
  auto sweep = [&](std::size_t first) {
    Block b{std::vector<double>(acc2_size, 0.0),
            std::vector<double>(static_cast<std::size_t>(T) * n, 0.0), 0.0};
    for_each_path_with_first(
        d, T, static_cast<int>(first),
        [&](std::span<const int> idx, std::span<const double> vals, double prob) {
          double h = flat.eval(vals, {});
          double ph = prob * h;
          b.mean_h += ph;
          for (int t = 0; t < T; ++t) {
            b.acc[static_cast<std::size_t>(t) * n + idx[t]] += ph;
            for (int s = 0; s < T; ++s) {
              if (s == t) continue;
              b.acc2[(static_cast<std::size_t>(t) * T + s) * pair_stride +
                     static_cast<std::size_t>(idx[t]) * n + idx[s]] += ph;
            }
          }
        });
    return b;
  };

  // Sequential scratch when per-block storage would be large; identical
  // arithmetic either way (per-block partials merged in block order).
  std::vector<double> acc2(acc2_size, 0.0);
  std::vector<double> acc(static_cast<std::size_t>(T) * n, 0.0);
  double mean_h = 0.0;
  auto merge = [&](const Block& b) {
    mean_h += b.mean_h;
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += b.acc[j];
    for (std::size_t j = 0; j < acc2.size(); ++j) acc2[j] += b.acc2[j];
  };
  if (acc2_size * n <= (std::size_t{1} << 25)) {
    auto blocks = sweep_blocks<Block>(n, sweep);
    for (const auto& b : blocks) merge(b);
  } else {
    for (std::size_t first = 0; first < n; ++first) merge(sweep(first));
  }

  std::vector<double> g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int t = 0; t < T; ++t) g[i] += acc[static_cast<std::size_t>(t) * n + i];
    g[i] /= d.prob(i);
  }
  InteractionExact out;
  out.pair_values.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s2 = 0.0;
      for (int t = 0; t < T; ++t)
        for (int s = 0; s < T; ++s) {
          if (s == t) continue;
          s2 += acc2[(static_cast<std::size_t>(t) * T + s) * pair_stride + i * n + j];
        }
      out.pair_values[i][j] = s2 / (d.prob(i) * d.prob(j));
    }

  double g_mean = d.mean_of(g);
  double big_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      big_mean += d.prob(i) * d.prob(j) * out.pair_values[i][j];
  double nu = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      nu += d.prob(i) * d.prob(j) * (out.pair_values[i][j] - big_mean) *
            (g[i] - g_mean) * (g[j] - g_mean);
  out.nu = nu;
  return out;
}

namespace {

struct TruncationPlan {
  int t_cut = 0;
  double tail_bound = 0.0;
};

TruncationPlan plan_truncation(const StochasticModel& model, const CostSpec& cost,
                               int t_cut) {
  const auto& horizon = cost.horizon;
  require(horizon.is_random(), ErrorKind::validation,
          "random-horizon operation needs a random horizon");
  require_no_auxiliary(cost);
  const std::size_t n = exact_support(model).size();
  TruncationPlan plan;
  if (horizon.kind == HorizonSpec::Kind::random_bounded) {
    plan.t_cut = horizon.length;
    plan.tail_bound = 0.0;
    path_count_checked(n, plan.t_cut, kEnumBudget, "random-horizon enumeration");
    return plan;
  }
  plan.t_cut = t_cut > 0 ? t_cut : choose_t_cut(cost, n);
  std::size_t states = 0;
  for (int k = 1; k <= plan.t_cut; ++k) {
    std::size_t layer =
        path_count_checked(n, k, kEnumBudget, "random-horizon enumeration");
    require(states <= kEnumBudget - layer, ErrorKind::budget,
            "random-horizon enumeration exceeds the 10^7-state budget");
    states += layer;
  }
  plan.tail_bound = sup_abs_or_fail(cost) * horizon.tau_tail(plan.t_cut + 1);
  return plan;
}

}  // namespace

InfluenceTruncated influence_exact_random(const StochasticModel& model,
                                          const CostSpec& cost, int t_cut) {
  const FiniteDistribution& d = exact_support(model);
  const std::size_t n = d.size();
  TruncationPlan plan = plan_truncation(model, cost, t_cut);
  InfluenceTruncated out;
  out.t_cut = plan.t_cut;
  out.tail_bound = plan.tail_bound;
  out.values.assign(n, 0.0);

  if (cost.horizon.kind == HorizonSpec::Kind::random_bounded) {
    const int t_max = plan.t_cut;
    struct Block { std::vector<double> acc; };
    auto blocks = sweep_blocks<Block>(n, [&](std::size_t first) {
      Block b{std::vector<double>(static_cast<std::size_t>(t_max) * n, 0.0)};
      for_each_path_with_first(
          d, t_max, static_cast<int>(first),
          [&](std::span<const int> idx, std::span<const double> vals, double prob) {
            int tau = cost.horizon.stop_at(vals, {});
            double h = cost.eval(vals.first(static_cast<std::size_t>(tau)), {});
            for (int t = 0; t < tau; ++t)
              b.acc[static_cast<std::size_t>(t) * n + idx[t]] += prob * h;
          });
      return b;
    });
    std::vector<double> acc(static_cast<std::size_t>(t_max) * n, 0.0);
    for (const auto& b : blocks)
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += b.acc[j];
    for (std::size_t i = 0; i < n; ++i) {
      double g = 0.0;
      for (int t = 0; t < t_max; ++t) g += acc[static_cast<std::size_t>(t) * n + i];
      out.values[i] = g / d.prob(i);
    }
    return out;
  }

  for (int k = 1; k <= plan.t_cut; ++k) {
    const double pk = cost.horizon.tau_pmf(k);
    struct Block { std::vector<double> acc; };
    auto blocks = sweep_blocks<Block>(n, [&](std::size_t first) {
      Block b{std::vector<double>(static_cast<std::size_t>(k) * n, 0.0)};
      for_each_path_with_first(
          d, k, static_cast<int>(first),
          [&](std::span<const int> idx, std::span<const double> vals, double prob) {
            double h = cost.eval(vals, {});
            for (int t = 0; t < k; ++t)
              b.acc[static_cast<std::size_t>(t) * n + idx[t]] += prob * h;
          });
      return b;
    });
    std::vector<double> acc(static_cast<std::size_t>(k) * n, 0.0);
    for (const auto& b : blocks)
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += b.acc[j];
    for (std::size_t i = 0; i < n; ++i) {
      double g = 0.0;
      for (int t = 0; t < k; ++t) g += acc[static_cast<std::size_t>(t) * n + i];
      out.values[i] += pk * g / d.prob(i);
    }
  }
  return out;
}

McEstimate influence_mc_random(const StochasticModel& model, const CostSpec& cost,
                               const RandomizedHorizonConfig& config, double x,
                               std::size_t replications, std::uint64_t seed,
                               std::uint64_t stream) {
  const auto& horizon = cost.horizon;
  require(horizon.is_random(), ErrorKind::validation,
          "randomized-horizon estimator needs a random horizon");
  require(replications >= 1, ErrorKind::validation, "need at least one replication");
  RandomizedHorizonConfig cfg = config;
  if (!cfg.pmf) cfg.pmf = HorizonSpec::geometric_pmf(cfg.pmf_param);
  check_pmf_support(cfg, cost);
  if (horizon.kind == HorizonSpec::Kind::random_independent) sup_abs_or_fail(cost);

  StreamRng base(seed, stream);
  std::vector<double> draws(replications);
  par::for_indexed(replications, [&](std::size_t r) {
    StreamRng rng = base.child(r);
    int omega = sample_pmf(cfg.pmf, rng);
    if (horizon.kind == HorizonSpec::Kind::random_bounded) {
      const int t_max = horizon.length;
      if (omega > t_max) {  // tau <= t_max < omega, so the draw contributes 0
        draws[r] = 0.0;
        return;
      }
      std::vector<double> path(t_max);
      for (auto& v : path) v = model.draw(rng);
      path[omega - 1] = x;
      std::vector<double> aux = draw_auxiliary(cost, rng);
      int tau = horizon.stop_at(path, aux);
      draws[r] = tau < omega
                     ? 0.0
                     : cost.eval(std::span<const double>(path).first(
                                     static_cast<std::size_t>(tau)),
                                 aux) /
                           cfg.pmf(omega);
      return;
    }
    int tau = horizon.sample_tau(rng);
    if (tau < omega) {
      draws[r] = 0.0;
      return;
    }
    std::vector<double> path(tau);
    for (auto& v : path) v = model.draw(rng);
    path[omega - 1] = x;
    std::vector<double> aux = draw_auxiliary(cost, rng);
    draws[r] = cost.eval(path, aux) / cfg.pmf(omega);
  });
  return summarize(draws);
}

InteractionTruncated interaction_exact_random(const StochasticModel& model,
                                              const CostSpec& cost, int t_cut) {
  const FiniteDistribution& d = exact_support(model);
  const std::size_t n = d.size();
  TruncationPlan plan = plan_truncation(model, cost, t_cut);
  InteractionTruncated out;
  out.t_cut = plan.t_cut;
  out.tail_bound = plan.tail_bound;
  out.pair_values.assign(n, std::vector<double>(n, 0.0));
  std::vector<double> g(n, 0.0);

  if (cost.horizon.kind == HorizonSpec::Kind::random_bounded) {
    const int t_max = plan.t_cut;
    const std::size_t pair_stride = n * n;
    const std::size_t acc2_size =
        static_cast<std::size_t>(t_max) * t_max * pair_stride;
    struct Block {
      std::vector<double> acc2;
      std::vector<double> acc;
    };
    auto sweep = [&](std::size_t first) {
      Block b{std::vector<double>(acc2_size, 0.0),
              std::vector<double>(static_cast<std::size_t>(t_max) * n, 0.0)};
      for_each_path_with_first(
          d, t_max, static_cast<int>(first),
          [&](std::span<const int> idx, std::span<const double> vals, double prob) {
            int tau = cost.horizon.stop_at(vals, {});
            double ph = prob * cost.eval(vals.first(static_cast<std::size_t>(tau)), {});
            for (int t = 0; t < tau; ++t)
              b.acc[static_cast<std::size_t>(t) * n + idx[t]] += ph;
            for (int t = 0; t < t_max; ++t)
              for (int s = 0; s < t_max; ++s) {
                if (s == t || std::min(t, s) >= tau) continue;
                b.acc2[(static_cast<std::size_t>(t) * t_max + s) * pair_stride +
                       static_cast<std::size_t>(idx[t]) * n + idx[s]] += ph;
              }
          });
      return b;
    };
    std::vector<double> acc2(acc2_size, 0.0);
    std::vector<double> acc(static_cast<std::size_t>(t_max) * n, 0.0);
    auto merge = [&](const Block& b) {
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += b.acc[j];
      for (std::size_t j = 0; j < acc2.size(); ++j) acc2[j] += b.acc2[j];
    };
    if (acc2_size * n <= (std::size_t{1} << 25)) {
      auto blocks = sweep_blocks<Block>(n, sweep);
      for (const auto& b : blocks) merge(b);
    } else {
      for (std::size_t first = 0; first < n; ++first) merge(sweep(first));
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (int t = 0; t < t_max; ++t) g[i] += acc[static_cast<std::size_t>(t) * n + i];
      g[i] /= d.prob(i);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s2 = 0.0;
        for (int t = 0; t < t_max; ++t)
          for (int s = 0; s < t_max; ++s) {
            if (s == t) continue;
            s2 += acc2[(static_cast<std::size_t>(t) * t_max + s) * pair_stride +
                       i * n + j];
          }
        out.pair_values[i][j] = s2 / (d.prob(i) * d.prob(j));
      }
  } else {
    for (int k = 1; k <= plan.t_cut; ++k) {
      const double pk = cost.horizon.tau_pmf(k);
      const std::size_t pair_stride = n * n;
      const std::size_t acc2_size = static_cast<std::size_t>(k) * k * pair_stride;
      struct Block {
        std::vector<double> acc2;
        std::vector<double> acc;
      };
      auto sweep = [&](std::size_t first) {
        Block b{std::vector<double>(acc2_size, 0.0),
                std::vector<double>(static_cast<std::size_t>(k) * n, 0.0)};
        for_each_path_with_first(
            d, k, static_cast<int>(first),
            [&](std::span<const int> idx, std::span<const double> vals, double prob) {
              double ph = prob * cost.eval(vals, {});
              for (int t = 0; t < k; ++t) {
                b.acc[static_cast<std::size_t>(t) * n + idx[t]] += ph;
                for (int s = 0; s < k; ++s) {
                  if (s == t) continue;
                  b.acc2[(static_cast<std::size_t>(t) * k + s) * pair_stride +
                         static_cast<std::size_t>(idx[t]) * n + idx[s]] += ph;
                }
              }
            });
        return b;
      };
      std::vector<double> acc2(acc2_size, 0.0);
      std::vector<double> acc(static_cast<std::size_t>(k) * n, 0.0);
      auto merge = [&](const Block& b) {
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += b.acc[j];
        for (std::size_t j = 0; j < acc2.size(); ++j) acc2[j] += b.acc2[j];
      };
      if (acc2_size * n <= (std::size_t{1} << 25)) {
        auto blocks = sweep_blocks<Block>(n, sweep);
        for (const auto& b : blocks) merge(b);
      } else {
        for (std::size_t first = 0; first < n; ++first) merge(sweep(first));
      }
      // Positions beyond the horizon k: the conditional expectation loses the
      // out-of-horizon coordinate, leaving a one-coordinate term for each of
      // the (t_cut - k) choices of the far index.
      std::vector<double> b_one(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        double s1 = 0.0;
        for (int t = 0; t < k; ++t) s1 += acc[static_cast<std::size_t>(t) * n + i];
        b_one[i] = s1 / d.prob(i);
        g[i] += pk * b_one[i];
      }
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double s2 = 0.0;
          for (int t = 0; t < k; ++t)
            for (int s = 0; s < k; ++s) {
              if (s == t) continue;
              s2 += acc2[(static_cast<std::size_t>(t) * k + s) * pair_stride +
                         i * n + j];
            }
          out.pair_values[i][j] +=
              pk * (s2 / (d.prob(i) * d.prob(j)) +
                    static_cast<double>(plan.t_cut - k) * (b_one[i] + b_one[j]));
        }
    }
  }

  double g_mean = d.mean_of(g);
  double big_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      big_mean += d.prob(i) * d.prob(j) * out.pair_values[i][j];
  double nu = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      nu += d.prob(i) * d.prob(j) * (out.pair_values[i][j] - big_mean) *
            (g[i] - g_mean) * (g[j] - g_mean);
  out.nu = nu;
  return out;
}

}  // namespace klsens
