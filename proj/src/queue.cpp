#include "klsens/queue.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "klsens/errors.hpp"
#include "klsens/influence.hpp"
#include "klsens/parallel.hpp"

namespace klsens {

QueueConfig QueueConfig::mms(int s, int customer) {
  QueueConfig c;
  c.servers = s;
  c.interarrival = StochasticModel::exponential(1.0);
  c.service = StochasticModel::exponential(1.0 / static_cast<double>(s));
  c.customer_index = customer;
  return c;
}

QueueConfig QueueConfig::ggs(int s, int customer) {
  QueueConfig c;
  c.servers = s;
  c.interarrival = StochasticModel::gamma(2.0, 2.0);
  c.service = StochasticModel::uniform(0.0, 2.0 * static_cast<double>(s));
  c.customer_index = customer;
  return c;
}

namespace {

void check_config(const QueueConfig& config) {
  require(config.servers >= 1, ErrorKind::validation, "need at least one server");
  require(config.customer_index >= 1, ErrorKind::validation,
          "customer index must be positive");
}

}  // namespace

double queue_wait(const QueueConfig& config, std::span<const double> services,
                  std::span<const double> gaps) {
  check_config(config);
  const int N = config.customer_index;
  const int s = config.servers;
  require(services.size() >= static_cast<std::size_t>(N - 1), ErrorKind::validation,
          "need a service time per customer ahead of the target");
  require(gaps.size() >= static_cast<std::size_t>(N - 1), ErrorKind::validation,
          "need an interarrival gap per arrival after the first");
  std::vector<double> w(s, 0.0);  // sorted ascending remaining work
  for (int i = 0; i < N - 1; ++i) {
    double v = std::max(w[0] + services[i] - gaps[i], 0.0);
    int j = 1;
    for (; j < s && w[j] - gaps[i] < v; ++j) w[j - 1] = std::max(w[j] - gaps[i], 0.0);
    w[j - 1] = v;
    for (; j < s; ++j) w[j] = std::max(w[j] - gaps[i], 0.0);
  }
  return w[0];
}

double simulate_wait(const QueueConfig& config, std::uint64_t seed,
                     std::uint64_t stream) {
  check_config(config);
  const int N = config.customer_index;
  StreamRng rng(seed, stream);
  std::vector<double> services(N - 1), gaps(N - 1);
  for (double& v : services) v = config.service.draw(rng);
  for (double& v : gaps) v = config.interarrival.draw(rng);
  return queue_wait(config, services, gaps);
}

CostSpec queue_cost(const QueueConfig& config) {
  check_config(config);
  const int N = config.customer_index;
  CostSpec cost;
  if (config.perturb_interarrival) {
    cost.horizon = HorizonSpec::fixed(N - 1 > 0 ? N - 1 : 1);
    cost.auxiliary = config.service;
    cost.aux_count = static_cast<std::size_t>(N - 1);
    cost.eval = [config](std::span<const double> x, std::span<const double> y) {
      return queue_wait(config, y, x);
    };
  } else {
    cost.horizon = HorizonSpec::fixed(N);
    cost.auxiliary = config.interarrival;
    cost.aux_count = static_cast<std::size_t>(N - 1);
    cost.eval = [config](std::span<const double> x, std::span<const double> y) {
      return queue_wait(config, x, y);
    };
  }
  return cost;
}

double conditional_swap_sum(const QueueConfig& config, double x, StreamRng& rng) {
  require(x >= 0.0, ErrorKind::validation,
          "conditioning value must be a nonnegative duration");
  const CostSpec cost = queue_cost(config);
  const StochasticModel& primary =
      config.perturb_interarrival ? config.interarrival : config.service;
  const int T = cost.horizon.length;
  std::vector<double> path(T);
  path[0] = x;
  for (int t = 1; t < T; ++t) path[t] = primary.draw(rng);
  std::vector<double> aux = draw_auxiliary(cost, rng);
  double total = swap_sum(cost, path, aux);
  if (config.center_inner) {
    double baseline = primary.draw(rng);
    std::vector<double> base_path = path;
    base_path[0] = baseline;
    total -= static_cast<double>(T) * cost.eval(base_path, aux);
  }
  return total;
}

ConditionalSampler queue_sampler(const QueueConfig& config) {
  check_config(config);
  return [config](double x, StreamRng& rng) {
    return conditional_swap_sum(config, x, rng);
  };
}

QueueTableRow benchmark_row(const QueueConfig& config, std::size_t samples,
                            const NestedDesign& design, std::uint64_t seed,
                            std::uint64_t stream) {
  check_config(config);
  require(samples >= 2, ErrorKind::validation, "need at least two replications");
  StreamRng base(seed, stream);
  std::vector<double> waits(samples);
  {
    // Children of a dedicated sub-stream so the mean estimate and the nested
    // pipeline never share draws.
    StreamRng mean_base = base.child(0);
    par::for_indexed(samples, [&](std::size_t r) {
      StreamRng rng = mean_base.child(r);
      const int N = config.customer_index;
      std::vector<double> services(N - 1), gaps(N - 1);
      for (double& v : services) v = config.service.draw(rng);
      for (double& v : gaps) v = config.interarrival.draw(rng);
      waits[r] = queue_wait(config, services, gaps);
    });
  }
  QueueTableRow row;
  row.servers = config.servers;
  row.mean = stats::mean(waits);
  double se = std::sqrt(stats::sample_variance(waits) /
                        static_cast<double>(samples));
  double t = stats::student_t_quantile(0.5 * (1.0 + design.confidence),
                                       static_cast<double>(samples - 1));
  row.mean_ci = {row.mean - t * se, row.mean + t * se, design.confidence};

  const StochasticModel& primary =
      config.perturb_interarrival ? config.interarrival : config.service;
  SectionedEstimate z = sectioned_zeta1(primary, queue_sampler(config), design,
                                        seed, stream + 1);
  row.deriv = z.point;
  row.deriv_ci = {z.ci_low, z.ci_high, z.confidence};
  row.deriv_clamped = z.clamped;
  row.relative_impact = row.mean != 0.0 ? row.deriv / std::fabs(row.mean) : 0.0;
  return row;
}

std::vector<QueueTableRow> benchmark_table(const std::vector<QueueConfig>& configs,
                                           std::size_t samples,
                                           const NestedDesign& design,
                                           std::uint64_t seed) {
  std::vector<QueueTableRow> rows;
  rows.reserve(configs.size());
  std::uint64_t stream = 0;
  for (const auto& config : configs) {
    rows.push_back(benchmark_row(config, samples, design, seed, stream));
    stream += 2;
  }
  return rows;
}

std::string table_to_csv(const std::vector<QueueTableRow>& rows) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << "servers,mean,ci_low,ci_high,deriv,deriv_ci_low,deriv_ci_high,"
        "relative_impact\n";
  for (const auto& r : rows)
    os << r.servers << ',' << r.mean << ',' << r.mean_ci.lower << ','
       << r.mean_ci.upper << ',' << r.deriv << ',' << r.deriv_ci.lower << ','
       << r.deriv_ci.upper << ',' << r.relative_impact << '\n';
  return os.str();
}

}  // namespace klsens
