#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "klsens/cost.hpp"
#include "klsens/model.hpp"
#include "klsens/nested_mc.hpp"
#include "klsens/stats.hpp"

namespace klsens {

/// FIFO G/G/s system observed at a fixed customer index, starting empty.
/// Service times are the perturbed input by default; set perturb_interarrival
/// to study sensitivity in the arrival process instead.
struct QueueConfig {
  int servers = 1;
  StochasticModel interarrival;
  StochasticModel service;
  int customer_index = 100;
  bool perturb_interarrival = false;
  /// Subtract an independent baseline waiting time from each inner swap-sum
  /// draw (control variate with constant conditional mean); leaves the
  /// outer variance unchanged while shrinking inner noise.
  bool center_inner = true;

  /// Poisson arrivals at rate 1, exponential services at rate 1/s.
  static QueueConfig mms(int s, int customer = 100);
  /// Gamma(2, 2) interarrivals, Uniform[0, 2s] services: a critically loaded
  /// non-Markovian default.
  static QueueConfig ggs(int s, int customer = 100);
};

/// Waiting time of the target customer given the drawn service times
/// (customers 1..N) and interarrival gaps (arrivals 2..N), via the sorted
/// workload-vector recursion from an empty start.
double queue_wait(const QueueConfig& config, std::span<const double> services,
                  std::span<const double> gaps);

/// One replication: draws services then gaps from the stream, runs the
/// recursion.
double simulate_wait(const QueueConfig& config, std::uint64_t seed,
                     std::uint64_t stream);

/// The waiting-time cost as a generic path cost: the primary path is the
/// perturbed input (services by default), the auxiliary path the other one.
CostSpec queue_cost(const QueueConfig& config);

/// Inner sampler for the nested pipeline: fresh draws for everything except
/// the conditioning value, swap sum over service positions, optionally
/// centered by an independent baseline.
ConditionalSampler queue_sampler(const QueueConfig& config);

/// One draw of the (optionally centered) swap sum given conditioning value x.
double conditional_swap_sum(const QueueConfig& config, double x, StreamRng& rng);

struct QueueTableRow {
  int servers = 0;
  double mean = 0.0;
  ConfidenceInterval mean_ci;
  double deriv = 0.0;  // sectioned first-order coefficient
  ConfidenceInterval deriv_ci;
  bool deriv_clamped = false;
  double relative_impact = 0.0;
};

QueueTableRow benchmark_row(const QueueConfig& config, std::size_t samples,
                            const NestedDesign& design, std::uint64_t seed,
                            std::uint64_t stream = 0);

std::vector<QueueTableRow> benchmark_table(const std::vector<QueueConfig>& configs,
                                           std::size_t samples,
                                           const NestedDesign& design,
                                           std::uint64_t seed);

/// CSV with columns: servers, mean, ci_low, ci_high, deriv, deriv_ci_low,
/// deriv_ci_high, relative_impact.
std::string table_to_csv(const std::vector<QueueTableRow>& rows);

}  // namespace klsens
