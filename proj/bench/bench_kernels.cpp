// Serial vs OpenMP timing for the enumeration and nested-sampling kernels,
// with a byte-identity check between the two paths.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "klsens/cost.hpp"
#include "klsens/influence.hpp"
#include "klsens/model.hpp"
#include "klsens/nested_mc.hpp"
#include "klsens/parallel.hpp"
#include "klsens/queue.hpp"

using namespace klsens;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch())
      .count();
}

template <class F>
double timed(const char* label, const par::Policy& policy, F&& f) {
  par::set_policy(policy);
  double t0 = now_ms();
  f();
  double dt = now_ms() - t0;
  std::printf("  %-28s %9.1f ms\n", label, dt);
  return dt;
}

bool bytes_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main() {
  std::printf("openmp compiled in: %s\n", par::openmp_enabled() ? "yes" : "no");

  {
    std::vector<double> atoms, probs;
    const int n = 30;
    for (int i = 0; i < n; ++i) {
      atoms.push_back(-1.5 + 3.0 * i / (n - 1));
      probs.push_back(1.0 / n);
    }
    StochasticModel model = StochasticModel::finite(FiniteDistribution(atoms, probs));
    CostSpec cost;
    cost.horizon = HorizonSpec::fixed(4);
    cost.eval = [](std::span<const double> x, std::span<const double>) {
      double s = 0.0;
      for (double v : x) s += v * v + 0.3 * v;
      return s;
    };
    std::printf("influence sweep, 30 atoms, horizon 4 (%d paths):\n", 30 * 30 * 30 * 30);
    std::vector<double> serial_vals, omp_vals;
    timed("serial", par::Policy::serial(), [&] {
      serial_vals = influence_exact(model, cost).values;
    });
    timed("openmp", par::Policy::omp(), [&] {
      omp_vals = influence_exact(model, cost).values;
    });
    std::printf("  identical bytes: %s\n",
                bytes_equal(serial_vals, omp_vals) ? "yes" : "NO");
  }

  {
    QueueConfig qc = QueueConfig::mms(20);
    NestedDesign design{50, 10, 10, 0.95};
    std::printf("sectioned nested run, M/M/20, design (50, 10, 10):\n");
    SectionedEstimate serial_est, omp_est;
    timed("serial", par::Policy::serial(), [&] {
      serial_est = sectioned_zeta1(qc.service, queue_sampler(qc), design, 1234);
    });
    timed("openmp", par::Policy::omp(), [&] {
      omp_est = sectioned_zeta1(qc.service, queue_sampler(qc), design, 1234);
    });
    std::printf("  identical bytes: %s\n",
                bytes_equal(serial_est.raw_sections, omp_est.raw_sections) ? "yes"
                                                                           : "NO");
  }
  par::set_policy(par::Policy::omp());
  return 0;
}
