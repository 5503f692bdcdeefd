#include "klsens/nested_mc.hpp"

#include <cmath>

#include "klsens/errors.hpp"
#include "klsens/influence.hpp"
#include "klsens/parallel.hpp"
#include "klsens/stats.hpp"

namespace klsens {

AnovaEstimate anova_sigma_m2(const std::vector<std::vector<double>>& H) {
  const std::size_t K = H.size();
  require(K >= 2, ErrorKind::validation, "need at least two conditioning draws");
  const std::size_t n = H.front().size();
  require(n >= 2, ErrorKind::validation, "need at least two inner evaluations");
  for (const auto& row : H)
    require(row.size() == n, ErrorKind::validation, "ragged nested-sample matrix");

  std::vector<double> row_means(K);
  double grand = 0.0;
  double within = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    double m = stats::mean(H[k]);
    row_means[k] = m;
    grand += m;
    for (double v : H[k]) within += (v - m) * (v - m);
  }
  grand /= static_cast<double>(K);
  AnovaEstimate out;
  out.sigma_eps2 = within / (static_cast<double>(K) * static_cast<double>(n - 1));
  double between = 0.0;
  for (double m : row_means) between += (m - grand) * (m - grand);
  out.sigma_m2 = between / static_cast<double>(K - 1) -
                 out.sigma_eps2 / static_cast<double>(n);
  return out;
}

ConditionalSampler swap_sum_sampler(const StochasticModel& model, const CostSpec& cost) {
  require(cost.horizon.kind == HorizonSpec::Kind::fixed, ErrorKind::validation,
          "the swap-sum sampler needs a fixed horizon");
  const int T = cost.horizon.length;
  return [&model, cost, T](double x, StreamRng& rng) {
    std::vector<double> path(T);
    path[0] = x;
    for (int t = 1; t < T; ++t) path[t] = model.draw(rng);
    std::vector<double> aux = draw_auxiliary(cost, rng);
    return swap_sum(cost, path, aux);
  };
}

namespace {

void check_design(const NestedDesign& d) {
  require(d.outer >= 2 && d.inner >= 2 && d.sections >= 2, ErrorKind::validation,
          "nested design needs outer >= 2, inner >= 2, sections >= 2");
  require(d.confidence > 0.0 && d.confidence < 1.0, ErrorKind::validation,
          "confidence level must lie in (0, 1)");
}

// Section values Z_l for a full design; cell (l, k) draws from its own
// child stream so thread count cannot affect the result.
std::vector<double> section_values(const StochasticModel& model,
                                   const ConditionalSampler& sampler,
                                   const NestedDesign& design, std::uint64_t seed,
                                   std::uint64_t stream) {
  const std::size_t N = design.sections, K = design.outer, n = design.inner;
  StreamRng base(seed, stream);
  std::vector<std::vector<std::vector<double>>> H(
      N, std::vector<std::vector<double>>(K, std::vector<double>(n)));
  par::for_indexed(N * K, [&](std::size_t cell) {
    StreamRng rng = base.child(cell);
    const std::size_t l = cell / K, k = cell % K;
    double x = model.draw(rng);
    for (std::size_t j = 0; j < n; ++j) H[l][k][j] = sampler(x, rng);
  });
  std::vector<double> z(N);
  for (std::size_t l = 0; l < N; ++l) z[l] = anova_sigma_m2(H[l]).sigma_m2;
  return z;
}

}  // namespace

SectionedEstimate sectioned_zeta1(const StochasticModel& model,
                                  const ConditionalSampler& sampler,
                                  const NestedDesign& design, std::uint64_t seed,
                                  std::uint64_t stream) {
  check_design(design);
  SectionedEstimate out;
  out.confidence = design.confidence;
  out.raw_sections = section_values(model, sampler, design, seed, stream);
  const double z_bar = stats::mean(out.raw_sections);
  if (z_bar <= 0.0) {
    out.point = 0.0;
    out.clamped = true;
    return out;
  }
  out.point = std::sqrt(2.0 * z_bar);
  const double sigma = std::sqrt(stats::sample_variance(out.raw_sections));
  const double t = stats::student_t_quantile(
      0.5 * (1.0 + design.confidence),
      static_cast<double>(design.sections - 1));
  const double half =
      sigma / (2.0 * std::sqrt(z_bar)) * t /
      std::sqrt(static_cast<double>(design.sections));
  out.ci_low = std::sqrt(2.0) * (std::sqrt(z_bar) - half);
  out.ci_high = std::sqrt(2.0) * (std::sqrt(z_bar) + half);
  return out;
}

SectionedEstimate sectioned_zeta1(const StochasticModel& model, const CostSpec& cost,
                                  const NestedDesign& design, std::uint64_t seed,
                                  std::uint64_t stream) {
  return sectioned_zeta1(model, swap_sum_sampler(model, cost), design, seed, stream);
}

std::vector<PilotRow> pilot_inner_sweep(const StochasticModel& model,
                                        const ConditionalSampler& sampler,
                                        const NestedDesign& design,
                                        const std::vector<std::size_t>& inner_grid,
                                        std::uint64_t seed, std::uint64_t stream) {
  require(!inner_grid.empty(), ErrorKind::validation, "pilot grid is empty");
  std::vector<PilotRow> rows;
  rows.reserve(inner_grid.size());
  std::uint64_t sub = 0;
  for (std::size_t n : inner_grid) {
    NestedDesign d = design;
    d.inner = n;
    check_design(d);
    auto z = section_values(model, sampler, d, seed, stream + sub++);
    PilotRow row;
    row.inner = n;
    row.sigma_m2 = stats::mean(z);
    row.std_error = std::sqrt(stats::sample_variance(z) /
                              static_cast<double>(z.size()));
    row.zeta1_point = std::sqrt(2.0 * std::max(row.sigma_m2, 0.0));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace klsens
