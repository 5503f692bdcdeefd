#include "klsens/expansion.hpp"

#include <cmath>
#include <sstream>

#include "klsens/errors.hpp"

namespace klsens {

nlohmann::json DerivativeReport::to_json() const {
  nlohmann::json j{
      {"schema", "klsens-report/1"},
      {"benchmark_mean", benchmark_mean},
      {"zeta1", zeta1},
      {"zeta2", zeta2},
      {"var_g", var_g},
      {"kappa3_g", kappa3_g},
      {"nu", nu},
      {"sense", to_string(sense)},
  };
  if (relative_impact_defined)
    j["relative_impact"] = relative_impact;
  else
    j["relative_impact"] = nullptr;
  auto ci_json = [](const ConfidenceInterval& ci) {
    return nlohmann::json{{"lower", ci.lower},
                          {"upper", ci.upper},
                          {"confidence", ci.confidence}};
  };
  if (benchmark_ci) j["benchmark_ci"] = ci_json(*benchmark_ci);
  if (zeta1_ci) j["zeta1_ci"] = ci_json(*zeta1_ci);
  return j;
}

std::string SweepLine::to_csv() const {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << "eta,lower,upper,benchmark\n";
  for (std::size_t i = 0; i < eta.size(); ++i)
    os << eta[i] << ',' << lower[i] << ',' << upper[i] << ',' << benchmark << '\n';
  return os.str();
}

DerivativeReport derive(double var_g, double kappa3_g, double nu, double benchmark,
                        Sense sense) {
  require(var_g > 1e-12, ErrorKind::degeneracy,
          "var of the symmetrized conditional cost is at the degeneracy "
          "threshold; the cost is (almost) insensitive to single-coordinate "
          "changes and the square-root expansion does not apply");
  DerivativeReport r;
  r.benchmark_mean = benchmark;
  r.var_g = var_g;
  r.kappa3_g = kappa3_g;
  r.nu = nu;
  r.sense = sense;
  r.zeta1 = std::sqrt(2.0 * var_g);
  r.zeta2 = (kappa3_g / 3.0 + nu) / var_g;
  if (benchmark == 0.0) {
    r.relative_impact = 0.0;
    r.relative_impact_defined = false;
  } else {
    r.relative_impact = r.zeta1 / std::fabs(benchmark);
    r.relative_impact_defined = true;
  }
  return r;
}

SweepLine sweep(const DerivativeReport& report, std::span<const double> eta_grid,
                int order) {
  require(order == 1 || order == 2, ErrorKind::validation, "order must be 1 or 2");
  SweepLine line;
  line.benchmark = report.benchmark_mean;
  line.order = order;
  line.eta.assign(eta_grid.begin(), eta_grid.end());
  line.lower.reserve(eta_grid.size());
  line.upper.reserve(eta_grid.size());
  for (double eta : eta_grid) {
    require(eta >= 0.0, ErrorKind::validation, "eta grid values must be nonnegative");
    double root = report.zeta1 * std::sqrt(eta);
    double shift = order == 2 ? report.zeta2 * eta : 0.0;
    line.upper.push_back(report.benchmark_mean + root + shift);
    line.lower.push_back(report.benchmark_mean - root + shift);
  }
  return line;
}

DominanceReport dominance_check(double param_derivative, double param_kl_rate,
                                double zeta1) {
  require(param_kl_rate > 0.0, ErrorKind::validation,
          "the KL rescaling rate of the parametric family must be positive");
  DominanceReport r;
  r.rescaled = std::fabs(param_derivative / param_kl_rate);
  r.margin = zeta1 - r.rescaled;
  r.dominated = r.margin >= 0.0;
  return r;
}

}  // namespace klsens
