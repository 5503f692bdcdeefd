#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "klsens/sense.hpp"
#include "klsens/stats.hpp"

namespace klsens {

/// First- and second-order KL sensitivity coefficients of a performance
/// measure, with the ingredients they are assembled from.  zeta1 is stored
/// as a magnitude; signed_zeta1() applies the sense (minimization subtracts
/// the square-root term).
struct DerivativeReport {
  double benchmark_mean = 0.0;
  double zeta1 = 0.0;  // sqrt(2 var_g), >= 0
  double zeta2 = 0.0;  // (kappa3_g / 3 + nu) / var_g
  double var_g = 0.0;
  double kappa3_g = 0.0;
  double nu = 0.0;
  Sense sense = Sense::max;
  double relative_impact = 0.0;  // zeta1 / |benchmark_mean|
  bool relative_impact_defined = true;
  std::optional<ConfidenceInterval> benchmark_ci;
  std::optional<ConfidenceInterval> zeta1_ci;

  double signed_zeta1() const { return sense == Sense::min ? -zeta1 : zeta1; }

  nlohmann::json to_json() const;
};

/// Approximation bands of the worst/best-case performance over an eta grid.
/// upper tracks the maximization branch, lower the minimization branch; at
/// order 2 both edges shift by zeta2 * eta.
struct SweepLine {
  std::vector<double> eta;
  std::vector<double> lower;
  std::vector<double> upper;
  double benchmark = 0.0;
  int order = 1;

  std::string to_csv() const;  // columns: eta, lower, upper, benchmark
};

DerivativeReport derive(double var_g, double kappa3_g, double nu, double benchmark,
                        Sense sense);

SweepLine sweep(const DerivativeReport& report, std::span<const double> eta_grid,
                int order);

struct DominanceReport {
  bool dominated = false;   // |param_derivative / param_kl_rate| <= zeta1
  double rescaled = 0.0;    // |param_derivative / param_kl_rate|
  double margin = 0.0;      // zeta1 - rescaled
};

/// Checks that a parametric sensitivity, rescaled by the square-root KL rate
/// of its parameter family, stays below the nonparametric coefficient.
DominanceReport dominance_check(double param_derivative, double param_kl_rate,
                                double zeta1);

}  // namespace klsens
