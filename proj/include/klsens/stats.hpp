#pragma once

#include <span>

namespace klsens {

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double confidence = 0.95;
};

namespace stats {

double normal_pdf(double z);
double normal_cdf(double z);
/// Upper tail P(Z > z) for Z ~ N(0, 1), accurate in the far tail.
double normal_sf(double z);
/// Inverse of normal_cdf, |error| < 1e-14 on (0, 1).
double normal_quantile(double p);

/// Regularized incomplete beta function I_x(a, b) by Lentz continued
/// fraction, relative accuracy ~1e-14.
double reg_incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double dof);
/// Inverse Student-t CDF, solved to |cdf(t) - p| <= 1e-12 (well inside the
/// 1e-10 contract).  No tables.
double student_t_quantile(double p, double dof);

/// Least-squares slope of log(y) against log(x).  Entries must be positive.
double loglog_slope(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> v);
double sample_variance(std::span<const double> v);  // divisor n-1

}  // namespace stats
}  // namespace klsens
