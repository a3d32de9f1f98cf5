#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>

namespace levyip {

double student_t_cdf(double t, double dof);

/// Inverse of student_t_cdf for prob in (0, 1).
double student_t_quantile(double prob, double dof);

struct MeanStat {
  double mean = 0.0;
  double std_error = 0.0;  ///< sample standard deviation / sqrt(count); 0 for one sample
  std::size_t count = 0;
};

MeanStat mean_and_stderr(std::span<const double> values);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double ci_half_width = 0.0;  ///< two-sided, at `confidence`; +inf with fewer than 3 points
  double confidence = 0.95;
  std::size_t points = 0;
  bool degenerate = false;
  std::string reason;

  /// slope + ci_half_width < 0
  bool negative_with_confidence() const { return !degenerate && slope + ci_half_width < 0.0; }
};

/// Ordinary least squares of log(error) on log(N); the confidence interval
/// uses the residual variance with points - 2 degrees of freedom. Fewer than
/// two distinct N or non-positive errors give a degenerate fit (slope 0 when
/// the N values coincide).
SlopeFit fit_slope(std::span<const std::pair<double, double>> points, double confidence = 0.95);

}  // namespace levyip
