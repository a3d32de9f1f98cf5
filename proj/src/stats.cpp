#include "levyip/stats.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/SpecialFunctions>

#include "levyip/errors.hpp"

namespace levyip {

namespace {

double regularized_beta(double a, double b, double x) {
  Eigen::ArrayXd aa(1), bb(1), xx(1);
  aa << a;
  bb << b;
  xx << x;
  return Eigen::betainc(aa, bb, xx)(0);
}

}  // namespace

double student_t_cdf(double t, double dof) {
  if (!(dof > 0.0)) throw ConfigError("degrees of freedom must be > 0");
  const double tail = 0.5 * regularized_beta(0.5 * dof, 0.5, dof / (dof + t * t));
  return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double prob, double dof) {
  if (!(prob > 0.0 && prob < 1.0)) throw ConfigError("quantile probability must lie in (0, 1)");
  double lo = -1.0, hi = 1.0;
  while (student_t_cdf(lo, dof) > prob) lo *= 2.0;
  while (student_t_cdf(hi, dof) < prob) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (student_t_cdf(mid, dof) < prob ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

MeanStat mean_and_stderr(std::span<const double> values) {
  MeanStat s;
  s.count = values.size();
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std_error = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  }
  return s;
}

SlopeFit fit_slope(std::span<const std::pair<double, double>> points, double confidence) {
  SlopeFit fit;
  fit.confidence = confidence;
  fit.points = points.size();
  fit.ci_half_width = std::numeric_limits<double>::infinity();
  fit.slope_stderr = std::numeric_limits<double>::infinity();
  std::set<double> distinct;
  for (const auto& [n, e] : points) {
    if (!(n > 0.0) || !(e > 0.0)) {
      fit.degenerate = true;
      fit.reason = "non-positive N or error; log-log fit undefined";
      return fit;
    }
    distinct.insert(n);
  }
  if (distinct.size() < 2) {
    fit.degenerate = true;
    fit.reason = "fewer than 2 distinct N";
    if (!points.empty()) fit.intercept = std::log(points.front().second);
    return fit;
  }
  const auto k = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [n, e] : points) {
    mx += std::log(n);
    my += std::log(e);
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [n, e] : points) {
    const double dx = std::log(n) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(e) - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (points.size() > 2) {
    double ssr = 0.0;
    for (const auto& [n, e] : points) {
      const double r = std::log(e) - (fit.intercept + fit.slope * std::log(n));
      ssr += r * r;
    }
    const double dof = k - 2.0;
    fit.slope_stderr = std::sqrt(ssr / dof / sxx);
    fit.ci_half_width = student_t_quantile(0.5 * (1.0 + confidence), dof) * fit.slope_stderr;
  }
  return fit;
}

}  // namespace levyip
