#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include <Eigen/Core>

#include "levyip/errors.hpp"

namespace levyip {

/// Position in the periodic box. Fixed storage for up to two axes.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2, 1>;

/// Uniform periodic grid on [-L/2, L/2)^d with n nodes per axis. Node k of an
/// axis sits at -L/2 + k L/n. Flat node index is row-major (axis 0 slowest).
struct Grid {
  int dim = 1;
  int n = 64;
  double box_len = 2.0 * std::numbers::pi;

  void validate() const {
    if (dim != 1 && dim != 2) throw ConfigError("grid dimension must be 1 or 2");
    if (n < 8 || (n & (n - 1)) != 0) {
      throw ConfigError("grid points per axis must be a power of two >= 8, got " + std::to_string(n));
    }
    if (!(box_len > 0.0)) throw ConfigError("box length must be positive");
  }

  std::size_t node_count() const { return dim == 1 ? std::size_t(n) : std::size_t(n) * n; }
  double spacing() const { return box_len / n; }
  double cell_volume() const { return std::pow(spacing(), dim); }
  double coordinate(int k) const { return -0.5 * box_len + k * spacing(); }

  /// Signed frequency index in {-n/2, ..., n/2 - 1} of FFT slot k.
  int signed_index(int k) const { return k < n / 2 ? k : k - n; }
  double wavenumber(int k) const { return 2.0 * std::numbers::pi / box_len * signed_index(k); }

  /// Axis indices of a flat node / mode index.
  int axis_index(std::size_t flat, int axis) const {
    if (dim == 1) return static_cast<int>(flat);
    return axis == 0 ? static_cast<int>(flat / n) : static_cast<int>(flat % n);
  }

  Point node_position(std::size_t flat) const {
    Point x(dim);
    for (int a = 0; a < dim; ++a) x(a) = coordinate(axis_index(flat, a));
    return x;
  }

  /// Wraps a coordinate into [-L/2, L/2).
  double wrap(double x) const;

  bool operator==(const Grid&) const = default;
};

/// Wraps a coordinate into [-L/2, L/2) for a box of length box_len.
inline double wrap_periodic(double x, double box_len) {
  double y = x - box_len * std::floor((x + 0.5 * box_len) / box_len);
  if (y >= 0.5 * box_len) y -= box_len;
  if (y < -0.5 * box_len) y = -0.5 * box_len;
  return y;
}

/// Minimal-image displacement on a circle of circumference box_len.
inline double periodic_distance(double dx, double box_len) {
  return dx - box_len * std::round(dx / box_len);
}

inline double Grid::wrap(double x) const { return wrap_periodic(x, box_len); }

}  // namespace levyip
