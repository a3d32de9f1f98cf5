#pragma once

#include <cmath>
#include <numbers>

#include "levyip/rng.hpp"
#include "levyip/spectral.hpp"

namespace levyip::testing {

/// Uniform noise in [-1, 1] at every node.
inline Field random_field(const Grid& g, std::uint64_t seed, int components = 1) {
  Field f(g, components);
  CounterStream rng({seed, 0, 0, 0});
  for (Eigen::Index i = 0; i < f.values().size(); ++i) f.values().data()[i] = 2.0 * rng.uniform() - 1.0;
  return f;
}

/// Band-limited random field: a handful of low modes with random phases.
inline Field smooth_random_field(const Grid& g, std::uint64_t seed, int kmax = 3) {
  CounterStream rng({seed, 1, 0, 0});
  Field f(g, 1);
  const double w = 2.0 * std::numbers::pi / g.box_len;
  for (int k0 = 0; k0 <= kmax; ++k0) {
    for (int k1 = (g.dim == 2 ? -kmax : 0); k1 <= (g.dim == 2 ? kmax : 0); ++k1) {
      const double amp = rng.uniform() - 0.5, phase = 2.0 * std::numbers::pi * rng.uniform();
      for (std::size_t i = 0; i < g.node_count(); ++i) {
        const Point x = g.node_position(i);
        const double arg = w * (k0 * x(0) + (g.dim == 2 ? k1 * x(1) : 0.0)) + phase;
        f.values()(static_cast<Eigen::Index>(i), 0) += amp * std::cos(arg);
      }
    }
  }
  return f;
}

inline double max_abs_diff(const Field& a, const Field& b) { return (a.values() - b.values()).abs().maxCoeff(); }

}  // namespace levyip::testing
