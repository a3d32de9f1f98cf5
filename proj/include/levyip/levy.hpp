#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include <Eigen/Core>

#include "levyip/rng.hpp"

namespace levyip {

/// Spectral measure of the symmetric stable process.
///   isotropic:    uniform on the sphere, generator -(-Delta)^{sigma/2}
///   axis_product: atoms on +-e_j, generator -sum_j (-d_jj)^{sigma/2}
enum class NoiseVariant { isotropic, axis_product };

std::string to_string(NoiseVariant v);
NoiseVariant noise_variant_from_string(const std::string& name);

struct LevyConfig {
  double sigma = 1.5;
  int dim = 1;
  NoiseVariant variant = NoiseVariant::isotropic;

  /// Throws ConfigError unless 1 < sigma < 2 and dim >= 1.
  void validate() const;
};

/// psi(xi) with E[exp(i xi.L_t)] = exp(-t psi(xi)).
template <typename Derived>
typename Derived::Scalar characteristic_exponent(const Eigen::MatrixBase<Derived>& xi,
                                                 const LevyConfig& cfg) {
  using Scalar = typename Derived::Scalar;
  const Scalar sigma = static_cast<Scalar>(cfg.sigma);
  if (cfg.variant == NoiseVariant::isotropic) {
    return std::pow(xi.squaredNorm(), sigma / Scalar(2));
  }
  return xi.cwiseAbs().array().pow(sigma).sum();
}

/// Scalar-component overload used by the grid code (up to two axes).
template <typename Scalar>
Scalar characteristic_exponent(Scalar xi0, Scalar xi1, const LevyConfig& cfg) {
  const Scalar sigma = static_cast<Scalar>(cfg.sigma);
  if (cfg.variant == NoiseVariant::isotropic) {
    return std::pow(xi0 * xi0 + xi1 * xi1, sigma / Scalar(2));
  }
  return std::pow(std::abs(xi0), sigma) + std::pow(std::abs(xi1), sigma);
}

/// C with psi(xi) >= C |xi|^sigma. Equal to 1 for both variants: the
/// axis-product exponent attains |xi|^sigma on the coordinate axes.
double nondegeneracy_constant(const LevyConfig& cfg);

/// One draw of a standard symmetric sigma-stable variable with
/// E[exp(i xi X)] = exp(-|xi|^sigma) (Chambers-Mallows-Stuck).
double sample_symmetric_stable(double sigma, CounterStream& rng);

/// One draw of a positive a-stable variable with E[exp(-u S)] = exp(-u^a),
/// 0 < a < 1 (Kanter's representation).
double sample_positive_stable(double a, CounterStream& rng);

/// Writes an increment L_dt into out (size cfg.dim). dt == 0 yields zeros.
void sample_increment(const LevyConfig& cfg, double dt, CounterStream& rng, std::span<double> out);

Eigen::VectorXd sample_increment(const LevyConfig& cfg, double dt, CounterStream& rng);

/// Sample mean of |L_1|^beta over n_samples draws.
double moment_probe(const LevyConfig& cfg, double beta_exponent, std::size_t n_samples,
                    CounterStream& rng);

}  // namespace levyip
