#include "levyip/levy.hpp"

#include <numbers>

#include "levyip/errors.hpp"

namespace levyip {

std::string to_string(NoiseVariant v) {
  return v == NoiseVariant::isotropic ? "isotropic" : "axis_product";
}

NoiseVariant noise_variant_from_string(const std::string& name) {
  if (name == "isotropic") return NoiseVariant::isotropic;
  if (name == "axis_product") return NoiseVariant::axis_product;
  throw ConfigError("unknown noise variant '" + name + "' (expected isotropic or axis_product)");
}

void LevyConfig::validate() const {
  if (!(sigma > 1.0 && sigma < 2.0)) {
    throw ConfigError("stability index sigma must lie in (1, 2), got " + std::to_string(sigma));
  }
  if (dim < 1) {
    throw ConfigError("dimension must be >= 1, got " + std::to_string(dim));
  }
}

double nondegeneracy_constant(const LevyConfig& cfg) {
  cfg.validate();
  return 1.0;
}

double sample_symmetric_stable(double sigma, CounterStream& rng) {
  const double u = std::numbers::pi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  return std::sin(sigma * u) / std::pow(std::cos(u), 1.0 / sigma) *
         std::pow(std::cos((1.0 - sigma) * u) / w, (1.0 - sigma) / sigma);
}

double sample_positive_stable(double a, CounterStream& rng) {
  const double u = std::numbers::pi * rng.uniform();
  const double w = rng.exponential();
  return std::sin(a * u) / std::pow(std::sin(u), 1.0 / a) *
         std::pow(std::sin((1.0 - a) * u) / w, (1.0 - a) / a);
}

void sample_increment(const LevyConfig& cfg, double dt, CounterStream& rng, std::span<double> out) {
  cfg.validate();
  if (dt < 0.0) throw ConfigError("time step must be >= 0");
  if (out.size() != static_cast<std::size_t>(cfg.dim)) {
    throw ConfigError("increment buffer size does not match dimension");
  }
  if (dt == 0.0) {
    for (double& v : out) v = 0.0;
    return;
  }
  if (cfg.variant == NoiseVariant::isotropic) {
    // L_dt = sqrt(2 S) G with S the sigma/2-stable subordinator at time dt.
    const double a = 0.5 * cfg.sigma;
    const double s = std::pow(dt, 1.0 / a) * sample_positive_stable(a, rng);
    const double scale = std::sqrt(2.0 * s);
    for (double& v : out) v = scale * rng.normal();
    return;
  }
  const double scale = std::pow(dt, 1.0 / cfg.sigma);
  for (double& v : out) v = scale * sample_symmetric_stable(cfg.sigma, rng);
}

Eigen::VectorXd sample_increment(const LevyConfig& cfg, double dt, CounterStream& rng) {
  Eigen::VectorXd out(cfg.dim > 0 ? cfg.dim : 0);
  sample_increment(cfg, dt, rng, std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

double moment_probe(const LevyConfig& cfg, double beta_exponent, std::size_t n_samples,
                    CounterStream& rng) {
  cfg.validate();
  if (n_samples == 0) throw ConfigError("moment_probe needs at least one sample");
  Eigen::VectorXd x(cfg.dim);
  const std::span<double> view(x.data(), static_cast<std::size_t>(cfg.dim));
  double acc = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    sample_increment(cfg, 1.0, rng, view);
    acc += std::pow(x.norm(), beta_exponent);
  }
  return acc / static_cast<double>(n_samples);
}

}  // namespace levyip
