#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "levyip/levy.hpp"
#include "levyip/rng.hpp"
#include "levyip/spectral.hpp"

namespace levyip {

// ---------------------------------------------------------------------------
// Mollifier
// ---------------------------------------------------------------------------

/// Normalization c_d of the bump exp(-1/(1-|y|^2)) on the unit ball, d = 1, 2.
double bump_normalization(int dim);

/// V(y) = c_d exp(-1/(1-|y|^2)) for |y| < 1, else 0.
double mollifier_profile(const Point& y);

/// V^N(x) = N^{d beta} V(N^beta x), supported in the ball of radius N^{-beta}.
struct MollifierConfig {
  double beta = 0.2;
  std::size_t particles = 1;

  void validate() const;
  double radius() const;
};

double mollifier_value(const Point& x, const MollifierConfig& m);

// ---------------------------------------------------------------------------
// Clipping
// ---------------------------------------------------------------------------

/// F_M: identity on [-M, M], M + s(1-s)^3(1+3s) with s = |x| - M on the
/// transition band [M, M+1], constant M beyond; odd. The blend matches value
/// and first two derivatives at both ends, so F_M is C^2 with |F_M'| <= 1 and
/// |F_M| <= M + 16/81.
struct ClipConfig {
  double level = 1.0;

  void validate() const;
};

double clip(double x, const ClipConfig& c);
double clip_derivative(double x, const ClipConfig& c);
double clip_second_derivative(double x, const ClipConfig& c);

// ---------------------------------------------------------------------------
// Particle system
// ---------------------------------------------------------------------------

struct ParticleState {
  Eigen::ArrayXXd positions;  ///< N x d, wrapped into [-L/2, L/2)^d
  double box_len = 0.0;
  double time = 0.0;
  std::uint32_t replica_id = 0;
  std::uint64_t step_index = 0;

  std::size_t size() const { return static_cast<std::size_t>(positions.rows()); }
  int dim() const { return static_cast<int>(positions.cols()); }
  Point position(std::size_t i) const {
    Point x(dim());
    for (int a = 0; a < dim(); ++a) x(a) = positions(static_cast<Eigen::Index>(i), a);
    return x;
  }
};

/// Everything the particle dynamics needs besides the initial state.
struct ModelSpec {
  KernelSpec kernel;
  LevyConfig levy;
  double beta = 0.2;                ///< mollifier scaling exponent
  std::optional<ClipConfig> clip;   ///< absent means F = identity
  Grid grid;                        ///< deposition grid

  MollifierConfig mollifier(std::size_t particles) const { return {beta, particles}; }
  void validate() const;
};

/// Smallest power-of-two n with box_len / n <= radius / 4.
int minimal_grid_points(double box_len, double radius);

/// u^N = V^N * mu^N sampled on the grid. Each particle's stencil is
/// normalized to discrete mass 1/N, so the rectangle-rule mass is 1 to
/// round-off. Throws ConfigError if the grid does not resolve the mollifier.
Field deposit(const ParticleState& s, const Grid& g, const MollifierConfig& m);

/// Interpolates every component of a velocity field at the particles and
/// applies F_M coordinate-wise when clip is present.
Eigen::ArrayXXd sample_velocity(const ParticleState& s, const Field& velocity,
                                const std::optional<ClipConfig>& clip);

/// F_M(K(u^N)(X_i)) for every particle, N x d.
Eigen::ArrayXXd drift(const ParticleState& s, const ModelSpec& model);

/// X_i <- wrap(X_i + dt drift_i + noise_i); time += dt; step_index += 1.
ParticleState advance(const ParticleState& s, double dt, const Eigen::ArrayXXd& drift,
                      const Eigen::ArrayXXd& noise);

/// Levy increments for every particle of the current step, keyed by
/// (seed, replica, particle, step).
Eigen::ArrayXXd sample_noise(const ParticleState& s, double dt, const LevyConfig& cfg, std::uint64_t seed);

/// One explicit Euler step of the jump SDE.
ParticleState step(const ParticleState& s, double dt, const ModelSpec& model, std::uint64_t seed);

struct ObserverRecord {
  double time = 0.0;
  std::string name;
  double value = 0.0;
};

using Observer = std::function<void(const ParticleState&, std::vector<ObserverRecord>&)>;

/// Records the rectangle-rule mass of u^N as "mass".
Observer mass_observer(const Grid& g, double beta);

struct SimulationResult {
  ParticleState final_state;
  std::vector<ObserverRecord> records;
};

/// Runs T / dt steps. Observers fire at each requested time (t = 0 included
/// when listed). Times must be integer multiples of dt in [0, T].
SimulationResult simulate(const ParticleState& initial, const ModelSpec& model, double horizon, double dt,
                          std::uint64_t seed, const std::vector<double>& observation_times,
                          const std::vector<Observer>& observers);

/// Number of steps k with k dt = t; throws ConfigError if t is not a multiple.
std::uint64_t steps_for(double t, double dt);

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

struct GaussianBump {
  Point center;
  double width = 1.0;   ///< standard deviation per axis
  double weight = 1.0;
};

/// Periodized Gaussian mixture density on the box.
class InitialDensity {
 public:
  InitialDensity(int dim, double box_len, std::vector<GaussianBump> bumps);

  int dim() const { return dim_; }
  double box_len() const { return box_len_; }
  const std::vector<GaussianBump>& bumps() const { return bumps_; }

  double value(const Point& x) const;
  Field sample_on(const Grid& g) const;

  /// Mass of [-L/2, x) in d = 1.
  double cdf(double x) const;

  /// N i.i.d. draws: inverse CDF (d = 1) or rejection (d = 2). Particle i
  /// uses stream (seed, replica, i, kInitialStep).
  ParticleState sample_particles(std::size_t n, std::uint64_t seed, std::uint32_t replica) const;

 private:
  double upper_bound() const;

  int dim_;
  double box_len_;
  std::vector<GaussianBump> bumps_;
};

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

/// Layout: u64 N | i32 d | f64 L | f64 t | u64 replica | u64 step |
/// f64 positions[particle][axis], little-endian.
void save_checkpoint(const std::string& path, const ParticleState& s);
ParticleState load_checkpoint(const std::string& path);

/// CSV columns time,observable,value.
void save_records_csv(const std::string& path, const std::vector<ObserverRecord>& records);

}  // namespace levyip
