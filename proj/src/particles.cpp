#include "levyip/particles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

#include "levyip/errors.hpp"
#include "levyip/field_io.hpp"

namespace levyip {

namespace {

double bump_radial(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

// Composite Simpson; the integrand is C^infinity with all derivatives
// vanishing at r = 1, so the rule converges very fast.
double integrate_bump(int dim) {
  const int panels = 200000;
  const double h = 1.0 / panels;
  auto integrand = [dim](double r) {
    const double b = bump_radial(r * r);
    return dim == 1 ? 2.0 * b : 2.0 * std::numbers::pi * r * b;
  };
  double acc = integrand(0.0) + integrand(1.0);
  for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * integrand(i * h);
  return acc * h / 3.0;
}

}  // namespace

double bump_normalization(int dim) {
  static const double c1 = 1.0 / integrate_bump(1);
  static const double c2 = 1.0 / integrate_bump(2);
  if (dim == 1) return c1;
  if (dim == 2) return c2;
  throw ConfigError("mollifier profile is defined for d = 1, 2");
}

double mollifier_profile(const Point& y) { return bump_normalization(static_cast<int>(y.size())) * bump_radial(y.squaredNorm()); }

void MollifierConfig::validate() const {
  if (!(beta > 0.0)) throw ConfigError("mollifier exponent beta must be > 0");
  if (particles < 1) throw ConfigError("particle count must be >= 1");
}

double MollifierConfig::radius() const { return std::pow(static_cast<double>(particles), -beta); }

double mollifier_value(const Point& x, const MollifierConfig& m) {
  const double r = m.radius();
  const int d = static_cast<int>(x.size());
  return std::pow(r, -d) * bump_normalization(d) * bump_radial(x.squaredNorm() / (r * r));
}

// ---------------------------------------------------------------------------

void ClipConfig::validate() const {
  if (!(level > 0.0)) throw ConfigError("clipping level M must be > 0");
}

double clip(double x, const ClipConfig& c) {
  const double ax = std::abs(x);
  if (ax <= c.level) return x;
  const double sign = x < 0.0 ? -1.0 : 1.0;
  if (ax >= c.level + 1.0) return sign * c.level;
  const double s = ax - c.level;
  const double t = 1.0 - s;
  return sign * (c.level + s * t * t * t * (1.0 + 3.0 * s));
}

double clip_derivative(double x, const ClipConfig& c) {
  const double ax = std::abs(x);
  if (ax <= c.level) return 1.0;
  if (ax >= c.level + 1.0) return 0.0;
  const double s = ax - c.level;
  const double t = 1.0 - s;
  return t * t * (1.0 + 2.0 * s - 15.0 * s * s);
}

double clip_second_derivative(double x, const ClipConfig& c) {
  const double ax = std::abs(x);
  if (ax <= c.level || ax >= c.level + 1.0) return 0.0;
  const double sign = x < 0.0 ? -1.0 : 1.0;
  const double s = ax - c.level;
  const double t = 1.0 - s;
  // d/ds [t^2 (1 + 2s - 15 s^2)] = -2t(1 + 2s - 15s^2) + t^2 (2 - 30 s)
  return sign * (-2.0 * t * (1.0 + 2.0 * s - 15.0 * s * s) + t * t * (2.0 - 30.0 * s));
}

// ---------------------------------------------------------------------------

void ModelSpec::validate() const {
  kernel.validate();
  levy.validate();
  grid.validate();
  if (levy.dim != grid.dim) throw ConfigError("Levy dimension does not match grid dimension");
  kernel.output_components(grid.dim);
  if (!(beta > 0.0)) throw ConfigError("mollifier exponent beta must be > 0");
  if (clip) clip->validate();
}

int minimal_grid_points(double box_len, double radius) {
  int n = 8;
  while (box_len / n > 0.25 * radius) {
    if (n > (1 << 24)) throw ConfigError("mollifier radius too small for any grid");
    n *= 2;
  }
  return n;
}

Field deposit(const ParticleState& s, const Grid& g, const MollifierConfig& m) {
  g.validate();
  m.validate();
  if (s.size() == 0) throw ConfigError("cannot deposit an empty particle set");
  if (s.dim() != g.dim) throw ConfigError("particle dimension does not match grid");
  const double r = m.radius();
  const double h = g.spacing();
  if (h > 0.25 * r) {
    throw ConfigError("grid does not resolve the mollifier (radius " + std::to_string(r) + ", spacing " +
                      std::to_string(h) + "); use at least n = " + std::to_string(minimal_grid_points(g.box_len, r)) +
                      " points per axis");
  }
  if (2.0 * r >= g.box_len) throw ConfigError("mollifier support exceeds the periodic box");

  Field out(g, 1);
  auto& v = out.values();
  const double inv_r2 = 1.0 / (r * r);
  const double scale = 1.0 / (static_cast<double>(s.size()) * g.cell_volume());
  const int n = g.n;
  const double half = 0.5 * g.box_len;
  std::vector<std::pair<int, double>> axis_nodes[2];  // (wrapped index, displacement)
  std::vector<std::pair<int, double>> stencil;

  for (std::size_t i = 0; i < s.size(); ++i) {
    for (int a = 0; a < g.dim; ++a) {
      axis_nodes[a].clear();
      const double x = s.positions(static_cast<Eigen::Index>(i), a);
      const int lo = static_cast<int>(std::ceil((x - r + half) / h));
      const int hi = static_cast<int>(std::floor((x + r + half) / h));
      for (int k = lo; k <= hi; ++k) {
        const double dx = (-half + k * h) - x;
        const int wrapped = ((k % n) + n) % n;
        axis_nodes[a].emplace_back(wrapped, dx);
      }
    }
    stencil.clear();
    double total = 0.0;
    if (g.dim == 1) {
      for (const auto& [k, dx] : axis_nodes[0]) {
        const double w = bump_radial(dx * dx * inv_r2);
        if (w > 0.0) {
          stencil.emplace_back(k, w);
          total += w;
        }
      }
    } else {
      for (const auto& [k0, dx0] : axis_nodes[0]) {
        for (const auto& [k1, dx1] : axis_nodes[1]) {
          const double w = bump_radial((dx0 * dx0 + dx1 * dx1) * inv_r2);
          if (w > 0.0) {
            stencil.emplace_back(k0 * n + k1, w);
            total += w;
          }
        }
      }
    }
    if (!(total > 0.0)) throw ConfigError("mollifier stencil is empty; refine the grid");
    const double norm = scale / total;
    for (const auto& [idx, w] : stencil) v(idx, 0) += w * norm;
  }
  return out;
}

Eigen::ArrayXXd sample_velocity(const ParticleState& s, const Field& velocity, const std::optional<ClipConfig>& clip_cfg) {
  if (velocity.components() != s.dim()) throw ConfigError("velocity components do not match particle dimension");
  Eigen::ArrayXXd out(static_cast<Eigen::Index>(s.size()), s.dim());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Point x = s.position(i);
    for (int a = 0; a < s.dim(); ++a) {
      const double vel = interpolate(velocity, a, x);
      out(static_cast<Eigen::Index>(i), a) = clip_cfg ? clip(vel, *clip_cfg) : vel;
    }
  }
  return out;
}

Eigen::ArrayXXd drift(const ParticleState& s, const ModelSpec& model) {
  model.validate();
  const Field u = deposit(s, model.grid, model.mollifier(s.size()));
  return sample_velocity(s, apply_kernel(u, model.kernel), model.clip);
}

ParticleState advance(const ParticleState& s, double dt, const Eigen::ArrayXXd& drift_values,
                      const Eigen::ArrayXXd& noise) {
  if (!(dt > 0.0)) throw ConfigError("time step must be > 0");
  if (drift_values.rows() != s.positions.rows() || drift_values.cols() != s.positions.cols() ||
      noise.rows() != s.positions.rows() || noise.cols() != s.positions.cols()) {
    throw ConfigError("drift/noise shape does not match particle state");
  }
  ParticleState next = s;
  next.positions = s.positions + dt * drift_values + noise;
  next.positions = next.positions.unaryExpr([L = s.box_len](double x) { return wrap_periodic(x, L); });
  next.time = s.time + dt;
  next.step_index = s.step_index + 1;
  return next;
}

Eigen::ArrayXXd sample_noise(const ParticleState& s, double dt, const LevyConfig& cfg, std::uint64_t seed) {
  if (cfg.dim != s.dim()) throw ConfigError("Levy dimension does not match particle dimension");
  if (s.step_index >= kInitialStep) throw ConfigError("step index exceeds the stream counter range");
  Eigen::ArrayXXd noise(static_cast<Eigen::Index>(s.size()), s.dim());
  std::array<double, 2> buf{};
  const std::span<double> view(buf.data(), static_cast<std::size_t>(s.dim()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    CounterStream rng({seed, s.replica_id, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(s.step_index)});
    sample_increment(cfg, dt, rng, view);
    for (int a = 0; a < s.dim(); ++a) noise(static_cast<Eigen::Index>(i), a) = buf[static_cast<std::size_t>(a)];
  }
  return noise;
}

ParticleState step(const ParticleState& s, double dt, const ModelSpec& model, std::uint64_t seed) {
  return advance(s, dt, drift(s, model), sample_noise(s, dt, model.levy, seed));
}

Observer mass_observer(const Grid& g, double beta) {
  return [g, beta](const ParticleState& s, std::vector<ObserverRecord>& out) {
    const Field u = deposit(s, g, MollifierConfig{beta, s.size()});
    out.push_back({s.time, "mass", u.integral()});
  };
}

std::uint64_t steps_for(double t, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be > 0");
  if (t < 0.0) throw ConfigError("time must be >= 0");
  const double k = std::round(t / dt);
  if (std::abs(k * dt - t) > 1e-9 * std::max(1.0, t)) {
    throw ConfigError("time " + std::to_string(t) + " is not an integer multiple of dt = " + std::to_string(dt));
  }
  return static_cast<std::uint64_t>(k);
}

SimulationResult simulate(const ParticleState& initial, const ModelSpec& model, double horizon, double dt,
                          std::uint64_t seed, const std::vector<double>& observation_times,
                          const std::vector<Observer>& observers) {
  model.validate();
  const std::uint64_t total = steps_for(horizon, dt);
  std::vector<std::uint64_t> marks;
  for (double t : observation_times) {
    const auto k = steps_for(t, dt);
    if (k > total) throw ConfigError("observation time beyond the horizon");
    marks.push_back(k);
  }
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  SimulationResult result{initial, {}};
  auto mark = marks.begin();
  auto observe = [&](std::uint64_t k) {
    if (mark != marks.end() && *mark == k) {
      for (const auto& obs : observers) obs(result.final_state, result.records);
      ++mark;
    }
  };
  observe(0);
  for (std::uint64_t k = 1; k <= total; ++k) {
    result.final_state = step(result.final_state, dt, model, seed);
    result.final_state.time = static_cast<double>(k) * dt + initial.time;
    observe(k);
  }
  return result;
}

// ---------------------------------------------------------------------------

InitialDensity::InitialDensity(int dim, double box_len, std::vector<GaussianBump> bumps)
    : dim_(dim), box_len_(box_len), bumps_(std::move(bumps)) {
  if (dim_ != 1 && dim_ != 2) throw ConfigError("initial density supports d = 1, 2");
  if (!(box_len_ > 0.0)) throw ConfigError("box length must be positive");
  if (bumps_.empty()) throw ConfigError("initial density needs at least one bump");
  double total = 0.0;
  for (const auto& b : bumps_) {
    if (b.center.size() != dim_) throw ConfigError("bump center dimension mismatch");
    if (!(b.width > 0.0) || b.width > box_len_ / 8.0) throw ConfigError("bump width must lie in (0, L/8]");
    if (!(b.weight > 0.0)) throw ConfigError("bump weight must be > 0");
    total += b.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("bump weights must sum to 1");
}

double InitialDensity::value(const Point& x) const {
  double acc = 0.0;
  for (const auto& b : bumps_) {
    const double norm = std::pow(2.0 * std::numbers::pi * b.width * b.width, -0.5 * dim_);
    const double inv = 1.0 / (2.0 * b.width * b.width);
    for (int m0 = -2; m0 <= 2; ++m0) {
      const double d0 = x(0) - b.center(0) - m0 * box_len_;
      if (dim_ == 1) {
        acc += b.weight * norm * std::exp(-d0 * d0 * inv);
        continue;
      }
      for (int m1 = -2; m1 <= 2; ++m1) {
        const double d1 = x(1) - b.center(1) - m1 * box_len_;
        acc += b.weight * norm * std::exp(-(d0 * d0 + d1 * d1) * inv);
      }
    }
  }
  return acc;
}

Field InitialDensity::sample_on(const Grid& g) const {
  if (g.dim != dim_ || g.box_len != box_len_) throw ConfigError("grid does not match the initial density box");
  return Field::sample(g, [this](const Point& x) { return value(x); });
}

double InitialDensity::cdf(double x) const {
  if (dim_ != 1) throw ConfigError("cdf is only defined in d = 1");
  const double lo = -0.5 * box_len_;
  auto phi = [](double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); };
  double acc = 0.0;
  for (const auto& b : bumps_) {
    for (int m = -2; m <= 2; ++m) {
      const double c = b.center(0) + m * box_len_;
      acc += b.weight * (phi((x - c) / b.width) - phi((lo - c) / b.width));
    }
  }
  return acc;
}

double InitialDensity::upper_bound() const {
  double acc = 0.0;
  for (const auto& b : bumps_) acc += b.weight * std::pow(2.0 * std::numbers::pi * b.width * b.width, -0.5 * dim_);
  return 1.01 * acc;
}

ParticleState InitialDensity::sample_particles(std::size_t n, std::uint64_t seed, std::uint32_t replica) const {
  if (n < 1) throw ConfigError("particle count must be >= 1");
  ParticleState s;
  s.positions.resize(static_cast<Eigen::Index>(n), dim_);
  s.box_len = box_len_;
  s.replica_id = replica;
  const double half = 0.5 * box_len_;
  const double total = dim_ == 1 ? cdf(half) : 0.0;
  const double bound = upper_bound();
  for (std::size_t i = 0; i < n; ++i) {
    CounterStream rng({seed, replica, static_cast<std::uint32_t>(i), kInitialStep});
    const auto row = static_cast<Eigen::Index>(i);
    if (dim_ == 1) {
      const double target = rng.uniform() * total;
      double lo = -half, hi = half;
      for (int it = 0; it < 64; ++it) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < target ? lo : hi) = mid;
      }
      s.positions(row, 0) = wrap_periodic(0.5 * (lo + hi), box_len_);
      continue;
    }
    Point x(2);
    for (;;) {
      x(0) = (rng.uniform() - 0.5) * box_len_;
      x(1) = (rng.uniform() - 0.5) * box_len_;
      if (rng.uniform() * bound < value(x)) break;
    }
    s.positions(row, 0) = wrap_periodic(x(0), box_len_);
    s.positions(row, 1) = wrap_periodic(x(1), box_len_);
  }
  return s;
}

// ---------------------------------------------------------------------------

void save_checkpoint(const std::string& path, const ParticleState& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  le::write_u64(os, s.size());
  le::write_i32(os, s.dim());
  le::write_f64(os, s.box_len);
  le::write_f64(os, s.time);
  le::write_u64(os, s.replica_id);
  le::write_u64(os, s.step_index);
  for (Eigen::Index i = 0; i < s.positions.rows(); ++i) {
    for (Eigen::Index a = 0; a < s.positions.cols(); ++a) le::write_f64(os, s.positions(i, a));
  }
  if (!os) throw IoError("write failed for '" + path + "'");
}

ParticleState load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  ParticleState s;
  const auto n = le::read_u64(is);
  const auto d = le::read_i32(is);
  if (d < 1 || d > 2 || n > (std::uint64_t{1} << 34)) throw IoError("corrupt checkpoint header");
  s.box_len = le::read_f64(is);
  s.time = le::read_f64(is);
  s.replica_id = static_cast<std::uint32_t>(le::read_u64(is));
  s.step_index = le::read_u64(is);
  s.positions.resize(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < s.positions.rows(); ++i) {
    for (Eigen::Index a = 0; a < d; ++a) s.positions(i, a) = le::read_f64(is);
  }
  return s;
}

void save_records_csv(const std::string& path, const std::vector<ObserverRecord>& records) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "time,observable,value\n" << std::setprecision(17);
  for (const auto& r : records) os << r.time << ',' << r.name << ',' << r.value << '\n';
  if (!os) throw IoError("write failed for '" + path + "'");
}

}  // namespace levyip
