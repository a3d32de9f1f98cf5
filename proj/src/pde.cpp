#include "levyip/pde.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "levyip/errors.hpp"

namespace levyip {

void PdeConfig::validate() const {
  kernel.validate();
  levy.validate();
  grid.validate();
  if (levy.dim != grid.dim) throw ConfigError("Levy dimension does not match grid dimension");
  kernel.output_components(grid.dim);
  if (!(dt > 0.0)) throw ConfigError("PDE time step must be > 0");
  if (horizon < 0.0) throw ConfigError("PDE horizon must be >= 0");
  steps_for(horizon, dt);
  if (clip) clip->validate();
}

double phi1(double z) {
  if (std::abs(z) < 1e-4) return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0));
  return std::expm1(z) / z;
}

namespace {

Spectrum<double> flux_spectrum(const Field& u, const PdeConfig& cfg) {
  Field velocity = apply_kernel(u, cfg.kernel);
  auto& v = velocity.values();
  if (cfg.clip) v = v.unaryExpr([c = *cfg.clip](double x) { return clip(x, c); });
  for (Eigen::Index c = 0; c < v.cols(); ++c) v.col(c) *= u.values().col(0);
  auto s = to_spectrum(velocity);
  return cfg.dealias ? dealias(std::move(s)) : s;
}

}  // namespace

Field nonlinear_term(const Field& u, const PdeConfig& cfg) {
  if (u.components() != 1) throw ConfigError("PDE state must be a scalar field");
  return from_spectrum(divergence(flux_spectrum(u, cfg)));
}

Field mild_step(const Field& u, double dt, const PdeConfig& cfg) {
  if (u.components() != 1) throw ConfigError("PDE state must be a scalar field");
  if (!(dt > 0.0)) throw ConfigError("PDE time step must be > 0");
  const auto nl = divergence(flux_spectrum(u, cfg));
  auto s = to_spectrum(u);
  const Grid& g = u.grid();
  for (Eigen::Index i = 0; i < s.coeffs.rows(); ++i) {
    const auto flat = static_cast<std::size_t>(i);
    const double x0 = g.wavenumber(g.axis_index(flat, 0));
    const double x1 = g.dim == 2 ? g.wavenumber(g.axis_index(flat, 1)) : 0.0;
    const double z = -dt * characteristic_exponent(x0, x1, cfg.levy);
    s.coeffs(i, 0) = std::exp(z) * s.coeffs(i, 0) - dt * phi1(z) * nl.coeffs(i, 0);
  }
  Field next = from_spectrum(std::move(s));
  if (!next.values().allFinite()) {
    throw DivergenceError("PDE solution became non-finite; reduce the time step (dt = " + std::to_string(dt) + ")");
  }
  return next;
}

PdeDiagnostics diagnose(const Field& u, double t, const PdeConfig& cfg) {
  PdeDiagnostics d;
  d.time = t;
  d.mass = u.integral();
  d.l2 = lp_norm(u, 2.0);
  const Field k = apply_kernel(u, cfg.kernel);
  d.sup_kernel = k.values().square().rowwise().sum().sqrt().maxCoeff();
  d.bessel_norm = norm(u, NormSpec::bessel(cfg.norm_alpha, cfg.norm_p));
  d.l1 = lp_norm(u, 1.0);
  d.lp = lp_norm(u, cfg.norm_p);
  return d;
}

const Field& PdeSolution::at(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - t) <= 1e-9 * std::max(1.0, t)) return snapshots[i];
  }
  throw ConfigError("no PDE snapshot at t = " + std::to_string(t));
}

PdeSolution solve(const Field& u0, const PdeConfig& cfg, const std::vector<double>& snapshot_times) {
  cfg.validate();
  if (!(u0.grid() == cfg.grid)) throw ConfigError("initial field grid does not match PDE grid");
  if (u0.components() != 1) throw ConfigError("PDE state must be a scalar field");
  const auto total = steps_for(cfg.horizon, cfg.dt);
  std::vector<std::uint64_t> marks;
  for (double t : snapshot_times) {
    const auto k = steps_for(t, cfg.dt);
    if (k > total) throw ConfigError("snapshot time beyond the horizon");
    marks.push_back(k);
  }
  marks.push_back(total);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  PdeSolution sol;
  Field u = u0;
  auto record = [&](std::uint64_t k) {
    const double t = static_cast<double>(k) * cfg.dt;
    const auto d = diagnose(u, t, cfg);
    sol.sup_kernel = std::max(sol.sup_kernel, d.sup_kernel);
    sol.sup_bessel_norm = std::max(sol.sup_bessel_norm, d.bessel_norm);
    sol.diagnostics.push_back(d);
    if (std::binary_search(marks.begin(), marks.end(), k)) {
      sol.times.push_back(t);
      sol.snapshots.push_back(u);
    }
  };
  record(0);
  for (std::uint64_t k = 1; k <= total; ++k) {
    u = mild_step(u, cfg.dt, cfg);
    record(k);
  }
  return sol;
}

void save_diagnostics_csv(const std::string& path, const std::vector<PdeDiagnostics>& rows) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "time,mass,L2,sup_K,bessel_norm\n" << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.time << ',' << r.mass << ',' << r.l2 << ',' << r.sup_kernel << ',' << r.bessel_norm << '\n';
  }
  if (!os) throw IoError("write failed for '" + path + "'");
}

}  // namespace levyip
