#pragma once

#include <optional>
#include <string>
#include <vector>

#include "levyip/levy.hpp"
#include "levyip/particles.hpp"
#include "levyip/spectral.hpp"

namespace levyip {

/// du/dt = L u - div(u F_M(K(u))) on the periodic grid, F_M omitted when
/// clip is absent.
struct PdeConfig {
  KernelSpec kernel;
  LevyConfig levy;
  std::optional<ClipConfig> clip;
  double dt = 1e-3;
  double horizon = 0.0;
  Grid grid;
  bool dealias = true;
  double norm_alpha = 0.0;  ///< exponents of the bessel_norm diagnostic
  double norm_p = 2.0;

  void validate() const;
};

/// phi_1(z) = (e^z - 1)/z with phi_1(0) = 1.
double phi1(double z);

/// div(dealias(u * F_M(K(u)))).
Field nonlinear_term(const Field& u, const PdeConfig& cfg);

/// One exponential Euler (ETD1) step of the mild equation:
///   u_hat <- e^{-dt psi} u_hat - dt phi_1(-dt psi) N_hat.
/// Throws DivergenceError on non-finite output.
Field mild_step(const Field& u, double dt, const PdeConfig& cfg);

struct PdeDiagnostics {
  double time = 0.0;
  double mass = 0.0;
  double l2 = 0.0;
  double sup_kernel = 0.0;   ///< max_x |K(u)(x)|, Euclidean over components
  double bessel_norm = 0.0;  ///< ||u||_{norm_alpha, norm_p}
  double l1 = 0.0;
  double lp = 0.0;           ///< ||u||_{L^norm_p}
};

struct PdeSolution {
  std::vector<double> times;
  std::vector<Field> snapshots;
  std::vector<PdeDiagnostics> diagnostics;  ///< every step, t = 0 included
  double sup_kernel = 0.0;
  double sup_bessel_norm = 0.0;

  /// Snapshot at time t (exact match within 1e-9).
  const Field& at(double t) const;
};

PdeDiagnostics diagnose(const Field& u, double t, const PdeConfig& cfg);

/// Integrates to cfg.horizon storing snapshots at the requested times
/// (multiples of dt; the final time is always stored).
PdeSolution solve(const Field& u0, const PdeConfig& cfg, const std::vector<double>& snapshot_times = {});

/// CSV columns time,mass,L2,sup_K,bessel_norm.
void save_diagnostics_csv(const std::string& path, const std::vector<PdeDiagnostics>& rows);

}  // namespace levyip
