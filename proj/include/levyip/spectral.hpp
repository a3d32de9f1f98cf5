#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include "levyip/errors.hpp"
#include "levyip/grid.hpp"
#include "levyip/levy.hpp"

namespace levyip {

// ---------------------------------------------------------------------------
// Field types
// ---------------------------------------------------------------------------

/// Real samples of a scalar or vector field on a periodic grid. Rows are grid
/// nodes (flat row-major index), columns are components.
template <typename Scalar>
class GridField {
 public:
  using Values = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  GridField() = default;

  GridField(const Grid& grid, int components) : grid_(grid) {
    grid_.validate();
    if (components < 1) throw ConfigError("field needs at least one component");
    values_ = Values::Zero(static_cast<Eigen::Index>(grid_.node_count()), components);
  }

  GridField(const Grid& grid, Values values) : grid_(grid), values_(std::move(values)) {
    grid_.validate();
    if (values_.rows() != static_cast<Eigen::Index>(grid_.node_count()) || values_.cols() < 1) {
      throw ConfigError("field sample count does not match grid");
    }
  }

  /// Samples fn(x) at every node, fn: Point -> Scalar.
  template <typename Fn>
  static GridField sample(const Grid& grid, Fn&& fn) {
    GridField f(grid, 1);
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
      f.values_(static_cast<Eigen::Index>(i), 0) = static_cast<Scalar>(fn(grid.node_position(i)));
    }
    return f;
  }

  const Grid& grid() const { return grid_; }
  int components() const { return static_cast<int>(values_.cols()); }
  const Values& values() const { return values_; }
  Values& values() { return values_; }

  auto component(int c) const { return values_.col(c); }

  GridField component_field(int c) const { return GridField(grid_, Values(values_.col(c))); }

  /// Integral of each component by the rectangle rule, summed over components.
  Scalar integral() const { return values_.sum() * static_cast<Scalar>(grid_.cell_volume()); }

  GridField& operator+=(const GridField& o) {
    check_compatible(o);
    values_ += o.values_;
    return *this;
  }
  GridField& operator-=(const GridField& o) {
    check_compatible(o);
    values_ -= o.values_;
    return *this;
  }
  GridField& operator*=(Scalar s) {
    values_ *= s;
    return *this;
  }
  friend GridField operator+(GridField a, const GridField& b) { return a += b; }
  friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
  friend GridField operator*(GridField a, Scalar s) { return a *= s; }
  friend GridField operator*(Scalar s, GridField a) { return a *= s; }

 private:
  void check_compatible(const GridField& o) const {
    if (!(grid_ == o.grid_) || components() != o.components()) {
      throw ConfigError("field shapes differ");
    }
  }

  Grid grid_;
  Values values_;
};

/// Unnormalized DFT coefficients: c_k = sum_j f_j exp(-i xi_k . x_j'), where
/// x_j' is measured from the first node. A constant field c has zero mode
/// c * n^d. Slots follow the FFT ordering of Grid::signed_index.
template <typename Scalar>
struct Spectrum {
  using Complex = std::complex<Scalar>;
  using Coeffs = Eigen::Array<Complex, Eigen::Dynamic, Eigen::Dynamic>;

  Grid grid;
  Coeffs coeffs;

  int components() const { return static_cast<int>(coeffs.cols()); }
};

using Field = GridField<double>;

namespace detail {

template <typename Scalar>
Eigen::FFT<Scalar>& fft_engine() {
  thread_local Eigen::FFT<Scalar> engine;
  return engine;
}

/// In-place d-dimensional transform of one column; inverse includes 1/n^d.
template <typename Scalar, typename Column>
void transform_column(const Grid& grid, Column&& col, bool inverse) {
  using Complex = std::complex<Scalar>;
  using Vec = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
  auto& fft = fft_engine<Scalar>();
  const int n = grid.n;
  Vec in(n);
  Vec out(n);
  auto run = [&]() {
    if (inverse) {
      fft.inv(out, in);
    } else {
      fft.fwd(out, in);
    }
  };
  if (grid.dim == 1) {
    in = col.matrix();
    run();
    col = out.array();
    return;
  }
  for (int r = 0; r < n; ++r) {  // along axis 1 (contiguous)
    for (int c = 0; c < n; ++c) in(c) = col(r * n + c);
    run();
    for (int c = 0; c < n; ++c) col(r * n + c) = out(c);
  }
  for (int c = 0; c < n; ++c) {  // along axis 0
    for (int r = 0; r < n; ++r) in(r) = col(r * n + c);
    run();
    for (int r = 0; r < n; ++r) col(r * n + c) = out(r);
  }
}

}  // namespace detail

template <typename Scalar>
Spectrum<Scalar> to_spectrum(const GridField<Scalar>& f) {
  Spectrum<Scalar> s{f.grid(), f.values().template cast<std::complex<Scalar>>()};
  for (int c = 0; c < s.components(); ++c) {
    detail::transform_column<Scalar>(s.grid, s.coeffs.col(c), false);
  }
  return s;
}

/// Inverse transform; the imaginary part (round-off, or the odd part of a
/// Nyquist mode) is discarded.
template <typename Scalar>
GridField<Scalar> from_spectrum(Spectrum<Scalar> s) {
  for (int c = 0; c < s.components(); ++c) {
    detail::transform_column<Scalar>(s.grid, s.coeffs.col(c), true);
  }
  return GridField<Scalar>(s.grid, s.coeffs.real());
}

/// Multiplies every mode of every component by fn(xi0, xi1) (xi1 = 0 in 1-d).
template <typename Scalar, typename Fn>
Spectrum<Scalar> apply_multiplier(Spectrum<Scalar> s, Fn&& fn) {
  const Grid& g = s.grid;
  for (Eigen::Index i = 0; i < s.coeffs.rows(); ++i) {
    const auto flat = static_cast<std::size_t>(i);
    const Scalar xi0 = static_cast<Scalar>(g.wavenumber(g.axis_index(flat, 0)));
    const Scalar xi1 = g.dim == 2 ? static_cast<Scalar>(g.wavenumber(g.axis_index(flat, 1))) : Scalar(0);
    s.coeffs.row(i) *= fn(xi0, xi1);
  }
  return s;
}

/// Zeroes every mode with 3|k_j| > n on some axis (2/3 rule).
template <typename Scalar>
Spectrum<Scalar> dealias(Spectrum<Scalar> s) {
  const Grid& g = s.grid;
  for (Eigen::Index i = 0; i < s.coeffs.rows(); ++i) {
    const auto flat = static_cast<std::size_t>(i);
    for (int a = 0; a < g.dim; ++a) {
      if (3 * std::abs(g.signed_index(g.axis_index(flat, a))) > g.n) {
        s.coeffs.row(i).setZero();
        break;
      }
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Semigroup
// ---------------------------------------------------------------------------

/// e^{t L} f: each mode scaled by exp(-t psi(xi)).
template <typename Scalar>
GridField<Scalar> semigroup_apply(const GridField<Scalar>& f, double t, const LevyConfig& cfg) {
  if (t < 0.0) throw ConfigError("semigroup time must be >= 0");
  cfg.validate();
  if (cfg.dim != f.grid().dim) throw ConfigError("Levy dimension does not match grid");
  if (t == 0.0) return f;
  const Scalar ts = static_cast<Scalar>(t);
  return from_spectrum(apply_multiplier(to_spectrum(f), [&](Scalar x0, Scalar x1) {
    return std::exp(-ts * characteristic_exponent(x0, x1, cfg));
  }));
}

/// sup over grid frequencies of (1 + |xi|^2)^kappa exp(-t psi(xi)), the
/// L^2 -> L^2 norm of (I - Delta)^kappa e^{t L} on the grid.
inline double smoothing_operator_norm(const Grid& grid, const LevyConfig& cfg, double kappa, double t) {
  grid.validate();
  double best = 0.0;
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    const double x0 = grid.wavenumber(grid.axis_index(i, 0));
    const double x1 = grid.dim == 2 ? grid.wavenumber(grid.axis_index(i, 1)) : 0.0;
    const double v = std::pow(1.0 + x0 * x0 + x1 * x1, kappa) * std::exp(-t * characteristic_exponent(x0, x1, cfg));
    best = std::max(best, v);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Interaction kernels
// ---------------------------------------------------------------------------

enum class KernelFamily { burgers_identity, sqg_riesz, turbulence, keller_segel, biot_savart };

inline std::string to_string(KernelFamily k) {
  switch (k) {
    case KernelFamily::burgers_identity: return "burgers_identity";
    case KernelFamily::sqg_riesz: return "sqg_riesz";
    case KernelFamily::turbulence: return "turbulence";
    case KernelFamily::keller_segel: return "keller_segel";
    case KernelFamily::biot_savart: return "biot_savart";
  }
  return "unknown";
}

inline KernelFamily kernel_family_from_string(const std::string& name) {
  for (auto k : {KernelFamily::burgers_identity, KernelFamily::sqg_riesz, KernelFamily::turbulence,
                 KernelFamily::keller_segel, KernelFamily::biot_savart}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown kernel family '" + name + "'");
}

/// Interaction operator K as a Fourier multiplier.
///
///   burgers_identity  K(u) = u                          (d = 1)
///   sqg_riesz         K(u) = R^perp u = (-R_2 u, R_1 u), R_j <-> -i xi_j/|xi|   (d = 2)
///   turbulence        K(u) = (-Delta)^{eta/2} R^perp u  (d = 2)
///   keller_segel      K(u) = c grad (-Delta)^{-1} u  <->  c i xi/|xi|^2
///                     (attractive; equals k*u with k(x) = -c_d x/|x|^d and
///                      c = c_d |S^{d-1}|, i.e. c = 2 c_1 in 1-d, 2 pi c_2 in 2-d)
///   biot_savart       K(w) = grad^perp Delta^{-1} w  <->  (i xi_2, -i xi_1)/|xi|^2   (d = 2)
///
/// The zero mode of every singular family maps to 0.
struct KernelSpec {
  KernelFamily family = KernelFamily::burgers_identity;
  double eta = 0.0;         ///< turbulence exponent, 0 < eta < 1
  double attraction = 1.0;  ///< Keller-Segel strength c > 0

  void validate() const {
    if (family == KernelFamily::turbulence && !(eta > 0.0 && eta < 1.0)) {
      throw ConfigError("turbulence kernel needs 0 < eta < 1");
    }
    if (family == KernelFamily::keller_segel && !(attraction > 0.0)) {
      throw ConfigError("Keller-Segel kernel needs attraction > 0");
    }
  }

  /// Number of output components for a scalar input on a dim-dimensional grid.
  int output_components(int dim) const {
    validate();
    switch (family) {
      case KernelFamily::burgers_identity:
        if (dim != 1) throw ConfigError("burgers_identity kernel requires d = 1");
        return 1;
      case KernelFamily::keller_segel:
        return dim;
      default:
        if (dim != 2) throw ConfigError(to_string(family) + " kernel requires d = 2");
        return 2;
    }
  }

  /// Multiplier components at frequency (xi0, xi1).
  template <typename Scalar>
  std::array<std::complex<Scalar>, 2> multiplier(Scalar xi0, Scalar xi1) const {
    using C = std::complex<Scalar>;
    const C i(0, 1);
    const Scalar r2 = xi0 * xi0 + xi1 * xi1;
    if (family == KernelFamily::burgers_identity) return {C(1), C(0)};
    if (r2 == Scalar(0)) return {C(0), C(0)};
    const Scalar r = std::sqrt(r2);
    switch (family) {
      case KernelFamily::sqg_riesz:
        return {i * xi1 / r, -i * xi0 / r};
      case KernelFamily::turbulence: {
        const Scalar w = std::pow(r, static_cast<Scalar>(eta)) / r;
        return {i * xi1 * w, -i * xi0 * w};
      }
      case KernelFamily::keller_segel: {
        const Scalar c = static_cast<Scalar>(attraction) / r2;
        return {i * xi0 * c, i * xi1 * c};
      }
      case KernelFamily::biot_savart:
        return {i * xi1 / r2, -i * xi0 / r2};
      default:
        return {C(0), C(0)};
    }
  }

  /// Bound on |multiplier(xi)| (1 + |xi|^2)^{weight/2} over the grid
  /// frequencies; weight = lambda - alpha gives the constant C_K used for M.
  double multiplier_bound(const Grid& grid, double weight) const {
    const int m = output_components(grid.dim);
    double best = 0.0;
    for (std::size_t idx = 0; idx < grid.node_count(); ++idx) {
      const double x0 = grid.wavenumber(grid.axis_index(idx, 0));
      const double x1 = grid.dim == 2 ? grid.wavenumber(grid.axis_index(idx, 1)) : 0.0;
      const auto mult = multiplier(x0, x1);
      double mag2 = 0.0;
      for (int c = 0; c < m; ++c) mag2 += std::norm(mult[static_cast<std::size_t>(c)]);
      best = std::max(best, std::sqrt(mag2) * std::pow(1.0 + x0 * x0 + x1 * x1, 0.5 * weight));
    }
    return best;
  }
};

template <typename Scalar>
Spectrum<Scalar> apply_kernel(const Spectrum<Scalar>& s, const KernelSpec& k) {
  if (s.components() != 1) throw ConfigError("kernel input must be a scalar field");
  const Grid& g = s.grid;
  const int m = k.output_components(g.dim);
  Spectrum<Scalar> out{g, typename Spectrum<Scalar>::Coeffs(s.coeffs.rows(), m)};
  for (Eigen::Index i = 0; i < s.coeffs.rows(); ++i) {
    const auto flat = static_cast<std::size_t>(i);
    const Scalar xi0 = static_cast<Scalar>(g.wavenumber(g.axis_index(flat, 0)));
    const Scalar xi1 = g.dim == 2 ? static_cast<Scalar>(g.wavenumber(g.axis_index(flat, 1))) : Scalar(0);
    const auto mult = k.template multiplier<Scalar>(xi0, xi1);
    for (int c = 0; c < m; ++c) out.coeffs(i, c) = mult[static_cast<std::size_t>(c)] * s.coeffs(i, 0);
  }
  return out;
}

template <typename Scalar>
GridField<Scalar> apply_kernel(const GridField<Scalar>& f, const KernelSpec& k) {
  if (k.family == KernelFamily::burgers_identity) {
    k.output_components(f.grid().dim);
    if (f.components() != 1) throw ConfigError("kernel input must be a scalar field");
    return f;
  }
  return from_spectrum(apply_kernel(to_spectrum(f), k));
}

// ---------------------------------------------------------------------------
// Differential operators
// ---------------------------------------------------------------------------

template <typename Scalar>
Spectrum<Scalar> divergence(const Spectrum<Scalar>& v) {
  const Grid& g = v.grid;
  if (v.components() != g.dim) throw ConfigError("divergence needs a d-component field");
  using C = std::complex<Scalar>;
  Spectrum<Scalar> out{g, Spectrum<Scalar>::Coeffs::Zero(v.coeffs.rows(), 1)};
  for (Eigen::Index i = 0; i < v.coeffs.rows(); ++i) {
    C acc(0);
    for (int a = 0; a < g.dim; ++a) {
      const Scalar xi = static_cast<Scalar>(g.wavenumber(g.axis_index(static_cast<std::size_t>(i), a)));
      acc += C(0, xi) * v.coeffs(i, a);
    }
    out.coeffs(i, 0) = acc;
  }
  return out;
}

template <typename Scalar>
GridField<Scalar> divergence(const GridField<Scalar>& v) {
  return from_spectrum(divergence(to_spectrum(v)));
}

template <typename Scalar>
GridField<Scalar> gradient(const GridField<Scalar>& f) {
  if (f.components() != 1) throw ConfigError("gradient needs a scalar field");
  const auto s = to_spectrum(f);
  const Grid& g = f.grid();
  Spectrum<Scalar> out{g, typename Spectrum<Scalar>::Coeffs(s.coeffs.rows(), g.dim)};
  for (Eigen::Index i = 0; i < s.coeffs.rows(); ++i) {
    for (int a = 0; a < g.dim; ++a) {
      const Scalar xi = static_cast<Scalar>(g.wavenumber(g.axis_index(static_cast<std::size_t>(i), a)));
      out.coeffs(i, a) = std::complex<Scalar>(0, xi) * s.coeffs(i, 0);
    }
  }
  return from_spectrum(std::move(out));
}

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

enum class NormKind { bessel, homogeneous, lp, distorted, negative };

inline std::string to_string(NormKind k) {
  switch (k) {
    case NormKind::bessel: return "bessel";
    case NormKind::homogeneous: return "homogeneous";
    case NormKind::lp: return "lp";
    case NormKind::distorted: return "distorted";
    case NormKind::negative: return "negative";
  }
  return "unknown";
}

/// For negative(alpha, q) the exponent field p holds q and the filter uses
/// -alpha.
struct NormSpec {
  NormKind kind = NormKind::lp;
  double alpha = 0.0;
  double p = 2.0;

  static NormSpec bessel(double alpha, double p) { return {NormKind::bessel, alpha, p}; }
  static NormSpec homogeneous(double alpha, double p) { return {NormKind::homogeneous, alpha, p}; }
  static NormSpec lp(double p) { return {NormKind::lp, 0.0, p}; }
  static NormSpec distorted(double alpha, double p) { return {NormKind::distorted, alpha, p}; }
  static NormSpec negative(double alpha, double q) { return {NormKind::negative, alpha, q}; }
};

/// (h^d sum_x |f(x)|^p)^{1/p}, |.| the Euclidean magnitude over components.
/// Normalized so that ||1||_{L^p} = L^{d/p}.
template <typename Scalar>
Scalar lp_norm(const GridField<Scalar>& f, double p) {
  if (!(p >= 1.0)) throw ConfigError("L^p exponent must be >= 1");
  const auto mag = f.values().square().rowwise().sum().sqrt().eval();
  const Scalar h = static_cast<Scalar>(f.grid().cell_volume());
  if (p == 1.0) return h * mag.sum();
  if (p == 2.0) return std::sqrt(h * mag.square().sum());
  const Scalar top = mag.maxCoeff();
  if (top == Scalar(0)) return Scalar(0);
  return top * std::pow(h * (mag / top).pow(static_cast<Scalar>(p)).sum(), Scalar(1) / static_cast<Scalar>(p));
}

/// ||f||_{L^2} evaluated on the Fourier side (Parseval).
template <typename Scalar>
Scalar l2_norm_spectral(const Spectrum<Scalar>& s) {
  const double n_total = static_cast<double>(s.grid.node_count());
  return std::sqrt(static_cast<Scalar>(s.grid.cell_volume() / n_total) * s.coeffs.abs2().sum());
}

/// F^{-1}((1 + |xi|^2)^{alpha/2} F f)
template <typename Scalar>
GridField<Scalar> bessel_filter(const GridField<Scalar>& f, double alpha) {
  if (alpha == 0.0) return f;
  const Scalar half = static_cast<Scalar>(0.5 * alpha);
  return from_spectrum(apply_multiplier(to_spectrum(f), [&](Scalar x0, Scalar x1) {
    return std::pow(Scalar(1) + x0 * x0 + x1 * x1, half);
  }));
}

/// F^{-1}(|xi|^alpha F f), zero mode mapped to 0 for alpha != 0.
template <typename Scalar>
GridField<Scalar> homogeneous_filter(const GridField<Scalar>& f, double alpha) {
  if (alpha == 0.0) return f;
  const Scalar a = static_cast<Scalar>(alpha);
  return from_spectrum(apply_multiplier(to_spectrum(f), [&](Scalar x0, Scalar x1) {
    const Scalar r2 = x0 * x0 + x1 * x1;
    return r2 == Scalar(0) ? Scalar(0) : std::pow(r2, a / Scalar(2));
  }));
}

template <typename Scalar>
Scalar norm(const GridField<Scalar>& f, const NormSpec& spec, const std::optional<KernelSpec>& kernel = std::nullopt) {
  if (!(spec.p >= 1.0)) throw ConfigError("norm exponent p must be >= 1");
  switch (spec.kind) {
    case NormKind::lp:
      return lp_norm(f, spec.p);
    case NormKind::bessel:
      return lp_norm(bessel_filter(f, spec.alpha), spec.p);
    case NormKind::homogeneous:
      return lp_norm(homogeneous_filter(f, spec.alpha), spec.p);
    case NormKind::negative:
      return lp_norm(bessel_filter(f, -spec.alpha), spec.p);
    case NormKind::distorted:
      if (!kernel) throw ConfigError("distorted norm needs a kernel");
      return lp_norm(bessel_filter(f, spec.alpha), spec.p) + lp_norm(apply_kernel(f, *kernel), spec.p);
  }
  return Scalar(0);
}

// ---------------------------------------------------------------------------
// Grid <-> point transfers
// ---------------------------------------------------------------------------

/// Multilinear periodic interpolation of component c at point x.
template <typename Scalar>
Scalar interpolate(const GridField<Scalar>& f, int c, const Point& x) {
  const Grid& g = f.grid();
  const double h = g.spacing();
  int base[2] = {0, 0};
  double frac[2] = {0.0, 0.0};
  for (int a = 0; a < g.dim; ++a) {
    const double s = (wrap_periodic(x(a), g.box_len) + 0.5 * g.box_len) / h;
    const double fl = std::floor(s);
    base[a] = static_cast<int>(fl) % g.n;
    frac[a] = s - fl;
  }
  const auto& v = f.values();
  if (g.dim == 1) {
    const int i1 = (base[0] + 1) % g.n;
    return static_cast<Scalar>((1.0 - frac[0]) * v(base[0], c) + frac[0] * v(i1, c));
  }
  const int n = g.n;
  const int i0 = base[0], j0 = base[1];
  const int i1 = (i0 + 1) % n, j1 = (j0 + 1) % n;
  const double fx = frac[0], fy = frac[1];
  return static_cast<Scalar>((1 - fx) * (1 - fy) * v(i0 * n + j0, c) + (1 - fx) * fy * v(i0 * n + j1, c) +
                             fx * (1 - fy) * v(i1 * n + j0, c) + fx * fy * v(i1 * n + j1, c));
}

/// Flat index of the grid node nearest to x.
inline std::size_t nearest_node(const Grid& g, const Point& x) {
  std::size_t flat = 0;
  for (int a = 0; a < g.dim; ++a) {
    const double s = (wrap_periodic(x(a), g.box_len) + 0.5 * g.box_len) / g.spacing();
    const int k = static_cast<int>(std::lround(s)) % g.n;
    flat = flat * static_cast<std::size_t>(g.n) + static_cast<std::size_t>(k);
  }
  return flat;
}

/// Empirical measure (1/N) sum delta_{X_i} as a grid density: mass 1/N on the
/// node nearest to each particle, divided by the cell volume.
template <typename Scalar = double>
GridField<Scalar> deposit_atoms(const Eigen::ArrayXXd& positions, const Grid& g) {
  if (positions.rows() == 0) throw ConfigError("empty particle set");
  if (positions.cols() != g.dim) throw ConfigError("particle dimension does not match grid");
  GridField<Scalar> out(g, 1);
  const Scalar w = static_cast<Scalar>(1.0 / (static_cast<double>(positions.rows()) * g.cell_volume()));
  Point x(g.dim);
  for (Eigen::Index i = 0; i < positions.rows(); ++i) {
    for (int a = 0; a < g.dim; ++a) x(a) = positions(i, a);
    out.values()(static_cast<Eigen::Index>(nearest_node(g, x)), 0) += w;
  }
  return out;
}

/// ||mu^N - f||_{-alpha, q} with mu^N represented by deposit_atoms. The dual
/// pairing is meaningful when d/p < alpha, p the conjugate of q.
template <typename Scalar>
Scalar negative_norm_measure(const Eigen::ArrayXXd& positions, const GridField<Scalar>& f, double alpha, double q) {
  if (!(alpha > 0.0)) throw ConfigError("negative norm needs alpha > 0");
  auto diff = deposit_atoms<Scalar>(positions, f.grid());
  diff -= f;
  return lp_norm(bessel_filter(diff, -alpha), q);
}

/// Spectral truncation of f onto a coarser grid with the same box; the
/// coarse Nyquist modes are set to zero.
template <typename Scalar>
GridField<Scalar> restrict_field(const GridField<Scalar>& f, const Grid& coarse) {
  const Grid& fine = f.grid();
  coarse.validate();
  if (coarse.dim != fine.dim || coarse.box_len != fine.box_len || coarse.n > fine.n) {
    throw ConfigError("restriction needs a coarser grid over the same box");
  }
  if (coarse.n == fine.n) return f;
  const auto s = to_spectrum(f);
  const Scalar ratio = static_cast<Scalar>(std::pow(static_cast<double>(coarse.n) / fine.n, fine.dim));
  Spectrum<Scalar> out{coarse, Spectrum<Scalar>::Coeffs::Zero(static_cast<Eigen::Index>(coarse.node_count()), s.components())};
  auto fine_slot = [&](int k) { return k >= 0 ? k : k + fine.n; };
  for (std::size_t i = 0; i < coarse.node_count(); ++i) {
    int k[2] = {0, 0};
    bool nyquist = false;
    for (int a = 0; a < coarse.dim; ++a) {
      k[a] = coarse.signed_index(coarse.axis_index(i, a));
      nyquist = nyquist || k[a] == -coarse.n / 2;
    }
    if (nyquist) continue;
    const std::size_t src = coarse.dim == 1
                                ? static_cast<std::size_t>(fine_slot(k[0]))
                                : static_cast<std::size_t>(fine_slot(k[0])) * fine.n + static_cast<std::size_t>(fine_slot(k[1]));
    out.coeffs.row(static_cast<Eigen::Index>(i)) = s.coeffs.row(static_cast<Eigen::Index>(src)) * ratio;
  }
  return from_spectrum(std::move(out));
}

}  // namespace levyip
