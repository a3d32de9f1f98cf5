#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "levyip/spectral.hpp"
#include "support.hpp"

using namespace levyip;
using levyip::testing::max_abs_diff;
using levyip::testing::random_field;
using levyip::testing::smooth_random_field;

namespace {
constexpr double kPi = std::numbers::pi;
const Grid g1{1, 64, 2 * kPi};
const Grid g2{2, 32, 2 * kPi};

Field mode(const Grid& g, int k0, int k1 = 0, bool sine = false) {
  return Field::sample(g, [&](const Point& x) {
    const double a = k0 * x(0) + (g.dim == 2 ? k1 * x(1) : 0.0);
    return sine ? std::sin(a) : std::cos(a);
  });
}
}  // namespace

TEST_CASE("grid geometry") {
  CHECK_THROWS_AS(Grid({1, 48, 1.0}).validate(), ConfigError);
  CHECK_THROWS_AS(Grid({3, 64, 1.0}).validate(), ConfigError);
  CHECK_THROWS_AS(Grid({1, 4, 1.0}).validate(), ConfigError);
  CHECK(g1.coordinate(0) == doctest::Approx(-kPi));
  CHECK(g1.signed_index(40) == -24);
  CHECK(g2.axis_index(33, 0) == 1);
  CHECK(g2.axis_index(33, 1) == 1);
  CHECK(wrap_periodic(kPi, 2 * kPi) == doctest::Approx(-kPi));
  CHECK(wrap_periodic(-kPi - 0.5, 2 * kPi) == doctest::Approx(kPi - 0.5));
  CHECK(periodic_distance(2 * kPi - 0.1, 2 * kPi) == doctest::Approx(-0.1));
}

TEST_CASE("transform round trip and normalization") {
  for (const Grid& g : {g1, g2}) {
    const Field f = random_field(g, 3, 2);
    CHECK(max_abs_diff(from_spectrum(to_spectrum(f)), f) < 1e-13);
    Field one(g, 1);
    one.values().setConstant(2.5);
    const auto s = to_spectrum(one);
    CHECK(std::abs(s.coeffs(0, 0) - std::complex<double>(2.5 * static_cast<double>(g.node_count()))) < 1e-9);
    CHECK(s.coeffs.bottomRows(s.coeffs.rows() - 1).abs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("semigroup single-mode decay and composition") {
  for (auto variant : {NoiseVariant::isotropic, NoiseVariant::axis_product}) {
    LevyConfig cfg{1.5, 2, variant};
    const Field f = mode(g2, 2, 3);
    const double psi = characteristic_exponent(2.0, 3.0, cfg);
    const Field decayed = semigroup_apply(f, 0.3, cfg);
    CHECK(max_abs_diff(decayed, f * std::exp(-0.3 * psi)) < 1e-12);
    const Field r = random_field(g2, 5);
    CHECK(max_abs_diff(semigroup_apply(semigroup_apply(r, 0.1, cfg), 0.2, cfg), semigroup_apply(r, 0.3, cfg)) < 1e-12);
  }
  CHECK_THROWS_AS(semigroup_apply(mode(g1, 1), -0.1, LevyConfig{1.5, 1}), ConfigError);
}

TEST_CASE("smoothing estimate stays bounded") {
  LevyConfig cfg{1.5, 1};
  const Grid g{1, 1024, 2 * kPi};
  for (double kappa : {0.25, 0.5}) {
    const double bound = std::pow(2.0, kappa) * (1.0 + std::pow(2.0 * kappa / (1.5 * std::numbers::e), 2.0 * kappa / 1.5));
    for (double t = 1e-3; t <= 1.0; t *= 2.0) {
      CHECK(std::pow(t, 2.0 * kappa / 1.5) * smoothing_operator_norm(g, cfg, kappa, t) <= bound);
    }
  }
}

TEST_CASE("kernel shapes") {
  CHECK(KernelSpec{KernelFamily::burgers_identity}.output_components(1) == 1);
  CHECK_THROWS_AS(KernelSpec{KernelFamily::burgers_identity}.output_components(2), ConfigError);
  CHECK_THROWS_AS(KernelSpec{KernelFamily::sqg_riesz}.output_components(1), ConfigError);
  CHECK(KernelSpec{KernelFamily::keller_segel}.output_components(1) == 1);
  KernelSpec bad{KernelFamily::turbulence, 1.5};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK(kernel_family_from_string(to_string(KernelFamily::biot_savart)) == KernelFamily::biot_savart);
  CHECK_THROWS_AS(kernel_family_from_string("coulomb"), ConfigError);
}

TEST_CASE("single-mode kernel values") {
  const Field u = mode(g2, 1, 0);
  const Field s = mode(g2, 1, 0, true);
  SUBCASE("burgers is the identity") {
    const Field r = random_field(g1, 9);
    CHECK(apply_kernel(r, KernelSpec{KernelFamily::burgers_identity}).values().isApprox(r.values(), 0.0));
  }
  SUBCASE("sqg") {
    const Field k = apply_kernel(u, KernelSpec{KernelFamily::sqg_riesz});
    CHECK(k.values().col(0).abs().maxCoeff() < 1e-12);
    CHECK((k.values().col(1) - s.values().col(0)).abs().maxCoeff() < 1e-10);
  }
  SUBCASE("biot-savart") {
    const Field u2 = mode(g2, 0, 2);
    const Field k = apply_kernel(u2, KernelSpec{KernelFamily::biot_savart});
    // cos(2 y) -> (-sin(2 y)/2, 0)
    CHECK((k.values().col(0) + 0.5 * mode(g2, 0, 2, true).values().col(0)).abs().maxCoeff() < 1e-10);
    CHECK(k.values().col(1).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("keller-segel") {
    const Field k = apply_kernel(u, KernelSpec{KernelFamily::keller_segel, 0.0, 0.7});
    CHECK((k.values().col(0) + 0.7 * s.values().col(0)).abs().maxCoeff() < 1e-10);
    CHECK(k.values().col(1).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("turbulence") {
    const Field u2 = mode(g2, 2, 0);
    const Field k = apply_kernel(u2, KernelSpec{KernelFamily::turbulence, 0.3});
    CHECK((k.values().col(1) - std::pow(2.0, 0.3) * mode(g2, 2, 0, true).values().col(0)).abs().maxCoeff() < 1e-10);
  }
  SUBCASE("zero mode maps to zero") {
    Field c(g2, 1);
    c.values().setConstant(3.0);
    for (auto fam : {KernelFamily::sqg_riesz, KernelFamily::keller_segel, KernelFamily::biot_savart}) {
      CHECK(apply_kernel(c, KernelSpec{fam}).values().abs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("divergence-free velocities on random fields") {
  for (auto fam : {KernelFamily::sqg_riesz, KernelFamily::biot_savart, KernelFamily::turbulence}) {
    KernelSpec k{fam, 0.2};
    for (std::uint64_t seed : {1, 2, 3}) {
      const Field v = apply_kernel(random_field(g2, seed), k);
      CHECK(divergence(v).values().abs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("biot-savart inverts the curl") {
  Field w = smooth_random_field(g2, 4);
  w.values().col(0) -= w.values().col(0).mean();
  const Field v = apply_kernel(w, KernelSpec{KernelFamily::biot_savart});
  // curl v = d0 v1 - d1 v0 should recover the vorticity
  const Field g0 = gradient(v.component_field(0));
  const Field g1f = gradient(v.component_field(1));
  const Eigen::ArrayXd curl = g1f.values().col(0) - g0.values().col(1);
  CHECK((curl - w.values().col(0)).abs().maxCoeff() < 1e-10);
}

TEST_CASE("derivatives") {
  const Field g = gradient(mode(g1, 3));
  CHECK(max_abs_diff(g, mode(g1, 3, 0, true) * -3.0) < 1e-11);
  Field v(g2, 2);
  v.values().col(0) = mode(g2, 1, 0, true).values().col(0);
  v.values().col(1) = mode(g2, 0, 2).values().col(0);
  const Field div = divergence(v);
  CHECK((div.values().col(0) - (mode(g2, 1, 0).values().col(0) - 2.0 * mode(g2, 0, 2, true).values().col(0))).abs().maxCoeff() < 1e-11);
}

TEST_CASE("two-thirds dealiasing") {
  const Field low = mode(g1, 5), high = mode(g1, 30);
  CHECK(max_abs_diff(from_spectrum(dealias(to_spectrum(low))), low) < 1e-13);
  CHECK(from_spectrum(dealias(to_spectrum(high))).values().abs().maxCoeff() < 1e-13);
  CHECK(from_spectrum(dealias(to_spectrum(mode(g1, 21)))).values().abs().maxCoeff() > 0.9);
  CHECK(from_spectrum(dealias(to_spectrum(mode(g1, 22)))).values().abs().maxCoeff() < 1e-13);
}

TEST_CASE("norm values") {
  Field one(g1, 1);
  one.values().setOnes();
  CHECK(lp_norm(one, 3.0) == doctest::Approx(std::pow(2 * kPi, 1.0 / 3.0)).epsilon(1e-13));
  const Field c = mode(g1, 4);
  CHECK(lp_norm(c, 2.0) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-13));
  CHECK(l2_norm_spectral(to_spectrum(c)) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-13));
  CHECK(norm(c, NormSpec::bessel(0.6, 2.0)) == doctest::Approx(std::pow(17.0, 0.3) * std::sqrt(kPi)).epsilon(1e-12));
  CHECK(norm(c, NormSpec::homogeneous(0.6, 2.0)) == doctest::Approx(std::pow(4.0, 0.6) * std::sqrt(kPi)).epsilon(1e-12));
  CHECK(norm(one, NormSpec::homogeneous(0.5, 2.0)) < 1e-12);
  CHECK(norm(c, NormSpec::negative(0.6, 2.0)) == doctest::Approx(std::pow(17.0, -0.3) * std::sqrt(kPi)).epsilon(1e-12));
  const KernelSpec ks{KernelFamily::keller_segel, 0.0, 1.0};
  const Field u = mode(g2, 1, 0);
  CHECK(norm(u, NormSpec::distorted(0.4, 3.0), ks) ==
        doctest::Approx(norm(u, NormSpec::bessel(0.4, 3.0)) + lp_norm(apply_kernel(u, ks), 3.0)).epsilon(1e-13));
  CHECK_THROWS_AS(norm(u, NormSpec::distorted(0.4, 3.0)), ConfigError);
  CHECK_THROWS_AS(lp_norm(u, 0.5), ConfigError);
}

TEST_CASE("norm properties on random fields") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Field a = random_field(g2, seed), b = random_field(g2, seed + 100);
    for (double p : {2.0, 4.0}) {
      const auto spec = NormSpec::bessel(0.3, p);
      CHECK(norm(a + b, spec) <= norm(a, spec) + norm(b, spec) + 1e-12);
      CHECK(norm(a * -2.0, spec) == doctest::Approx(2.0 * norm(a, spec)).epsilon(1e-12));
    }
    // Bessel norm dominates L^2 for positive alpha and is dominated by it for negative
    CHECK(norm(a, NormSpec::bessel(0.3, 2.0)) >= lp_norm(a, 2.0));
    CHECK(norm(a, NormSpec::negative(0.3, 2.0)) <= lp_norm(a, 2.0));
  }
}

TEST_CASE("interpolation and transfers") {
  const Field f = smooth_random_field(g2, 7);
  for (std::size_t i = 0; i < g2.node_count(); i += 37) {
    CHECK(interpolate(f, 0, g2.node_position(i)) == doctest::Approx(f.values()(static_cast<Eigen::Index>(i), 0)));
  }
  // periodicity
  Point x(2);
  x << 1.234, -2.5;
  Point y = x;
  y(0) += 2 * kPi;
  y(1) -= 4 * kPi;
  CHECK(interpolate(f, 0, x) == doctest::Approx(interpolate(f, 0, y)).epsilon(1e-12));
  // linear functions in a cell are reproduced
  const Grid g{1, 16, 16.0};
  const Field lin = Field::sample(g, [](const Point& p) { return p(0); });
  Point z(1);
  z << 2.3;
  CHECK(interpolate(lin, 0, z) == doctest::Approx(2.3).epsilon(1e-13));
  CHECK(nearest_node(g, z) == 10);
}

TEST_CASE("atoms and the negative norm") {
  Eigen::ArrayXXd pos(3, 1);
  pos << 0.0, 0.0, 1.0;
  const Grid g{1, 16, 16.0};
  const Field atoms = deposit_atoms(pos, g);
  CHECK(atoms.integral() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(atoms.values()(8, 0) == doctest::Approx(2.0 / 3.0));
  Field zero(g, 1);
  CHECK(negative_norm_measure(pos, atoms, 0.5, 1.5) < 1e-13);
  CHECK(negative_norm_measure(pos, zero, 0.5, 2.0) == doctest::Approx(norm(atoms, NormSpec::negative(0.5, 2.0))));
  CHECK_THROWS_AS(negative_norm_measure(pos, zero, 0.0, 2.0), ConfigError);
}

TEST_CASE("spectral restriction") {
  const Grid fine{2, 64, 2 * kPi}, coarse{2, 32, 2 * kPi};
  const Field f = mode(fine, 3, -2);
  CHECK(max_abs_diff(restrict_field(f, coarse), mode(coarse, 3, -2)) < 1e-12);
  CHECK_THROWS_AS(restrict_field(mode(coarse, 1), fine), ConfigError);
}

TEST_CASE("long double scalar instantiation") {
  using FieldL = GridField<long double>;
  FieldL f = FieldL::sample(g1, [](const Point& x) { return std::cos(3.0 * x(0)); });
  const auto back = from_spectrum(to_spectrum(f));
  CHECK(static_cast<double>((back.values() - f.values()).abs().maxCoeff()) < 1e-15);
  CHECK(static_cast<double>(lp_norm(f, 2.0)) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-15));
}
