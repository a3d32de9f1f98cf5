#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "levyip/errors.hpp"
#include "levyip/pde.hpp"
#include "support.hpp"

using namespace levyip;

namespace {
constexpr double kPi = std::numbers::pi;

PdeConfig burgers(int n = 64) {
  PdeConfig c;
  c.kernel = KernelSpec{KernelFamily::burgers_identity};
  c.levy = LevyConfig{1.5, 1};
  c.grid = Grid{1, n, 2 * kPi};
  c.dt = 1e-3;
  c.horizon = 0.1;
  return c;
}

PdeConfig sqg(int n = 32) {
  PdeConfig c;
  c.kernel = KernelSpec{KernelFamily::sqg_riesz};
  c.levy = LevyConfig{1.5, 2};
  c.grid = Grid{2, n, 2 * kPi};
  c.dt = 1e-2;
  c.horizon = 0.5;
  return c;
}

Field gaussian(const Grid& g, double width) {
  return Field::sample(g, [&](const Point& x) { return std::exp(-0.5 * x.squaredNorm() / (width * width)); });
}
}  // namespace

TEST_CASE("phi1") {
  CHECK(phi1(0.0) == 1.0);
  CHECK(phi1(-1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
  CHECK(phi1(-0.99e-4) == doctest::Approx(std::expm1(-0.99e-4) / -0.99e-4).epsilon(1e-15));
  CHECK(phi1(-1.01e-4) == doctest::Approx(std::expm1(-1.01e-4) / -1.01e-4).epsilon(1e-15));
}

TEST_CASE("config validation") {
  auto c = burgers();
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = burgers();
  c.horizon = 0.10005;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = burgers();
  c.levy.dim = 2;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = sqg();
  c.grid.dim = 1;
  c.levy.dim = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("burgers nonlinearity on a single mode") {
  const auto c = burgers();
  const Field u = Field::sample(c.grid, [](const Point& x) { return std::cos(x(0)); });
  const Field expect = Field::sample(c.grid, [](const Point& x) { return -std::sin(2.0 * x(0)); });
  CHECK(testing::max_abs_diff(nonlinear_term(u, c), expect) < 1e-9);
}

TEST_CASE("sqg single mode evolves linearly") {
  auto c = sqg();
  const Field u0 = Field::sample(c.grid, [](const Point& x) { return std::cos(x(0) + x(1)); });
  const auto sol = solve(u0, c);
  const double psi = characteristic_exponent(1.0, 1.0, c.levy);
  CHECK(testing::max_abs_diff(sol.snapshots.back(), u0 * std::exp(-c.horizon * psi)) < 1e-12);
}

TEST_CASE("mass is conserved step by step") {
  for (auto c : {burgers(), sqg()}) {
    Field u = gaussian(c.grid, 0.7);
    double m = u.integral();
    for (int k = 0; k < 20; ++k) {
      u = mild_step(u, c.dt, c);
      CHECK(std::abs(u.integral() - m) < 1e-13);
      m = u.integral();
    }
  }
}

TEST_CASE("first-order convergence in dt") {
  auto c = burgers(128);
  c.horizon = 0.2;
  const Field u0 = gaussian(c.grid, 0.6) * 2.0;
  auto at = [&](double dt) {
    auto cc = c;
    cc.dt = dt;
    return solve(u0, cc).snapshots.back();
  };
  const Field ref = at(0.2 / 1600);
  const double e1 = lp_norm(at(0.2 / 50) - ref, 2.0);
  const double e2 = lp_norm(at(0.2 / 100) - ref, 2.0);
  CHECK(e1 / e2 >= 1.7);
  CHECK(e1 / e2 <= 2.3);
}

TEST_CASE("clipping is inactive when the level dominates the velocity") {
  auto c = sqg();
  const Field u0 = gaussian(c.grid, 0.8);
  const auto plain = solve(u0, c);
  auto clipped_cfg = c;
  clipped_cfg.clip = ClipConfig{1.1 * plain.sup_kernel};
  const auto clipped = solve(u0, clipped_cfg);
  CHECK(testing::max_abs_diff(plain.snapshots.back(), clipped.snapshots.back()) < 1e-10);
  clipped_cfg.clip = ClipConfig{0.2 * plain.sup_kernel};
  CHECK(testing::max_abs_diff(plain.snapshots.back(), solve(u0, clipped_cfg).snapshots.back()) > 1e-6);
}

TEST_CASE("sqg energy decays monotonically") {
  auto c = sqg();
  const auto sol = solve(testing::smooth_random_field(c.grid, 3), c);
  for (std::size_t i = 1; i < sol.diagnostics.size(); ++i) {
    CHECK(sol.diagnostics[i].l2 <= sol.diagnostics[i - 1].l2);
  }
}

TEST_CASE("snapshots and diagnostics") {
  auto c = burgers();
  c.norm_alpha = 0.3;
  c.norm_p = 4.0;
  const Field u0 = gaussian(c.grid, 0.5);
  const auto sol = solve(u0, c, {0.0, 0.05});
  REQUIRE(sol.times.size() == 3);
  CHECK(sol.at(0.05).grid() == c.grid);
  CHECK(testing::max_abs_diff(sol.at(0.0), u0) == 0.0);
  CHECK_THROWS_AS(sol.at(0.07), ConfigError);
  CHECK(sol.diagnostics.size() == 101);
  const auto& d0 = sol.diagnostics.front();
  CHECK(d0.bessel_norm == doctest::Approx(norm(u0, NormSpec::bessel(0.3, 4.0))));
  CHECK(d0.l1 == doctest::Approx(lp_norm(u0, 1.0)));
  CHECK(d0.lp == doctest::Approx(lp_norm(u0, 4.0)));
  CHECK(sol.sup_kernel == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(solve(u0, c, {0.5}), ConfigError);
  const auto dir = std::filesystem::temp_directory_path() / "levyip_test_pde";
  std::filesystem::create_directories(dir);
  save_diagnostics_csv((dir / "diag.csv").string(), sol.diagnostics);
  std::ifstream is(dir / "diag.csv");
  std::string header;
  std::getline(is, header);
  CHECK(header == "time,mass,L2,sup_K,bessel_norm");
}

TEST_CASE("blow-up is reported as divergence") {
  auto c = burgers(32);
  c.dealias = false;
  c.dt = 0.5;
  c.horizon = 50.0;
  const Field u0 = gaussian(c.grid, 0.5) * 1e3;
  CHECK_THROWS_AS(solve(u0, c), DivergenceError);
}
