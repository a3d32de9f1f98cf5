#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "levyip/errors.hpp"
#include "levyip/particles.hpp"

using namespace levyip;

namespace {

ParticleState uniform_state(std::size_t n, int dim, double box, std::uint64_t seed) {
  ParticleState s;
  s.box_len = box;
  s.positions.resize(static_cast<Eigen::Index>(n), dim);
  CounterStream rng({seed, 0, 0, 0});
  for (Eigen::Index i = 0; i < s.positions.size(); ++i) s.positions.data()[i] = (rng.uniform() - 0.5) * box;
  return s;
}

ModelSpec burgers_model(int n_points = 256, double box = 8.0) {
  ModelSpec m;
  m.kernel = KernelSpec{KernelFamily::burgers_identity};
  m.levy = LevyConfig{1.5, 1};
  m.beta = 0.2;
  m.clip = ClipConfig{2.0};
  m.grid = Grid{1, n_points, box};
  return m;
}

}  // namespace

TEST_CASE("bump normalization integrates to one") {
  // independent quadrature: midpoint rule in 1-d, radial midpoint rule in 2-d
  const int m = 400000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < m; ++i) {
    const double y = -1.0 + (i + 0.5) * 2.0 / m;
    s1 += std::exp(-1.0 / (1.0 - y * y)) * 2.0 / m;
    const double r = (i + 0.5) / m;
    s2 += 2.0 * std::numbers::pi * r * std::exp(-1.0 / (1.0 - r * r)) / m;
  }
  CHECK(bump_normalization(1) * s1 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(bump_normalization(2) * s2 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(bump_normalization(3), ConfigError);
  Point y(1);
  y << 1.0;
  CHECK(mollifier_profile(y) == 0.0);
}

TEST_CASE("scaled mollifier") {
  MollifierConfig m{0.25, 16};
  CHECK(m.radius() == doctest::Approx(0.5));
  Point x(1);
  x << 0.0;
  Point y(1);
  y << 0.0;
  CHECK(mollifier_value(x, m) == doctest::Approx(2.0 * mollifier_profile(y)));
  x << 0.51;
  CHECK(mollifier_value(x, m) == 0.0);
  CHECK_THROWS_AS(MollifierConfig({0.0, 4}).validate(), ConfigError);
}

TEST_CASE("clip function") {
  const ClipConfig c{1.5};
  CHECK_THROWS_AS(ClipConfig{0.0}.validate(), ConfigError);
  double top = 0.0;
  for (double x = -4.0; x <= 4.0; x += 0.001) {
    const double f = clip(x, c);
    CHECK(clip(-x, c) == doctest::Approx(-f).epsilon(1e-15));
    if (std::abs(x) <= 1.5) CHECK(f == x);
    if (std::abs(x) >= 2.5) CHECK(std::abs(f) == doctest::Approx(1.5));
    CHECK(std::abs(f) <= 2.5);
    CHECK(std::abs(clip_derivative(x, c)) <= 1.0 + 1e-12);
    top = std::max(top, f);
    const double h = 1e-5;
    CHECK(clip_derivative(x, c) == doctest::Approx((clip(x + h, c) - clip(x - h, c)) / (2 * h)).epsilon(1e-6).scale(1.0));
    CHECK(clip_second_derivative(x, c) ==
          doctest::Approx((clip_derivative(x + h, c) - clip_derivative(x - h, c)) / (2 * h)).epsilon(1e-4).scale(1.0));
  }
  CHECK(top == doctest::Approx(1.5 + 16.0 / 81.0).epsilon(1e-6));
  // C^2 matching at both ends of the blend band
  for (double edge : {1.5, 2.5}) {
    CHECK(clip_derivative(edge - 1e-12, c) == doctest::Approx(clip_derivative(edge + 1e-12, c)).epsilon(1e-9));
    CHECK(clip_second_derivative(edge - 1e-12, c) ==
          doctest::Approx(clip_second_derivative(edge + 1e-12, c)).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("deposit conserves mass and respects resolution") {
  const Grid g1{1, 256, 8.0}, g2{2, 128, 8.0};
  for (std::size_t n : {10, 100, 1000}) {
    const MollifierConfig m{0.2, n};
    CHECK(deposit(uniform_state(n, 1, 8.0, n), g1, m).integral() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(deposit(uniform_state(n, 2, 8.0, n), g2, MollifierConfig{0.15, n}).integral() ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  const Field u = deposit(uniform_state(50, 1, 8.0, 1), g1, MollifierConfig{0.2, 50});
  CHECK(u.values().minCoeff() >= 0.0);
  const Grid coarse{1, 16, 8.0};
  try {
    deposit(uniform_state(1000, 1, 8.0, 1), coarse, MollifierConfig{0.2, 1000});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("n = 128") != std::string::npos);
  }
  CHECK(minimal_grid_points(8.0, std::pow(1000.0, -0.2)) == 128);
  const Grid small{1, 64, 1.0};
  CHECK_THROWS_AS(deposit(uniform_state(2, 1, 1.0, 1), small, MollifierConfig{0.01, 2}), ConfigError);
}

TEST_CASE("deposit is equivariant under grid-cell shifts") {
  const Grid g{1, 128, 8.0};
  auto s = uniform_state(40, 1, 8.0, 3);
  const MollifierConfig m{0.2, 40};
  const Field a = deposit(s, g, m);
  for (Eigen::Index i = 0; i < s.positions.rows(); ++i) s.positions(i, 0) = wrap_periodic(s.positions(i, 0) + g.spacing(), 8.0);
  const Field b = deposit(s, g, m);
  for (int k = 0; k < g.n; ++k) CHECK(b.values()((k + 1) % g.n, 0) == doctest::Approx(a.values()(k, 0)).epsilon(1e-10));
}

TEST_CASE("drift stays inside the clip bound and matches the direct sum") {
  ModelSpec model = burgers_model(4096, 2.0 * std::numbers::pi);
  model.clip = ClipConfig{0.05};
  const auto s = uniform_state(32, 1, model.grid.box_len, 11);
  const auto d = drift(s, model);
  CHECK(d.abs().maxCoeff() <= 0.05 + 1.0);
  model.clip.reset();
  const auto d0 = drift(s, model);
  const MollifierConfig m = model.mollifier(32);
  for (std::size_t i = 0; i < s.size(); ++i) {
    double direct = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      Point dx(1);
      dx << periodic_distance(s.positions(static_cast<Eigen::Index>(i), 0) - s.positions(static_cast<Eigen::Index>(j), 0),
                              model.grid.box_len);
      direct += mollifier_value(dx, m) / 32.0;
    }
    CHECK(std::abs(d0(static_cast<Eigen::Index>(i), 0) - direct) < 1e-5);
  }
}

TEST_CASE("advance wraps and counts steps") {
  ParticleState s = uniform_state(3, 1, 4.0, 1);
  s.positions(0, 0) = 1.9;
  Eigen::ArrayXXd drift_v = Eigen::ArrayXXd::Zero(3, 1), noise = Eigen::ArrayXXd::Zero(3, 1);
  drift_v(0, 0) = 1.0;
  const auto t = advance(s, 0.5, drift_v, noise);
  CHECK(t.positions(0, 0) == doctest::Approx(-1.6));
  CHECK(t.step_index == 1);
  CHECK(t.time == doctest::Approx(0.5));
  CHECK_THROWS_AS(advance(s, 0.5, Eigen::ArrayXXd::Zero(2, 1), noise), ConfigError);
}

TEST_CASE("noise streams") {
  auto s = uniform_state(5, 2, 8.0, 1);
  const LevyConfig cfg{1.5, 2};
  const auto a = sample_noise(s, 0.01, cfg, 42);
  CHECK((a == sample_noise(s, 0.01, cfg, 42)).all());
  CHECK(!(a == sample_noise(s, 0.01, cfg, 43)).all());
  s.replica_id = 1;
  CHECK(!(a == sample_noise(s, 0.01, cfg, 42)).all());
  s.replica_id = 0;
  s.step_index = 1;
  CHECK(!(a == sample_noise(s, 0.01, cfg, 42)).all());
}

TEST_CASE("simulation is deterministic and observers fire on schedule") {
  const ModelSpec model = burgers_model();
  const InitialDensity rho(1, 8.0, {{Point::Constant(1, 0.0), 0.5, 1.0}});
  const auto init = rho.sample_particles(200, 5, 0);
  const auto obs = mass_observer(model.grid, model.beta);
  const auto a = simulate(init, model, 0.05, 0.01, 9, {0.0, 0.02, 0.05}, {obs});
  const auto b = simulate(init, model, 0.05, 0.01, 9, {0.0, 0.02, 0.05}, {obs});
  CHECK((a.final_state.positions == b.final_state.positions).all());
  REQUIRE(a.records.size() == 3);
  CHECK(a.records[1].time == doctest::Approx(0.02));
  for (const auto& r : a.records) CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.final_state.step_index == 5);
  CHECK((a.final_state.positions.abs() <= 4.0).all());
  CHECK_THROWS_AS(simulate(init, model, 0.05, 0.01, 9, {0.07}, {}), ConfigError);
  CHECK_THROWS_AS(steps_for(0.015, 0.01), ConfigError);
  CHECK(steps_for(0.3, 0.1) == 3);
}

TEST_CASE("initial density") {
  CHECK_THROWS_AS(InitialDensity(1, 8.0, {{Point::Constant(1, 0.0), 2.0, 1.0}}), ConfigError);
  CHECK_THROWS_AS(InitialDensity(1, 8.0, {{Point::Constant(1, 0.0), 0.5, 0.7}}), ConfigError);
  CHECK_THROWS_AS(InitialDensity(1, 8.0, {}), ConfigError);
  const InitialDensity d1(1, 8.0, {{Point::Constant(1, -1.0), 0.4, 0.3}, {Point::Constant(1, 1.5), 0.6, 0.7}});
  CHECK(d1.sample_on(Grid{1, 512, 8.0}).integral() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(d1.cdf(-4.0) == doctest::Approx(0.0).scale(1.0));
  CHECK(d1.cdf(4.0 - 1e-12) == doctest::Approx(1.0));
  // one-sample KS against the exact CDF
  const std::size_t n = 4000;
  auto s = d1.sample_particles(n, 1, 0);
  std::vector<double> xs(s.positions.data(), s.positions.data() + n);
  std::sort(xs.begin(), xs.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = d1.cdf(xs[i]);
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
  }
  CHECK(ks < 1.628 / std::sqrt(static_cast<double>(n)));
  // replicas give independent draws, the same replica reproduces
  CHECK(!(s.positions == d1.sample_particles(n, 1, 1).positions).all());
  CHECK((s.positions == d1.sample_particles(n, 1, 0).positions).all());

  const InitialDensity d2(2, 8.0, {{Point::Constant(2, 0.5), 0.5, 1.0}});
  CHECK(d2.sample_on(Grid{2, 128, 8.0}).integral() == doctest::Approx(1.0).epsilon(1e-10));
  auto s2 = d2.sample_particles(20000, 3, 0);
  CHECK(s2.positions.col(0).mean() == doctest::Approx(0.5).epsilon(0.02));
  const double var = (s2.positions.col(1) - s2.positions.col(1).mean()).square().mean();
  CHECK(var == doctest::Approx(0.25).epsilon(0.05));
  CHECK_THROWS_AS(d2.cdf(0.0), ConfigError);
}

TEST_CASE("checkpoint round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "levyip_test_particles";
  std::filesystem::create_directories(dir);
  auto s = uniform_state(17, 2, 6.0, 4);
  s.time = 0.125;
  s.replica_id = 3;
  s.step_index = 77;
  const auto path = (dir / "state.ckpt").string();
  save_checkpoint(path, s);
  CHECK(std::filesystem::file_size(path) == 8 + 4 + 8 + 8 + 8 + 8 + 17 * 2 * 8);
  const auto t = load_checkpoint(path);
  CHECK((t.positions == s.positions).all());
  CHECK(t.box_len == s.box_len);
  CHECK(t.time == s.time);
  CHECK(t.replica_id == 3);
  CHECK(t.step_index == 77);
  std::filesystem::resize_file(path, 40);
  CHECK_THROWS_AS(load_checkpoint(path), IoError);
  CHECK_THROWS_AS(load_checkpoint((dir / "missing.ckpt").string()), IoError);
  save_records_csv((dir / "rec.csv").string(), {{0.5, "mass", 1.0}});
  std::ifstream is(dir / "rec.csv");
  std::string header;
  std::getline(is, header);
  CHECK(header == "time,observable,value");
}
