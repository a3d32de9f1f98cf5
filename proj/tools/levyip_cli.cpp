#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "levyip/errors.hpp"
#include "levyip/field_io.hpp"
#include "levyip/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace levyip;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kDivergence = 3, kIo = 4 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<unsigned> threads;
  std::vector<std::string> formats{"csv", "json", "svg"};
};

struct TupleFlags {
  std::optional<double> d, sigma, p, alpha, lambda, beta, delta;
  double eps = 0.05;
  std::string kernel = "burgers_identity";
  double eta = 0.0;
};

void add_common(CLI::App* app, Common& c, bool config_required) {
  auto* opt = app->add_option("--config", c.config, "JSON configuration file");
  if (config_required) opt->required();
  app->add_option("--seed", c.seed, "master seed (overrides plan.seed)");
  app->add_option("--out", c.out, "output directory (overrides plan.output_dir)");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--format", c.formats, "output formats: csv,json,svg")->delimiter(',');
}

void add_tuple(CLI::App* app, TupleFlags& t) {
  app->add_option("--d", t.d, "dimension");
  app->add_option("--sigma", t.sigma, "stability index");
  app->add_option("--p", t.p, "integrability exponent");
  app->add_option("--alpha", t.alpha, "smoothness exponent");
  app->add_option("--lambda", t.lambda, "kernel regularity exponent");
  app->add_option("--beta", t.beta, "mollifier scaling exponent");
  app->add_option("--delta", t.delta, "auxiliary exponent");
  app->add_option("--eps", t.eps, "corollary epsilon");
  app->add_option("--kernel", t.kernel, "kernel family (used without --config)");
  app->add_option("--eta", t.eta, "turbulence exponent (used without --config)");
}

ExperimentPlan load(const Common& c) {
  ExperimentPlan plan = load_plan(c.config);
  if (c.seed) plan.seed = *c.seed;
  if (!c.out.empty()) plan.output_dir = c.out;
  if (c.threads) plan.threads = *c.threads;
  return plan;
}

ParamTuple tuple_from(const Common& c, const TupleFlags& f, double& eps) {
  ParamTuple t;
  KernelSpec k;
  eps = f.eps;
  if (!c.config.empty()) {
    const auto plan = load(c);
    t = plan.resolved_params();
    k = plan.model.kernel;
    eps = plan.corollary_eps;
  } else {
    k.family = kernel_family_from_string(f.kernel);
    k.eta = f.eta;
  }
  if (f.d) t.d = *f.d;
  if (f.sigma) t.sigma = *f.sigma;
  if (f.p) t.p = *f.p;
  if (f.alpha) t.alpha = *f.alpha;
  if (f.beta) t.beta = *f.beta;
  if (f.delta) t.delta = *f.delta;
  const auto cls = classify_kernel(k, t);
  t.kernel_case = cls.kernel_case;
  if (f.lambda) {
    t.lambda = *f.lambda;
  } else if (c.config.empty() || f.alpha) {
    t.lambda = cls.lambda;
  }
  return t;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

int cmd_validate(const Common& c, const TupleFlags& f) {
  double eps = 0.0;
  const auto t = tuple_from(c, f, eps);
  const auto report = validate(t);
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& con : report.constraints) {
    out.push_back({{"name", con.name}, {"lhs", con.lhs}, {"rhs", con.rhs}, {"ok", con.ok}});
  }
  std::cout << out.dump(2) << '\n';
  return report.ok() ? kOk : kConfig;
}

int cmd_rate(const Common& c, const TupleFlags& f) {
  double eps = 0.0;
  const auto t = tuple_from(c, f, eps);
  const auto v = validate(t);
  if (!v.ok()) {
    std::cout << to_json(v).dump(2) << '\n';
    return kConfig;
  }
  const auto rate = theoretical_rate(t);
  const auto cor = corollary_rate(t, eps);
  json out = {{"rho", to_json(rate)}, {"corollary", to_json(cor)}};
  std::cout << out.dump(2) << '\n';
  return kOk;
}

int cmd_solve_pde(const Common& c) {
  const auto plan = load(c);
  const auto cfg = plan.target_pde_config();
  const Field u0 = plan.initial_density().sample_on(cfg.grid);
  const auto sol = solve(u0, cfg, plan.observation_times);
  ensure_dir(plan.output_dir);
  const fs::path dir(plan.output_dir);
  save_diagnostics_csv((dir / "diagnostics.csv").string(), sol.diagnostics);
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    const std::string stem = "u_" + std::to_string(i);
    save_field((dir / (stem + ".bin")).string(), sol.snapshots[i]);
    save_field_csv((dir / (stem + ".csv")).string(), sol.snapshots[i]);
  }
  json out = {{"grid_points", cfg.grid.n}, {"dt_time", cfg.dt}, {"times", sol.times},
              {"sup_kernel", sol.sup_kernel}, {"sup_bessel_norm", sol.sup_bessel_norm},
              {"final_mass", sol.diagnostics.back().mass}};
  std::cout << out.dump(2) << '\n';
  return kOk;
}

int cmd_simulate(const Common& c, std::optional<std::size_t> particles, std::uint32_t replica) {
  const auto plan = load(c);
  ModelSpec model = plan.model;
  if (!model.clip) model.clip = ClipConfig{solve_target(plan).clip_level};
  const std::size_t n = particles.value_or(plan.particle_counts.front());
  const auto init = plan.initial_density().sample_particles(n, plan.seed, replica);
  const auto result = simulate(init, model, plan.horizon, plan.dt, plan.seed, plan.observation_times,
                               {mass_observer(model.grid, model.beta)});
  if (!result.final_state.positions.allFinite()) {
    throw DivergenceError("particle simulation diverged at N = " + std::to_string(n) + ", replica " +
                          std::to_string(replica) + ", seed " + std::to_string(plan.seed));
  }
  ensure_dir(plan.output_dir);
  const fs::path dir(plan.output_dir);
  save_checkpoint((dir / "trajectory.ckpt").string(), result.final_state);
  save_records_csv((dir / "observables.csv").string(), result.records);
  const Field un = deposit(result.final_state, model.grid, model.mollifier(n));
  save_field((dir / "u_N.bin").string(), un);
  save_field_csv((dir / "u_N.csv").string(), un);
  json out = {{"N", n}, {"replica", replica}, {"seed", plan.seed}, {"clip_level", model.clip->level},
              {"final_time", result.final_state.time}, {"steps", result.final_state.step_index}};
  std::cout << out.dump(2) << '\n';
  return kOk;
}

int cmd_compare(const Common& c) {
  const auto plan = load(c);
  const auto report = run(plan);
  const auto files = emit(report, c.formats, plan.output_dir);
  json out = {{"kernel", report.kernel},
              {"norm_kind", report.norm_kind},
              {"rho", report.rho},
              {"rho_hat", report.rho_hat ? json(*report.rho_hat) : json(nullptr)},
              {"slope", report.primary_fit.slope},
              {"ci_half_width", std::isfinite(report.primary_fit.ci_half_width) ? json(report.primary_fit.ci_half_width) : json(nullptr)},
              {"negative_slope", report.negative_fit.slope},
              {"clip_level", report.clip_level},
              {"files", files}};
  std::cout << out.dump(2) << '\n';
  return kOk;
}

int cmd_fit(const std::string& input, std::string kind, std::optional<double> time, double confidence) {
  std::ifstream is(input);
  if (!is) throw IoError("cannot open '" + input + "'");
  std::stringstream buf;
  buf << is.rdbuf();
  const auto rows = parse_report_csv(buf.str());
  if (kind.empty()) {
    for (const auto& r : rows) {
      if (r.norm_kind != "negative") {
        kind = r.norm_kind;
        break;
      }
    }
  }
  double t_fit = -1.0;
  for (const auto& r : rows) {
    if (r.norm_kind == kind) t_fit = std::max(t_fit, r.time);
  }
  if (time) t_fit = *time;
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) {
    if (r.norm_kind == kind && std::abs(r.time - t_fit) <= 1e-9 * std::max(1.0, t_fit)) {
      pts.emplace_back(static_cast<double>(r.particles), r.mean);
    }
  }
  if (pts.size() < 2) throw ConfigError("fit needs at least two rows for norm kind '" + kind + "'");
  const auto f = fit_slope(pts, confidence);
  json out = {{"norm_kind", kind},
              {"t", t_fit},
              {"slope", f.slope},
              {"intercept", f.intercept},
              {"slope_stderr", f.slope_stderr},
              {"ci_half_width", std::isfinite(f.ci_half_width) ? json(f.ci_half_width) : json(nullptr)},
              {"confidence", f.confidence},
              {"points", f.points},
              {"degenerate", f.degenerate},
              {"reason", f.reason},
              {"negative_with_confidence", f.negative_with_confidence()}};
  std::cout << out.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle approximation of nonlocal transport PDEs driven by stable Levy noise"};
  app.require_subcommand(1);

  Common c_validate, c_rate, c_pde, c_sim, c_compare;
  TupleFlags t_validate, t_rate;
  auto* validate_cmd = app.add_subcommand("validate", "check a parameter tuple against the standing assumptions");
  add_common(validate_cmd, c_validate, false);
  add_tuple(validate_cmd, t_validate);
  auto* rate_cmd = app.add_subcommand("rate", "theoretical rates rho and rho_hat");
  add_common(rate_cmd, c_rate, false);
  add_tuple(rate_cmd, t_rate);
  auto* pde_cmd = app.add_subcommand("solve-pde", "solve the target PDE and write snapshots and diagnostics");
  add_common(pde_cmd, c_pde, true);
  auto* sim_cmd = app.add_subcommand("simulate", "run one particle replica and write a checkpoint");
  add_common(sim_cmd, c_sim, true);
  std::optional<std::size_t> sim_particles;
  std::uint32_t sim_replica = 0;
  sim_cmd->add_option("--particles", sim_particles, "particle count (default: first entry of N_list)");
  sim_cmd->add_option("--replica", sim_replica, "replica index");
  auto* compare_cmd = app.add_subcommand("compare", "full particle-vs-PDE experiment with rate report");
  add_common(compare_cmd, c_compare, true);
  auto* fit_cmd = app.add_subcommand("fit", "log-log slope fit on an existing rate report CSV");
  std::string fit_input, fit_kind;
  std::optional<double> fit_time;
  double fit_conf = 0.95;
  fit_cmd->add_option("--input,input", fit_input, "rate report CSV")->required();
  fit_cmd->add_option("--norm-kind", fit_kind, "norm kind to fit (default: the primary norm)");
  fit_cmd->add_option("--time", fit_time, "observation time (default: the latest)");
  fit_cmd->add_option("--confidence", fit_conf, "confidence level")->check(CLI::Range(0.5, 0.999999));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*validate_cmd) return cmd_validate(c_validate, t_validate);
    if (*rate_cmd) return cmd_rate(c_rate, t_rate);
    if (*pde_cmd) return cmd_solve_pde(c_pde);
    if (*sim_cmd) return cmd_simulate(c_sim, sim_particles, sim_replica);
    if (*compare_cmd) return cmd_compare(c_compare);
    if (*fit_cmd) return cmd_fit(fit_input, fit_kind, fit_time, fit_conf);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "numerical divergence: " << e.what() << '\n';
    return kDivergence;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
