#include "levyip/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "levyip/errors.hpp"

namespace levyip {

namespace {

constexpr double kTimeMatch = 1e-9;

std::string join_violations(const ValidationReport& v) {
  std::ostringstream os;
  bool first = true;
  for (const auto& c : v.violations()) {
    os << (first ? "" : "; ") << c.name << " (lhs " << c.lhs << ", rhs " << c.rhs << ")";
    first = false;
  }
  return os.str();
}

std::size_t observation_index(const std::vector<double>& times, double t) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - t) <= kTimeMatch * std::max(1.0, t)) return i;
  }
  return times.size();
}

double fit_time(const ExperimentPlan& plan) {
  return *std::max_element(plan.observation_times.begin(), plan.observation_times.end());
}

}  // namespace

void ExperimentPlan::validate() const {
  model.validate();
  if (particle_counts.size() < 2) throw ConfigError("N_list needs at least two entries for slope fitting");
  for (std::size_t i = 0; i < particle_counts.size(); ++i) {
    if (particle_counts[i] == 0) throw ConfigError("particle counts must be positive");
    if (i > 0 && particle_counts[i] < particle_counts[i - 1]) throw ConfigError("N_list must be non-decreasing");
  }
  if (replicas < 1) throw ConfigError("replicas must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("dt_time must be > 0");
  if (!(horizon >= 0.0)) throw ConfigError("horizon_time must be >= 0");
  steps_for(horizon, dt);
  if (observation_times.empty()) throw ConfigError("observe_at_time must list at least one time");
  for (std::size_t i = 0; i < observation_times.size(); ++i) {
    const double t = observation_times[i];
    if (t < 0.0 || t > horizon * (1.0 + kTimeMatch)) throw ConfigError("observation times must lie in [0, horizon]");
    if (i > 0 && !(t > observation_times[i - 1])) throw ConfigError("observation times must be strictly increasing");
    steps_for(t, dt);
  }
  if (pde_grid_refinement < 1 || pde_dt_refinement < 1) throw ConfigError("PDE refinement factors must be >= 1");
  if (!(clip_safety >= 1.0)) throw ConfigError("clip safety factor must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (!(corollary_eps > 0.0)) throw ConfigError("corollary_eps must be > 0");
  const double radius = model.mollifier(particle_counts.back()).radius();
  const int needed = minimal_grid_points(model.grid.box_len, radius);
  if (model.grid.n < needed) {
    throw ConfigError("deposition grid does not resolve the mollifier at N = " + std::to_string(particle_counts.back()) +
                      ": n_points must be >= " + std::to_string(needed));
  }
  initial_density();
  target_pde_config().validate();
}

ParamTuple ExperimentPlan::resolved_params() const {
  ParamTuple t = params;
  t.d = model.levy.dim;
  t.sigma = model.levy.sigma;
  t.beta = model.beta;
  const auto c = classify_kernel(model.kernel, t);
  t.kernel_case = c.kernel_case;
  if (!std::isfinite(params.lambda)) t.lambda = c.lambda;
  return t;
}

InitialDensity ExperimentPlan::initial_density() const {
  return InitialDensity(model.levy.dim, model.grid.box_len, initial);
}

PdeConfig ExperimentPlan::target_pde_config() const {
  PdeConfig c;
  c.kernel = model.kernel;
  c.levy = model.levy;
  c.clip = model.clip;
  c.dt = dt / pde_dt_refinement;
  c.horizon = horizon;
  c.grid = model.grid;
  c.grid.n = model.grid.n * pde_grid_refinement;
  c.dealias = dealias;
  c.norm_alpha = params.alpha;
  c.norm_p = params.p;
  return c;
}

std::vector<ErrorStat> RateReport::select(const std::string& kind, double time) const {
  std::vector<ErrorStat> out;
  for (const auto& s : stats) {
    if (s.norm_kind == kind && std::abs(s.time - time) <= kTimeMatch * std::max(1.0, time)) out.push_back(s);
  }
  return out;
}

TargetSolution solve_target(const ExperimentPlan& plan) {
  const ParamTuple t = plan.resolved_params();
  const PdeConfig cfg = plan.target_pde_config();
  const Field u0 = plan.initial_density().sample_on(cfg.grid);
  const PdeSolution sol = solve(u0, cfg, plan.observation_times);

  TargetSolution out;
  for (double time : plan.observation_times) out.snapshots.push_back(restrict_field(sol.at(time), plan.model.grid));

  double sup_x = 0.0;
  for (const auto& d : sol.diagnostics) {
    sup_x = std::max(sup_x, t.kernel_case == KernelCase::case1 ? d.bessel_norm : d.l1 + d.lp);
  }
  out.sup_x_norm = sup_x;
  out.sup_kernel = sol.sup_kernel;
  out.kernel_constant = plan.model.kernel.multiplier_bound(cfg.grid, t.lambda - t.alpha);
  const double required = out.kernel_constant * sup_x;
  if (plan.model.clip) {
    out.clip_level = plan.model.clip->level;
  } else {
    out.clip_level = std::max(plan.clip_safety * required, 1.1 * out.sup_kernel);
  }
  out.clip_condition_ok = out.clip_level >= required;
  return out;
}

ReplicaErrors run_replica(const ExperimentPlan& plan, const TargetSolution& target, std::size_t particles,
                          std::uint32_t replica) {
  const ParamTuple t = plan.resolved_params();
  ModelSpec model = plan.model;
  model.clip = ClipConfig{target.clip_level};
  const auto moll = model.mollifier(particles);
  const NormSpec primary = t.kernel_case == KernelCase::case1 ? NormSpec::bessel(t.alpha, t.p)
                                                              : NormSpec::distorted(t.alpha, t.p);
  const double q = t.conjugate_p();

  const std::size_t k = plan.observation_times.size();
  ReplicaErrors err;
  err.primary.assign(k, std::numeric_limits<double>::quiet_NaN());
  err.negative = err.primary;
  err.mass = err.primary;

  Observer measure = [&](const ParticleState& s, std::vector<ObserverRecord>&) {
    const std::size_t idx = observation_index(plan.observation_times, s.time);
    if (idx == k) return;
    if (!s.positions.allFinite()) return;
    const Field un = deposit(s, model.grid, moll);
    const Field& u = target.snapshots[idx];
    err.primary[idx] = norm(un - u, primary, model.kernel);
    err.negative[idx] = negative_norm_measure(s.positions, u, t.alpha, q);
    err.mass[idx] = un.integral();
  };

  const ParticleState init = plan.initial_density().sample_particles(particles, plan.seed, replica);
  const auto result = simulate(init, model, plan.horizon, plan.dt, plan.seed, plan.observation_times, {measure});

  const auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!result.final_state.positions.allFinite() || !finite(err.primary) || !finite(err.negative)) {
    throw DivergenceError("particle simulation diverged at N = " + std::to_string(particles) + ", replica " +
                          std::to_string(replica) + ", seed " + std::to_string(plan.seed));
  }
  return err;
}

RateReport run(const ExperimentPlan& plan) {
  plan.validate();
  const ParamTuple t = plan.resolved_params();
  const auto validation = validate(t);
  if (!validation.ok()) throw ConfigError("parameter tuple violates the standing assumptions: " + join_violations(validation));
  const RateResult rate = theoretical_rate(t);
  const CorollaryResult cor = corollary_rate(t, plan.corollary_eps);
  const auto cls = classify_kernel(plan.model.kernel, t);

  const TargetSolution target = solve_target(plan);

  const std::size_t nn = plan.particle_counts.size();
  const std::size_t jobs = nn * plan.replicas;
  std::vector<ReplicaErrors> results(jobs);
  std::vector<std::exception_ptr> failures(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const std::size_t ni = j / plan.replicas;
      const auto r = static_cast<std::uint32_t>(j % plan.replicas);
      try {
        results[j] = run_replica(plan, target, plan.particle_counts[ni], r);
      } catch (...) {
        failures[j] = std::current_exception();
      }
    }
  };
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(plan.threads, jobs));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  RateReport rep;
  rep.kernel = to_string(plan.model.kernel.family);
  rep.kernel_case = to_string(cls.kernel_case);
  rep.norm_kind = to_string(cls.norm);
  rep.params = t;
  rep.rho = rate.rho;
  rep.rho_branch = rate.active_branch;
  if (cor.applicable) rep.rho_hat = cor.rho_hat;
  rep.corollary_failures = cor.failures;
  rep.clip_level = target.clip_level;
  rep.kernel_constant = target.kernel_constant;
  rep.sup_x_norm = target.sup_x_norm;
  rep.sup_kernel = target.sup_kernel;
  rep.clip_condition_ok = target.clip_condition_ok;
  rep.particle_counts = plan.particle_counts;
  rep.observation_times = plan.observation_times;
  rep.replicas = plan.replicas;
  rep.seed = plan.seed;

  const double t_fit = fit_time(plan);
  std::vector<std::pair<double, double>> primary_pts, negative_pts;
  for (std::size_t ni = 0; ni < nn; ++ni) {
    const std::size_t n = plan.particle_counts[ni];
    for (std::size_t ti = 0; ti < plan.observation_times.size(); ++ti) {
      std::vector<double> a, b;
      for (std::size_t r = 0; r < plan.replicas; ++r) {
        const auto& e = results[ni * plan.replicas + r];
        a.push_back(e.primary[ti]);
        b.push_back(e.negative[ti]);
        rep.max_mass_deviation = std::max(rep.max_mass_deviation, std::abs(e.mass[ti] - 1.0));
      }
      const auto sa = mean_and_stderr(a);
      const auto sb = mean_and_stderr(b);
      const double time = plan.observation_times[ti];
      rep.stats.push_back({n, time, rep.norm_kind, sa.mean, sa.std_error, plan.replicas});
      rep.stats.push_back({n, time, "negative", sb.mean, sb.std_error, plan.replicas});
      if (time == t_fit) {
        primary_pts.emplace_back(static_cast<double>(n), sa.mean);
        negative_pts.emplace_back(static_cast<double>(n), sb.mean);
      }
    }
  }
  rep.primary_fit = fit_slope(primary_pts);
  rep.negative_fit = fit_slope(negative_pts);
  return rep;
}

}  // namespace levyip
