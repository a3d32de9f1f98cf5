#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "levyip/metrics.hpp"
#include "levyip/particles.hpp"
#include "levyip/pde.hpp"
#include "levyip/stats.hpp"

namespace levyip {

/// A full particle-vs-PDE convergence experiment.
struct ExperimentPlan {
  ModelSpec model;  ///< model.clip set means a fixed level M; unset means M is chosen from the PDE solve
  ParamTuple params;  ///< d, sigma, beta are taken from model; lambda from the kernel classification
  std::vector<GaussianBump> initial;
  std::vector<std::size_t> particle_counts;
  std::size_t replicas = 1;
  std::vector<double> observation_times;
  double dt = 1e-3;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  double corollary_eps = 0.05;
  double clip_safety = 1.05;
  int pde_grid_refinement = 2;
  int pde_dt_refinement = 4;
  bool dealias = true;
  unsigned threads = 1;
  std::string output_dir = "out";

  /// Structural checks (sizes, orderings, multiples of dt). Throws ConfigError.
  void validate() const;

  /// Parameter tuple with d, sigma, beta and lambda filled in.
  ParamTuple resolved_params() const;

  InitialDensity initial_density() const;
  PdeConfig target_pde_config() const;
};

/// Reads a plan from the JSON configuration document. Sections:
///   levy {sigma, dim, variant}
///   kernel {family, eta, attraction}
///   mollifier {beta}
///   clip {level_velocity?, safety_factor}
///   grid {n_points, box_length}
///   pde {grid_refinement, dt_refinement, dealias, dt_time?}
///   plan {N_list, replicas, observe_at_time, dt_time, horizon_time, seed, threads,
///         output_dir, corollary_eps, params {p, alpha, lambda?, delta},
///         initial {bumps [{center_length, width_length, weight}]}}
ExperimentPlan plan_from_json(const nlohmann::json& doc);
ExperimentPlan load_plan(const std::string& path);

struct ErrorStat {
  std::size_t particles = 0;
  double time = 0.0;
  std::string norm_kind;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t replicas = 0;

  bool operator==(const ErrorStat&) const = default;
};

struct RateReport {
  std::string kernel;
  std::string kernel_case;
  std::string norm_kind;  ///< "bessel" (case 1) or "distorted" (case 2)
  ParamTuple params;
  double rho = 0.0;
  int rho_branch = 1;
  std::optional<double> rho_hat;
  std::vector<std::string> corollary_failures;
  double clip_level = 0.0;
  double kernel_constant = 0.0;
  double sup_x_norm = 0.0;
  double sup_kernel = 0.0;
  bool clip_condition_ok = false;
  double max_mass_deviation = 0.0;
  std::vector<std::size_t> particle_counts;
  std::vector<double> observation_times;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  std::vector<ErrorStat> stats;
  SlopeFit primary_fit;
  SlopeFit negative_fit;

  /// Entries for one norm kind at one time, in particle-count order.
  std::vector<ErrorStat> select(const std::string& kind, double time) const;
};

bool operator==(const SlopeFit& a, const SlopeFit& b);
bool operator==(const ParamTuple& a, const ParamTuple& b);
bool operator==(const RateReport& a, const RateReport& b);

/// Per-replica error series, exposed for tests and the simulate subcommand.
struct ReplicaErrors {
  std::vector<double> primary;   ///< per observation time
  std::vector<double> negative;  ///< ||mu^N - u||_{-alpha, q}
  std::vector<double> mass;
};

/// Target solution restricted to the deposition grid, plus the clip level.
struct TargetSolution {
  std::vector<Field> snapshots;  ///< aligned with plan.observation_times
  double clip_level = 0.0;
  double kernel_constant = 0.0;
  double sup_x_norm = 0.0;
  double sup_kernel = 0.0;
  bool clip_condition_ok = false;
};

TargetSolution solve_target(const ExperimentPlan& plan);

ReplicaErrors run_replica(const ExperimentPlan& plan, const TargetSolution& target, std::size_t particles,
                          std::uint32_t replica);

RateReport run(const ExperimentPlan& plan);

nlohmann::json to_json(const RateReport& r);
RateReport report_from_json(const nlohmann::json& j);

std::string report_csv(const RateReport& r);
std::string report_svg(const RateReport& r);

/// Writes rate_report.{csv,json,svg} for the requested formats into dir.
/// Returns the written paths.
std::vector<std::string> emit(const RateReport& r, const std::vector<std::string>& formats, const std::string& dir);

/// Parses a CSV produced by report_csv back into ErrorStat rows.
std::vector<ErrorStat> parse_report_csv(const std::string& text);

}  // namespace levyip
