#include <fstream>
#include <sstream>

#include "levyip/errors.hpp"
#include "levyip/harness.hpp"

namespace levyip {

namespace {

using nlohmann::json;

const json& section(const json& doc, const char* name) {
  if (!doc.contains(name) || !doc.at(name).is_object()) {
    throw ConfigError(std::string("configuration is missing section '") + name + "'");
  }
  return doc.at(name);
}

template <typename T>
T field(const json& sec, const char* name, const char* where) {
  if (!sec.contains(name)) throw ConfigError(std::string("missing field '") + where + "." + name + "'");
  try {
    return sec.at(name).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + where + "." + name + "': " + e.what());
  }
}

template <typename T>
T field_or(const json& sec, const char* name, T fallback, const char* where) {
  if (!sec.contains(name) || sec.at(name).is_null()) return fallback;
  return field<T>(sec, name, where);
}

}  // namespace

ExperimentPlan plan_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  ExperimentPlan plan;

  const auto& levy = section(doc, "levy");
  plan.model.levy.sigma = field<double>(levy, "sigma", "levy");
  plan.model.levy.dim = field<int>(levy, "dim", "levy");
  plan.model.levy.variant = noise_variant_from_string(field_or<std::string>(levy, "variant", "isotropic", "levy"));

  const auto& kernel = section(doc, "kernel");
  plan.model.kernel.family = kernel_family_from_string(field<std::string>(kernel, "family", "kernel"));
  plan.model.kernel.eta = field_or<double>(kernel, "eta", 0.0, "kernel");
  plan.model.kernel.attraction = field_or<double>(kernel, "attraction", 1.0, "kernel");

  plan.model.beta = field<double>(section(doc, "mollifier"), "beta", "mollifier");

  if (doc.contains("clip")) {
    const auto& clip = section(doc, "clip");
    if (clip.contains("level_velocity") && !clip.at("level_velocity").is_null()) {
      plan.model.clip = ClipConfig{field<double>(clip, "level_velocity", "clip")};
    }
    plan.clip_safety = field_or<double>(clip, "safety_factor", 1.05, "clip");
  }

  const auto& grid = section(doc, "grid");
  plan.model.grid.dim = plan.model.levy.dim;
  plan.model.grid.n = field<int>(grid, "n_points", "grid");
  plan.model.grid.box_len = field<double>(grid, "box_length", "grid");

  if (doc.contains("pde")) {
    const auto& pde = section(doc, "pde");
    plan.pde_grid_refinement = field_or<int>(pde, "grid_refinement", 2, "pde");
    plan.pde_dt_refinement = field_or<int>(pde, "dt_refinement", 4, "pde");
    plan.dealias = field_or<bool>(pde, "dealias", true, "pde");
  }

  const auto& p = section(doc, "plan");
  plan.particle_counts = field<std::vector<std::size_t>>(p, "N_list", "plan");
  plan.replicas = field<std::size_t>(p, "replicas", "plan");
  plan.observation_times = field<std::vector<double>>(p, "observe_at_time", "plan");
  plan.dt = field<double>(p, "dt_time", "plan");
  plan.horizon = field<double>(p, "horizon_time", "plan");
  plan.seed = field_or<std::uint64_t>(p, "seed", 0, "plan");
  plan.threads = field_or<unsigned>(p, "threads", 1u, "plan");
  plan.output_dir = field_or<std::string>(p, "output_dir", "out", "plan");
  plan.corollary_eps = field_or<double>(p, "corollary_eps", 0.05, "plan");

  const auto& params = section(p, "params");
  plan.params.p = field<double>(params, "p", "plan.params");
  plan.params.alpha = field<double>(params, "alpha", "plan.params");
  plan.params.delta = field<double>(params, "delta", "plan.params");
  plan.params.lambda = field_or<double>(params, "lambda", std::numeric_limits<double>::quiet_NaN(), "plan.params");

  const auto& initial = section(p, "initial");
  if (!initial.contains("bumps") || !initial.at("bumps").is_array()) throw ConfigError("plan.initial.bumps must be a list");
  for (const auto& b : initial.at("bumps")) {
    GaussianBump bump;
    const auto center = field<std::vector<double>>(b, "center_length", "plan.initial.bumps[]");
    bump.center = Point::Map(center.data(), static_cast<Eigen::Index>(center.size()));
    bump.width = field<double>(b, "width_length", "plan.initial.bumps[]");
    bump.weight = field_or<double>(b, "weight", 1.0, "plan.initial.bumps[]");
    plan.initial.push_back(bump);
  }
  plan.validate();
  return plan;
}

ExperimentPlan load_plan(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open configuration '" + path + "'");
  std::stringstream buf;
  buf << is.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("configuration '" + path + "' is not valid JSON: " + e.what());
  }
  return plan_from_json(doc);
}

}  // namespace levyip
