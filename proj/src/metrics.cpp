#include "levyip/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <sstream>

#include "levyip/errors.hpp"

namespace levyip {

std::string to_string(KernelCase c) { return c == KernelCase::case1 ? "case1" : "case2"; }

bool ValidationReport::ok() const {
  return std::all_of(constraints.begin(), constraints.end(), [](const Constraint& c) { return c.ok; });
}

std::vector<Constraint> ValidationReport::violations() const {
  std::vector<Constraint> out;
  std::copy_if(constraints.begin(), constraints.end(), std::back_inserter(out), [](const Constraint& c) { return !c.ok; });
  return out;
}

namespace {

Constraint less(std::string name, double lhs, double rhs) { return {std::move(name), lhs, rhs, lhs < rhs}; }
Constraint less_eq(std::string name, double lhs, double rhs) { return {std::move(name), lhs, rhs, lhs <= rhs}; }
Constraint greater(std::string name, double lhs, double rhs) { return {std::move(name), lhs, rhs, lhs > rhs}; }

}  // namespace

ValidationReport validate(const ParamTuple& t) {
  ValidationReport r;
  auto& c = r.constraints;
  const double dp = t.d / t.p;
  c.push_back({"d >= 1", t.d, 1.0, t.d >= 1.0});
  c.push_back(greater("sigma > 1", t.sigma, 1.0));
  c.push_back(less("sigma < 2", t.sigma, 2.0));
  c.push_back(greater("p > max{d/(sigma-1);2}", t.p, std::max(t.d / (t.sigma - 1.0), 2.0)));
  c.push_back(less("d/p < alpha", dp, t.alpha));
  c.push_back(less("alpha < sigma-1", t.alpha, t.sigma - 1.0));
  c.push_back(less("sigma-1 < 1", t.sigma - 1.0, 1.0));
  c.push_back(less("d/p < lambda", dp, t.lambda));
  c.push_back(less_eq("lambda <= alpha", t.lambda, t.alpha));
  c.push_back(greater("delta > 1-sigma/2", t.delta, 1.0 - 0.5 * t.sigma));
  c.push_back(greater("beta > 0", t.beta, 0.0));
  c.push_back(less("beta < 1/(2(alpha+d-d/p+delta))", t.beta, 1.0 / (2.0 * (t.alpha + t.d - dp + t.delta))));
  return r;
}

namespace {

std::string describe(const std::vector<Constraint>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    os << (i ? "; " : "") << v[i].name << " (lhs " << v[i].lhs << ", rhs " << v[i].rhs << ")";
  }
  return os.str();
}

}  // namespace

RateResult theoretical_rate(const ParamTuple& t) {
  const auto report = validate(t);
  if (!report.ok()) throw ConfigError("parameter tuple violates: " + describe(report.violations()));
  RateResult r;
  const double dp = t.d / t.p;
  r.branch1 = t.beta * (t.lambda - dp);
  r.branch2 = 0.5 * (1.0 - 2.0 * t.beta * (t.d + t.alpha - dp + t.delta));
  r.active_branch = r.branch1 <= r.branch2 ? 1 : 2;
  r.rho = std::min(r.branch1, r.branch2);
  return r;
}

CorollaryResult corollary_rate(const ParamTuple& t, double eps) {
  CorollaryResult r;
  const auto report = validate(t);
  if (!report.ok()) {
    r.failures.push_back("parameter tuple violates: " + describe(report.violations()));
    return r;
  }
  const double q = t.conjugate_p();
  const double dp = t.d / t.p;
  r.q = q;
  r.theta = (t.p - q) * (q - eps) / (q * (t.p - q + eps));
  r.r = t.alpha * (2.0 * r.theta - 1.0);
  const double qe = q - eps;
  r.p_eps = qe > 1.0 ? qe / (qe - 1.0) : std::numeric_limits<double>::infinity();
  const double denom = q * t.sigma - t.d;
  r.eps_bound = denom > 0.0 ? q - t.d * q / denom : -std::numeric_limits<double>::infinity();
  r.rho = theoretical_rate(t).rho;
  r.rho_hat = std::min(t.beta * (t.alpha - dp), r.rho * (1.0 - r.theta));

  auto& c = r.constraints;
  c.push_back(greater("eps > 0", eps, 0.0));
  c.push_back(greater("q-eps > 1", qe, 1.0));
  c.push_back(less("theta_eps < 1", r.theta, 1.0));
  c.push_back(greater("r_eps > d/p", r.r, dp));
  c.push_back(greater("d/p > d/p_eps", dp, t.d / r.p_eps));
  c.push_back(less("eps < q-dq/(q sigma-d)", eps, r.eps_bound));
  for (const auto& con : c) {
    if (!con.ok) r.failures.push_back(con.name);
  }
  if (!(r.eps_bound > 0.0)) r.failures.push_back("no admissible eps: q-dq/(q sigma-d) <= 0");
  r.applicable = r.failures.empty();
  return r;
}

Classification classify_kernel(const KernelSpec& k, const ParamTuple& t) {
  k.validate();
  Classification c;
  switch (k.family) {
    case KernelFamily::burgers_identity:
    case KernelFamily::sqg_riesz:
      c = {KernelCase::case1, t.alpha, NormKind::bessel};
      break;
    case KernelFamily::turbulence:
      if (!(k.eta > 0.0 && k.eta < t.alpha - t.d / t.p)) {
        throw ConfigError("turbulence kernel needs eta in (0, alpha - d/p) = (0, " +
                          std::to_string(t.alpha - t.d / t.p) + "), got " + std::to_string(k.eta));
      }
      c = {KernelCase::case1, t.alpha - k.eta, NormKind::bessel};
      break;
    case KernelFamily::keller_segel:
    case KernelFamily::biot_savart:
      c = {KernelCase::case2, t.alpha, NormKind::distorted};
      break;
  }
  return c;
}

nlohmann::json to_json(const Constraint& c) { return {{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"ok", c.ok}}; }

nlohmann::json to_json(const ValidationReport& r) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : r.constraints) arr.push_back(to_json(c));
  return {{"ok", r.ok()}, {"constraints", arr}};
}

nlohmann::json to_json(const RateResult& r) {
  return {{"rho", r.rho}, {"active_branch", r.active_branch}, {"branch1", r.branch1}, {"branch2", r.branch2}};
}

nlohmann::json to_json(const CorollaryResult& r) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : r.constraints) arr.push_back(to_json(c));
  auto finite = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"applicable", r.applicable}, {"q", finite(r.q)},         {"theta_eps", finite(r.theta)},
          {"r_eps", finite(r.r)},       {"p_eps", finite(r.p_eps)}, {"eps_bound", finite(r.eps_bound)},
          {"rho", finite(r.rho)},       {"rho_hat", finite(r.rho_hat)}, {"constraints", arr},
          {"failures", r.failures}};
}

}  // namespace levyip
