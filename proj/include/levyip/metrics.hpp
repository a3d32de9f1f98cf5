#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "levyip/spectral.hpp"

namespace levyip {

enum class KernelCase { case1, case2 };

std::string to_string(KernelCase c);

/// Analytic parameters of the convergence estimate.
struct ParamTuple {
  double d = 1.0;
  double sigma = 1.5;
  double p = 4.0;
  double alpha = 0.3;
  double lambda = 0.3;
  double beta = 0.2;
  double delta = 0.3;
  KernelCase kernel_case = KernelCase::case1;

  double conjugate_p() const { return p / (p - 1.0); }
};

/// One inequality of the standing assumptions, both sides evaluated.
struct Constraint {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};

struct ValidationReport {
  std::vector<Constraint> constraints;

  bool ok() const;
  std::vector<Constraint> violations() const;
};

/// Every constraint is listed; strict inequalities reject equality.
///   sigma in (1,2); p > max{d/(sigma-1); 2}; d/p < alpha < sigma-1 < 1;
///   d/p < lambda <= alpha; delta > 1 - sigma/2;
///   0 < beta < 1/(2(alpha + d - d/p + delta)).
ValidationReport validate(const ParamTuple& t);

struct RateResult {
  double rho = 0.0;
  int active_branch = 1;  ///< 1: beta(lambda - d/p), 2: (1 - 2 beta(d + alpha - d/p + delta))/2
  double branch1 = 0.0;
  double branch2 = 0.0;
};

/// rho = min{beta(lambda - d/p); (1 - 2 beta(d + alpha - d/p + delta))/2}.
/// Throws ConfigError when validate(t) fails.
RateResult theoretical_rate(const ParamTuple& t);

struct CorollaryResult {
  bool applicable = false;
  double q = 0.0;            ///< conjugate of p
  double theta = 0.0;        ///< (p-q)(q-eps)/(q(p-q+eps))
  double r = 0.0;            ///< alpha(2 theta - 1)
  double p_eps = 0.0;        ///< conjugate of q - eps
  double eps_bound = 0.0;    ///< q - dq/(q sigma - d)
  double rho = 0.0;
  double rho_hat = 0.0;      ///< min{beta(alpha - d/p); rho(1 - theta)}
  std::vector<Constraint> constraints;
  std::vector<std::string> failures;
};

CorollaryResult corollary_rate(const ParamTuple& t, double eps);

struct Classification {
  KernelCase kernel_case = KernelCase::case1;
  double lambda = 0.0;
  NormKind norm = NormKind::bessel;  ///< bessel (case 1) or distorted (case 2)
};

/// Case 1: burgers and sqg with lambda = alpha, turbulence with
/// lambda = alpha - eta (needs 0 < eta < alpha - d/p). Case 2: Keller-Segel
/// and Biot-Savart with lambda = alpha, distorted norm.
Classification classify_kernel(const KernelSpec& k, const ParamTuple& t);

nlohmann::json to_json(const Constraint& c);
nlohmann::json to_json(const ValidationReport& r);
nlohmann::json to_json(const RateResult& r);
nlohmann::json to_json(const CorollaryResult& r);

}  // namespace levyip
