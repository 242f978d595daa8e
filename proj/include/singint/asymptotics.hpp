#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "singint/fields.hpp"
#include "singint/singular_integrator.hpp"

namespace singint {

struct LeadingOptions {
  std::int64_t charts_budget = 2000;   // base points
  std::int64_t slab_budget = 2000000;  // ambient samples
  /// Methods disagree when |charts - thin_slab| exceeds max(3 sigma, rel_floor |A|).
  double rel_floor = 0.005;
};

struct LeadingCoefficient {
  double A = 0.0;
  double std_error = 0.0;
  IntegralEstimate charts;
  IntegralEstimate thin_slab;
  /// |charts - thin_slab| / |A| (0 when A = 0).
  double method_agreement = 0.0;
};

/// A = int_{Sigma*} F / (|z| Gamma) dsigma by both surface-integral methods; throws
/// MethodsDisagree when they are inconsistent.
LeadingCoefficient leading_coefficient(const ProblemSpec& spec, std::uint64_t seed = 1,
                                       const LeadingOptions& opts = {});

/// 1 for d >= 3, max(1, ln(1/nu)) for d = 2.
double chi_d(int d, double nu);

enum class Regime { r_star_le_2, r_star_gt_2 };
const char* to_string(Regime r);

struct AsymptoticRow {
  double nu = 0.0;
  IntegralEstimate I_nu;
  double leading = 0.0;
  double remainder = 0.0;
  double chi_d = 1.0;
  double ratio = 0.0;
  double ratio_error = 0.0;  // one standard error of ratio
  // r* > 2 only
  double t_beta = 0.0;
  double tail = 0.0;  // tube beyond t_beta minus its leading mass
  double tail_error = 0.0;
  double tail_envelope = 0.0;  // tail / nu^{-1 + beta (M + r* + 2 - 2d)}
};

struct AsymptoticReport {
  std::vector<AsymptoticRow> rows;  // decreasing nu
  double leading_A = 0.0;
  double leading_A_error = 0.0;
  double method_agreement = 0.0;
  Regime regime = Regime::r_star_le_2;
  std::optional<double> beta;
  std::optional<double> C_beta;
  bool ratio_bounded = false;
  bool tail_bounded = true;  // |tail| stays below slack x its value at the largest nu
  bool certified() const { return ratio_bounded && tail_bounded; }
};

struct VerifyOptions {
  std::int64_t budget = 2000000;  // per nu
  LeadingOptions leading;
  IntegratorOptions integrator;
  /// Slack factor in the boundedness proxy.
  double slack = 3.0;
  /// Skip the second method for A (use charts only); for quick CLI runs.
  std::optional<double> known_A;
};

/// Geometric sweep with 5 points per decade from 1e-1 down to 1e-3 (d = 2) or 1e-2 (d >= 3).
std::vector<double> default_sweep(int d);

AsymptoticReport verify_theorem(const ProblemSpec& spec, const std::vector<double>& nu_sweep,
                                std::uint64_t seed = 1, const VerifyOptions& opts = {});

/// verify_theorem and throw RemainderUnbounded unless certified.
AsymptoticReport require_certified(const ProblemSpec& spec, const std::vector<double>& nu_sweep,
                                   std::uint64_t seed = 1, const VerifyOptions& opts = {});

/// Radial check of absolute convergence: int t^{2d-3} (F/Gamma)(t eta) dt with its tail share.
struct ConvergenceCheck {
  double total = 0.0;
  double tail_fraction = 0.0;
  double t_max = 0.0;
};
ConvergenceCheck absolute_convergence(const ProblemSpec& spec, const QuadricPoint& eta);

}  // namespace singint
