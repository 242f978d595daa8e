#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "singint/common.hpp"
#include "singint/fields.hpp"
#include "singint/quadric_geometry.hpp"

namespace singint {

struct IntegratorOptions {
  double theta0 = kDefaultTheta0;
  /// Fractions of the budget spent on the tube, exterior and origin strata.
  double tube_fraction = 0.4;
  double exterior_fraction = 0.5;
  int tube_strata = 256;
  int exterior_strata = 64;
  /// Upper radius of the base point; 0 picks it from the decay of F / Gamma.
  double t_max = 0.0;
  /// Optional base radius at which the tube stratum is split; the outer part is reported
  /// as the "tube_tail" entry.
  std::optional<double> t_split;
  /// If > 0, rounds are added until std_error <= target_rel_error |value| or max_budget.
  double target_rel_error = 0.0;
  std::int64_t max_budget = 0;
};

/// Origin-ball radius max(2 nu, 1e-2).
double origin_radius(double nu);

enum class Stratum { origin, tube, exterior };
const char* to_string(Stratum s);

/// Stratum membership used by evaluate_I_nu: |z| <= delta0, else |theta| < theta0, else exterior.
Stratum classify_stratum(const AmbientPoint& z, double delta0, double theta0 = kDefaultTheta0);

/// Radius beyond which F / Gamma is negligible (probed along random rays; the support radius
/// when F is compactly supported).
double radial_cutoff(const ProblemSpec& spec);

/// I_nu = int F / ((x.y)^2 + (nu Gamma)^2) dz by stratified importance sampling.
IntegralEstimate evaluate_I_nu(const ProblemSpec& spec, double nu, std::int64_t budget,
                               std::uint64_t seed, const IntegratorOptions& opts = {});

struct NearOriginResult {
  double bound = 0.0;
  IntegralEstimate empirical;
  double C1 = 0.0;  // max |F| on K_delta (with margin)
  double C = 0.0;   // min Gamma on K_delta (with margin)
};

/// Bound C nu^{-1} delta^{2d-2} on the integral over K_delta = {|x| <= delta, |y| <= delta},
/// with the constant from freezing F and Gamma at their extremes and integrating 1/(rho y_1)^2
/// exactly along y_1. Throws BoundViolated if the Monte Carlo value exceeds it.
NearOriginResult near_origin_bound(const ProblemSpec& spec, double nu, double delta,
                                   std::int64_t budget = 200000, std::uint64_t seed = 1);

struct FiberDiagnostics {
  QuadricPoint eta;
  double t = 0.0;
  double epsilon = 0.0;
  double theta_bar_0 = 0.0;
  double J_nu = 0.0;
  double J_0m = 0.0;
  double J_leading = 0.0;
  int levels = 0;
  int evaluations = 0;
};

struct FiberOptions {
  double theta0 = kDefaultTheta0;
  double rel_tol = 1e-8;
  /// Drop the part of the fiber inside |z| <= exclude_radius (matches the tube stratum).
  double exclude_radius = 0.0;
};

/// theta-integral J_nu(eta, t) of F mu / (t^4 theta^2 + (nu Gamma)^2) and its frozen forms.
FiberDiagnostics fiber_integral(const ProblemSpec& spec, double nu, const QuadricPoint& eta,
                                double t, const FiberOptions& opts = {});

}  // namespace singint
