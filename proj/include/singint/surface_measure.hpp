#pragma once

#include <cstdint>
#include <vector>

#include "singint/fields.hpp"
#include "singint/quadric_geometry.hpp"

namespace singint {

/// The measure |z|^{-1} delta_{Sigma*} on R^{2d}.
struct WeightedSurfaceMeasure {
  int d = 2;
  double sigma1_mass = 0.0;
};

/// Cached per d; the mass is the closed form of m(Sigma^1).
const WeightedSurfaceMeasure& surface_measure(int d);

/// Mass of {r <= |z| < R}: m(Sigma^1) (R^{2d-2} - r^{2d-2}) / (2d - 2).
double ball_mass(int d, double r, double R);

/// sup |f| <z>^m, estimated on rays through the origin.
double weighted_sup_norm(const ScalarField& f, double m_norm);

/// sum over unit annuli of sup <z>^{-m} times their mass, plus a tail bound; finite for m > 2d-2.
double functional_constant(int d, double m_norm);

struct MeasureIntegral {
  IntegralEstimate value;
  double bound = 0.0;
  double f_norm = 0.0;
  double C3 = 0.0;
};

/// int f d mu via the charts surface integral of f / |z|, with bound C3 |f|_m. Throws
/// NormExponentTooSmall for m <= 2d - 2 and BoundViolated if |value| > bound + 3 sigma.
MeasureIntegral integrate_measure(const ScalarField& f, double m_norm,
                                  std::int64_t budget = 2000, std::uint64_t seed = 1);

struct WeakConvergenceRow {
  double nu = 0.0;
  double lhs = 0.0;  // nu I_nu(f, Gamma)
  double lhs_error = 0.0;
  double limit = 0.0;  // pi int (f / Gamma) d mu
  double limit_error = 0.0;
  double gap = 0.0;
};

struct WeakConvergenceReport {
  std::vector<WeakConvergenceRow> rows;
  bool final_within_tolerance = false;  // gap <= max(3 sigma, 5% |limit|) at the smallest nu
  bool decreasing = false;              // final gap <= first gap + 3 sigma
};

/// nu / ((x.y)^2 + (nu Gamma)^2) -> pi Gamma^{-1} |z|^{-1} delta_{Sigma*} tested against a
/// compactly supported f.
WeakConvergenceReport weak_convergence_check(const WeightField& gamma, const ScalarField& f,
                                             const std::vector<double>& nu_sweep,
                                             std::int64_t budget = 2000000,
                                             std::uint64_t seed = 1);

}  // namespace singint
