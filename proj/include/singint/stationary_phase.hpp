#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "singint/fields.hpp"

namespace singint {

using HessFn = std::function<void(std::span<const double>, std::span<double>)>;  // row-major n x n

/// phi e^{i lambda g} on R^n with a single non-degenerate critical point x0 of g.
struct PhaseProblem {
  int n = 1;
  ScalarField phi;
  /// Integration box [-R, R]^n containing the (effective) support of phi.
  double box_half_width = 1.0;
  FieldFn g;
  GradFn grad;     // optional: central differences otherwise
  HessFn hessian;  // optional: central differences with step 1e-4 otherwise
  std::vector<double> x0;
  /// Declared bound C^{-1} <= |det g_xx(x0)| <= C.
  double hess_C = 10.0;
};

/// g(x) = |x|^2 / 2 - shift, critical point 0.
PhaseProblem quadratic_phase_problem(const ScalarField& phi, double box_half_width,
                                     double shift = 0.0);
/// Same problem with phase -g.
PhaseProblem negated_phase(const PhaseProblem& p);

struct OscillatoryOptions {
  double nodes_per_wavelength = 20.0;
  std::int64_t max_nodes = 400000000;
};

struct OscillatoryResult {
  std::complex<double> value;
  double truncation_estimate = 0.0;  // |fine - half-resolution|
  std::vector<int> nodes_per_axis;
};

/// int phi e^{i lambda g} dx by tensor composite Gauss-Legendre with panel widths tied to the
/// local wavelength along each axis. Throws ResolutionExceeded when the grid is too large.
OscillatoryResult oscillatory_integral(const PhaseProblem& p, double lambda,
                                       const OscillatoryOptions& opts = {});

/// Hessian of g at x (analytic when supplied).
std::vector<double> phase_hessian(const PhaseProblem& p, std::span<const double> x);

struct HessianInfo {
  double det = 0.0;
  int signature = 0;
};

/// Determinant and signature from the eigenvalues; throws DegenerateHessian when an eigenvalue
/// is below 1e-8 ||H||.
HessianInfo hessian_info(const PhaseProblem& p);

/// (2 pi / lambda)^{n/2} |det g_xx|^{-1/2} phi(x0) e^{i lambda g(x0) + i pi sgn / 4}.
std::complex<double> stationary_phase_leading(const PhaseProblem& p, double lambda);

struct ResolventRow {
  double nu = 0.0;
  std::complex<double> I;  // nu int f / (nu Gamma + i g)
  double abs_I = 0.0;
  double bound_ratio = 0.0;  // |I| / (nu chi(nu))
  // Laplace-in-t split: I1 over t in [-nu, 0], I2 over [-40 / Gamma, -nu]
  std::complex<double> I1;
  std::complex<double> I2;
  double I1_bound = 0.0;  // nu int |f|
};

struct ResolventReport {
  std::vector<ResolventRow> rows;
  bool bounded = false;
  bool laplace_consistent = false;  // |I - (I1 + I2)| small and |I1| <= I1_bound everywhere
};

/// Throws CriticalPointOnSupportBoundary when x0 sits on the edge of supp f.
ResolventReport resolvent_bound_check(const ScalarField& f, const PhaseProblem& phase,
                                      double gamma_const, const std::vector<double>& nu_sweep,
                                      double slack = 3.0);

}  // namespace singint
