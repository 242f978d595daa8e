#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "singint/fields.hpp"
#include "singint/quadric_geometry.hpp"

namespace singint {

// ---- d = 1: the cross {xy = 0} in R^2 -------------------------------------------------------

struct ContourResult {
  double value = 0.0;  // sum of per_ray
  std::array<double, 4> per_ray{};
};

struct D1Row {
  double nu = 0.0;
  double I_nu = 0.0;
  double leading = 0.0;
  double remainder = 0.0;
  double ratio = 0.0;  // |remainder|
};

struct D1Report {
  ContourResult contour;  // int over each ray of F / (t Gamma) dt
  std::vector<D1Row> rows;
  bool bounded = false;  // max ratio <= slack x ratio at the largest nu
};

/// Rays C1..C4 point along +x, +y, -x, -y.
ContourResult contour_integral(const ScalarField& F, const WeightField& Gamma);

/// I'_nu = int_{R^2} F / ((xy)^2 + (nu Gamma)^2) by nested deterministic quadrature on the four
/// cones |theta| < 1 around the rays, z = t (e_k + theta n_k).
double d1_integral(const ScalarField& F, const WeightField& Gamma, double nu,
                   double rel_tol = 1e-10);

/// Throws SupportTouchesOrigin unless F vanishes on a ball around 0.
D1Report d1_contour(const ScalarField& F, const WeightField& Gamma,
                    const std::vector<double>& nu_sweep, double slack = 3.0);

// ---- linear divisor x.y + i nu Gamma ---------------------------------------------------------

struct ComplexEstimate {
  double re = 0.0;
  double re_error = 0.0;
  double im = 0.0;
  double im_error = 0.0;

  std::complex<double> value() const { return {re, im}; }
};

struct LinearDivisorRow {
  double nu = 0.0;
  ComplexEstimate estimate;  // I'_nu = int F / (x.y + i nu Gamma)
  ComplexEstimate limit;     // PV int F / (x.y) - i pi int F / |z| dsigma
  bool converged = false;    // component-wise within max(3 sigma, 5% |limit|)
};

struct LinearDivisorReport {
  std::vector<LinearDivisorRow> rows;
  double surface_term = 0.0;  // S = int F / |z| dsigma
  double surface_term_error = 0.0;
  ComplexEstimate pv;  // principal-value term (real)
};

struct LinearDivisorOptions {
  std::int64_t budget = 2000000;  // per nu for I'_nu, and for the PV term
  double theta0 = kDefaultTheta0;
  /// Half-width of the tube used for the symmetric pairing in the PV term.
  double theta_pv = 0.5;
  int t_strata = 128;
};

/// Principal value PV int F / (x.y) dz: symmetric theta pairing inside |theta| < theta_pv,
/// plain Monte Carlo outside. Throws PVNonConvergent if the paired estimate is not finite.
ComplexEstimate principal_value(const ProblemSpec& spec, std::int64_t budget, std::uint64_t seed,
                                const LinearDivisorOptions& opts = {});

/// I'_nu with the tube fibers integrated through the complex-log primitive of the frozen
/// integrand plus a Monte Carlo correction.
ComplexEstimate linear_divisor_integral(const ProblemSpec& spec, double nu, std::int64_t budget,
                                        std::uint64_t seed, const LinearDivisorOptions& opts = {});

LinearDivisorReport linear_divisor(const ProblemSpec& spec, const std::vector<double>& nu_sweep,
                                   std::uint64_t seed = 1, const LinearDivisorOptions& opts = {});

// ---- sphere quadric |z|^2 - |k|^2 / 4 in R^d --------------------------------------------------

struct SphereRow {
  double nu = 0.0;
  double I_nu = 0.0;
  double leading = 0.0;
  double remainder = 0.0;
  double ratio = 0.0;
};

struct SphereReport {
  double radius = 0.0;
  /// int_Sigma F / Gamma dsigma over the sphere |z| = radius.
  double surface_integral = 0.0;
  /// lim nu I'_nu = pi int_Sigma F / (Gamma |grad omega|) dsigma, |grad omega| = 2 radius.
  double leading_coefficient = 0.0;
  std::vector<SphereRow> rows;
  bool bounded = false;
};

/// int_{S_R} F / Gamma dsigma by product Gauss rules (d = 2, 3).
double sphere_surface_integral(const ScalarField& F, const WeightField& Gamma, double radius,
                               int n_angle = 64);

/// I'_nu = int_{R^d} F / ((|z|^2 - R^2)^2 + (nu Gamma)^2) dz, radial-angular quadrature.
double sphere_integral(const ScalarField& F, const WeightField& Gamma, double radius, double nu,
                       int n_angle = 64);

SphereReport sphere_quadric(const ScalarField& F, const WeightField& Gamma, double k_mod,
                            const std::vector<double>& nu_sweep, double slack = 3.0);

// ---- kinetic kernel ---------------------------------------------------------------------------

/// F_k(k1, k2, k3) on (R^d)^3 with the decay of (x, y) -> F_k(x + k, y + k, x + y + k).
struct KineticIntegrand {
  int d = 2;
  std::function<double(std::span<const double>, std::span<const double>, std::span<const double>)>
      fn;
  double decay_M = 0.0;
};

/// Separable Gaussian exp(-|k1 - k|^2 - |k2 - k|^2) around the given k.
KineticIntegrand separable_gaussian_kinetic(std::span<const double> k);

/// int_{Sigma*} F~ / |z| dsigma with F~(x, y) = F_k(x + k, y + k, x + y + k). The resonant
/// delta(-2 x.y) of the kinetic kernel carries a further factor 1/2, not applied here.
/// Throws DecayInsufficient when decay_M <= 2d - 2.
IntegralEstimate kinetic_kernel_demo(const KineticIntegrand& Fk, std::span<const double> k,
                                     std::int64_t budget, std::uint64_t seed = 1,
                                     SurfaceMethod method = SurfaceMethod::charts);

}  // namespace singint
