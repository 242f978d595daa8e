#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "singint/common.hpp"

namespace singint {

using FieldFn = std::function<double(std::span<const double>)>;
using GradFn = std::function<void(std::span<const double>, std::span<double>)>;
using Params = std::map<std::string, double>;

/// Real function on R^dim with decay metadata |F(z)| <= K <z>^{-M}.
struct ScalarField {
  std::string name;
  int dim = 0;
  FieldFn eval;
  GradFn grad;  // empty: central differences with step 1e-5 <z>
  double decay_M = 0.0;
  double bound_K = 1.0;
  std::optional<double> support_radius;        // F = 0 for |z| >= support_radius
  std::optional<double> support_inner_radius;  // F = 0 for |z| <= support_inner_radius

  double operator()(std::span<const double> z) const { return eval(z); }
  void gradient(std::span<const double> z, std::span<double> out) const;
  bool compactly_supported() const { return support_radius.has_value(); }
};

/// Strictly positive function on R^dim with K^{-1} <z>^{r*} <= Gamma(z) <= K <z>^{r*}.
struct WeightField {
  std::string name;
  int dim = 0;
  FieldFn eval;
  double growth_r_star = 0.0;
  double bound_K = 1.0;
  /// Set for weights independent of z; lets integrators skip evaluations.
  std::optional<double> constant_value;

  double operator()(std::span<const double> z) const { return eval(z); }
};

struct ProblemSpec {
  ScalarField F;
  WeightField Gamma;
  int d = 2;

  ProblemSpec() = default;
  ProblemSpec(ScalarField f, WeightField g);
};

using CatalogField = std::variant<ScalarField, WeightField>;

/// Built-in catalog: gaussian{M}, poly_decay{p}, bump_annulus{r1,r2} (scalar fields) and
/// const{c}, poly_growth{r} (weights). `dim` is the number of coordinates.
CatalogField catalog_lookup(const std::string& name, const Params& params, int dim);
ScalarField catalog_scalar(const std::string& name, const Params& params, int dim);
WeightField catalog_weight(const std::string& name, const Params& params, int dim);

ScalarField gaussian_field(int dim, double decay_M = 4.0);
ScalarField poly_decay_field(int dim, double p);
ScalarField bump_annulus_field(int dim, double r1, double r2, double decay_M = 8.0);
ScalarField zero_field(int dim);
WeightField const_weight(int dim, double c = 1.0);
WeightField poly_growth_weight(int dim, double r);

/// Smooth bump exp(1 - 1/(1 - |z - center|^2/R^2)) supported in the ball of radius R.
ScalarField ball_bump_field(std::span<const double> center, double radius);
/// c * F with the metadata rescaled.
ScalarField scaled(const ScalarField& f, double c);
/// F * G for a bounded G; K is refitted.
ScalarField product(const ScalarField& f, const FieldFn& g, const std::string& name);

/// Radial profile of the annulus bump as a function of r = |z|.
double bump_annulus_profile(double r, double r1, double r2);

struct BoundProbe {
  double worst_ratio = 0.0;  // max of (observed / allowed); <= 1 means the bound holds
  std::vector<double> worst_point;
};

/// Max over probe points of |F(z)| <z>^{M} / K.
BoundProbe probe_scalar_bound(const ScalarField& f, const std::vector<std::vector<double>>& pts);
/// Max over probe points of Gamma/(K <z>^{r}) and of K^{-1} <z>^{r}/Gamma.
BoundProbe probe_weight_upper(const WeightField& g, const std::vector<std::vector<double>>& pts);
BoundProbe probe_weight_lower(const WeightField& g, const std::vector<std::vector<double>>& pts);

/// n_per_shell random points with <z> uniform in [2^j, 2^{j+1}], j = 0..10, plus the origin.
std::vector<std::vector<double>> shell_probe_points(int dim, int n_per_shell, std::uint64_t seed);

struct ValidationReport {
  bool f_bound_ok = true;
  bool gamma_lower_ok = true;
  bool gamma_upper_ok = true;
  bool hr_ok = true;
  std::optional<std::vector<double>> first_violation;
  std::string message;

  bool pass() const { return f_bound_ok && gamma_lower_ok && gamma_upper_ok && hr_ok; }
};

ValidationReport validate(const ProblemSpec& spec, int n_probe = 200, std::uint64_t seed = 7);
/// validate() and throw FieldUnbounded / ConditionHrViolated on failure.
void require_valid(const ProblemSpec& spec, int n_probe = 200, std::uint64_t seed = 7);

/// Exponent condition M + r* > 2d - 2 and M > 2d - 4.
bool condition_hr(double M, double r_star, int d);

}  // namespace singint
