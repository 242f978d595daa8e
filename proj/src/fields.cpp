#include "singint/fields.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "singint/parallel.hpp"

namespace singint {

namespace {

constexpr double kTinyMargin = 1.0 + 1e-9;
constexpr double kFitMargin = 1.1;

// sup over r in [0, 1e3] of |profile(r)| <r>^M on a dense grid, with a 10% margin.
double fit_radial_K(const std::function<double(double)>& profile, double M) {
  double sup = 0.0;
  const int n = 20000;
  for (int i = 0; i <= n; ++i) {
    // quadratic spacing: dense near the origin where profiles vary most
    const double s = static_cast<double>(i) / n;
    const double r = 1e3 * s * s;
    sup = std::max(sup, std::abs(profile(r)) * std::pow(japanese_bracket(r), M));
  }
  return std::max(kFitMargin * sup, kTinyMargin);
}

double get_param(const Params& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

double require_param(const Params& p, const std::string& key, const std::string& field) {
  auto it = p.find(key);
  if (it == p.end()) throw Error(ErrorCode::BadParams, field + " needs parameter '" + key + "'");
  return it->second;
}

void check_keys(const Params& p, std::initializer_list<const char*> allowed,
                const std::string& field) {
  for (const auto& [k, v] : p) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw Error(ErrorCode::BadParams, field + ": unknown parameter '" + k + "'");
    if (!std::isfinite(v)) throw Error(ErrorCode::BadParams, field + ": non-finite '" + k + "'");
  }
}

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxAmbientDim) throw Error(ErrorCode::BadParams, "dimension out of range");
}

}  // namespace

void ScalarField::gradient(std::span<const double> z, std::span<double> out) const {
  if (grad) {
    grad(z, out);
    return;
  }
  const double h = 1e-5 * japanese_bracket(norm(z));
  std::array<double, kMaxAmbientDim> w{};
  std::copy(z.begin(), z.end(), w.begin());
  std::span<const double> ws(w.data(), z.size());
  for (size_t i = 0; i < z.size(); ++i) {
    const double zi = w[i];
    w[i] = zi + h;
    const double fp = eval(ws);
    w[i] = zi - h;
    const double fm = eval(ws);
    w[i] = zi;
    out[i] = (fp - fm) / (2.0 * h);
  }
}

ProblemSpec::ProblemSpec(ScalarField f, WeightField g) : F(std::move(f)), Gamma(std::move(g)) {
  if (F.dim != Gamma.dim || F.dim % 2 != 0)
    throw Error(ErrorCode::BadParams, "F and Gamma must live on the same even-dimensional space");
  d = F.dim / 2;
}

ScalarField gaussian_field(int dim, double decay_M) {
  check_dim(dim);
  if (!(decay_M >= 0.0)) throw Error(ErrorCode::BadParams, "gaussian: M must be >= 0");
  ScalarField f;
  f.name = "gaussian";
  f.dim = dim;
  f.eval = [](std::span<const double> z) { return std::exp(-dot(z, z)); };
  f.grad = [](std::span<const double> z, std::span<double> out) {
    const double e = -2.0 * std::exp(-dot(z, z));
    for (size_t i = 0; i < z.size(); ++i) out[i] = e * z[i];
  };
  f.decay_M = decay_M;
  f.bound_K = fit_radial_K([](double r) { return std::exp(-r * r); }, decay_M);
  return f;
}

ScalarField poly_decay_field(int dim, double p) {
  check_dim(dim);
  if (!(p > 0.0)) throw Error(ErrorCode::BadParams, "poly_decay: p must be > 0");
  ScalarField f;
  f.name = "poly_decay";
  f.dim = dim;
  f.eval = [p](std::span<const double> z) { return std::pow(1.0 + dot(z, z), -0.5 * p); };
  f.grad = [p](std::span<const double> z, std::span<double> out) {
    const double s = 1.0 + dot(z, z);
    const double c = -p * std::pow(s, -0.5 * p - 1.0);
    for (size_t i = 0; i < z.size(); ++i) out[i] = c * z[i];
  };
  f.decay_M = p;
  f.bound_K = kTinyMargin;
  return f;
}

double bump_annulus_profile(double r, double r1, double r2) {
  if (r <= r1 || r >= r2) return 0.0;
  const double s = (2.0 * r - r1 - r2) / (r2 - r1);
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

ScalarField bump_annulus_field(int dim, double r1, double r2, double decay_M) {
  check_dim(dim);
  if (!(r1 >= 0.0 && r2 > r1)) throw Error(ErrorCode::BadParams, "bump_annulus: need 0 <= r1 < r2");
  ScalarField f;
  f.name = "bump_annulus";
  f.dim = dim;
  f.eval = [r1, r2](std::span<const double> z) { return bump_annulus_profile(norm(z), r1, r2); };
  f.grad = [r1, r2](std::span<const double> z, std::span<double> out) {
    const double r = norm(z);
    std::fill(out.begin(), out.end(), 0.0);
    if (r <= r1 || r >= r2) return;
    const double s = (2.0 * r - r1 - r2) / (r2 - r1);
    const double q = 1.0 - s * s;
    const double dfdr = bump_annulus_profile(r, r1, r2) * (-2.0 * s / (q * q)) * 2.0 / (r2 - r1);
    for (size_t i = 0; i < z.size(); ++i) out[i] = dfdr * z[i] / r;
  };
  f.decay_M = decay_M;
  f.bound_K = fit_radial_K([r1, r2](double r) { return bump_annulus_profile(r, r1, r2); }, decay_M);
  f.support_radius = r2;
  if (r1 > 0.0) f.support_inner_radius = r1;
  return f;
}

ScalarField zero_field(int dim) {
  check_dim(dim);
  ScalarField f;
  f.name = "zero";
  f.dim = dim;
  f.eval = [](std::span<const double>) { return 0.0; };
  f.grad = [](std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  f.decay_M = 64.0;
  f.bound_K = kTinyMargin;
  f.support_radius = 1.0;
  return f;
}

WeightField const_weight(int dim, double c) {
  check_dim(dim);
  if (!(c > 0.0)) throw Error(ErrorCode::BadParams, "const: c must be > 0");
  WeightField g;
  g.name = "const";
  g.dim = dim;
  g.eval = [c](std::span<const double>) { return c; };
  g.growth_r_star = 0.0;
  g.bound_K = std::max(c, 1.0 / c) * kTinyMargin;
  g.constant_value = c;
  return g;
}

WeightField poly_growth_weight(int dim, double r) {
  check_dim(dim);
  WeightField g;
  g.name = "poly_growth";
  g.dim = dim;
  if (r == 2.0) {
    g.eval = [](std::span<const double> z) { return 1.0 + dot(z, z); };
  } else if (r == 4.0) {
    g.eval = [](std::span<const double> z) {
      const double s = 1.0 + dot(z, z);
      return s * s;
    };
  } else {
    g.eval = [r](std::span<const double> z) { return std::pow(1.0 + dot(z, z), 0.5 * r); };
  }
  g.growth_r_star = r;
  g.bound_K = kTinyMargin;
  return g;
}

ScalarField ball_bump_field(std::span<const double> center, double radius) {
  const int dim = static_cast<int>(center.size());
  check_dim(dim);
  if (!(radius > 0.0)) throw Error(ErrorCode::BadParams, "ball bump: radius must be > 0");
  std::vector<double> c(center.begin(), center.end());
  ScalarField f;
  f.name = "ball_bump";
  f.dim = dim;
  f.eval = [c, radius](std::span<const double> z) {
    double s2 = 0.0;
    for (size_t i = 0; i < z.size(); ++i) s2 += (z[i] - c[i]) * (z[i] - c[i]);
    s2 /= radius * radius;
    return s2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s2)) : 0.0;
  };
  f.decay_M = 8.0;
  const double far = norm(c) + radius;
  f.bound_K = kFitMargin * std::pow(japanese_bracket(far), f.decay_M);
  f.support_radius = far;
  return f;
}

ScalarField scaled(const ScalarField& f, double c) {
  ScalarField out = f;
  out.name = f.name + "*c";
  auto e = f.eval;
  out.eval = [e, c](std::span<const double> z) { return c * e(z); };
  if (f.grad) {
    auto g = f.grad;
    out.grad = [g, c](std::span<const double> z, std::span<double> o) {
      g(z, o);
      for (double& v : o) v *= c;
    };
  }
  out.bound_K = std::max(std::abs(c) * f.bound_K, kTinyMargin);
  return out;
}

ScalarField product(const ScalarField& f, const FieldFn& g, const std::string& name) {
  ScalarField out = f;
  out.name = name;
  auto e = f.eval;
  out.eval = [e, g](std::span<const double> z) {
    const double a = e(z);
    return a == 0.0 ? 0.0 : a * g(z);
  };
  out.grad = nullptr;
  // refit K on the probe shells
  const auto pts = shell_probe_points(f.dim, 200, 11);
  double sup = 0.0;
  for (const auto& p : pts)
    sup = std::max(sup, std::abs(out.eval(p)) * std::pow(japanese_bracket(norm(p)), f.decay_M));
  out.bound_K = std::max(kFitMargin * sup, kTinyMargin);
  return out;
}

CatalogField catalog_lookup(const std::string& name, const Params& params, int dim) {
  if (name == "gaussian") {
    check_keys(params, {"M"}, name);
    return gaussian_field(dim, get_param(params, "M", 4.0));
  }
  if (name == "poly_decay") {
    check_keys(params, {"p"}, name);
    return poly_decay_field(dim, require_param(params, "p", name));
  }
  if (name == "bump_annulus") {
    check_keys(params, {"r1", "r2", "M"}, name);
    return bump_annulus_field(dim, require_param(params, "r1", name),
                              require_param(params, "r2", name), get_param(params, "M", 8.0));
  }
  if (name == "const") {
    check_keys(params, {"c"}, name);
    return const_weight(dim, get_param(params, "c", 1.0));
  }
  if (name == "poly_growth") {
    check_keys(params, {"r"}, name);
    return poly_growth_weight(dim, require_param(params, "r", name));
  }
  throw Error(ErrorCode::UnknownField, "no catalog field named '" + name + "'");
}

ScalarField catalog_scalar(const std::string& name, const Params& params, int dim) {
  auto f = catalog_lookup(name, params, dim);
  if (auto* s = std::get_if<ScalarField>(&f)) return *s;
  throw Error(ErrorCode::UnknownField, "'" + name + "' is a weight, not an integrand");
}

WeightField catalog_weight(const std::string& name, const Params& params, int dim) {
  auto f = catalog_lookup(name, params, dim);
  if (auto* w = std::get_if<WeightField>(&f)) return *w;
  throw Error(ErrorCode::UnknownField, "'" + name + "' is an integrand, not a weight");
}

std::vector<std::vector<double>> shell_probe_points(int dim, int n_per_shell, std::uint64_t seed) {
  std::vector<std::vector<double>> pts;
  pts.reserve(11 * n_per_shell + 1);
  pts.emplace_back(dim, 0.0);
  Rng rng = make_rng(seed, 0x5e11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> dir(dim);
  for (int j = 0; j <= 10; ++j) {
    const double lo = std::ldexp(1.0, j);
    for (int i = 0; i < n_per_shell; ++i) {
      const double br = lo * (1.0 + unif(rng));
      const double r = std::sqrt(std::max(br * br - 1.0, 0.0));
      uniform_on_sphere(rng, dir);
      std::vector<double> p(dim);
      for (int k = 0; k < dim; ++k) p[k] = r * dir[k];
      pts.push_back(std::move(p));
    }
  }
  return pts;
}

BoundProbe probe_scalar_bound(const ScalarField& f, const std::vector<std::vector<double>>& pts) {
  BoundProbe out;
  for (const auto& p : pts) {
    const double v = f.eval(p);
    if (!std::isfinite(v)) {
      out.worst_ratio = INFINITY;
      out.worst_point = p;
      return out;
    }
    const double ratio = std::abs(v) * std::pow(japanese_bracket(norm(p)), f.decay_M) / f.bound_K;
    if (ratio > out.worst_ratio) {
      out.worst_ratio = ratio;
      out.worst_point = p;
    }
  }
  return out;
}

BoundProbe probe_weight_upper(const WeightField& g, const std::vector<std::vector<double>>& pts) {
  BoundProbe out;
  for (const auto& p : pts) {
    const double ratio =
        std::abs(g.eval(p)) / (g.bound_K * std::pow(japanese_bracket(norm(p)), g.growth_r_star));
    if (!(ratio <= out.worst_ratio)) {
      out.worst_ratio = ratio;
      out.worst_point = p;
    }
  }
  return out;
}

BoundProbe probe_weight_lower(const WeightField& g, const std::vector<std::vector<double>>& pts) {
  BoundProbe out;
  for (const auto& p : pts) {
    const double v = g.eval(p);
    const double ratio = v > 0.0 ? std::pow(japanese_bracket(norm(p)), g.growth_r_star) /
                                       (g.bound_K * v)
                                 : INFINITY;
    if (!(ratio <= out.worst_ratio)) {
      out.worst_ratio = ratio;
      out.worst_point = p;
    }
  }
  return out;
}

bool condition_hr(double M, double r_star, int d) {
  return M + r_star > 2.0 * d - 2.0 && M > 2.0 * d - 4.0;
}

ValidationReport validate(const ProblemSpec& spec, int n_probe, std::uint64_t seed) {
  ValidationReport rep;
  const auto pts = shell_probe_points(spec.F.dim, n_probe, seed);
  const auto pf = probe_scalar_bound(spec.F, pts);
  const auto pu = probe_weight_upper(spec.Gamma, pts);
  const auto pl = probe_weight_lower(spec.Gamma, pts);
  rep.f_bound_ok = pf.worst_ratio <= 1.0;
  rep.gamma_upper_ok = pu.worst_ratio <= 1.0;
  rep.gamma_lower_ok = pl.worst_ratio <= 1.0;
  rep.hr_ok = condition_hr(spec.F.decay_M, spec.Gamma.growth_r_star, spec.d);
  if (!rep.f_bound_ok) {
    rep.first_violation = pf.worst_point;
    rep.message = "F exceeds K<z>^-M";
  } else if (!rep.gamma_upper_ok) {
    rep.first_violation = pu.worst_point;
    rep.message = "Gamma exceeds K<z>^r*";
  } else if (!rep.gamma_lower_ok) {
    rep.first_violation = pl.worst_point;
    rep.message = "Gamma below K^-1<z>^r*";
  } else if (!rep.hr_ok) {
    rep.message = "need M + r* > 2d - 2 and M > 2d - 4";
  }
  return rep;
}

void require_valid(const ProblemSpec& spec, int n_probe, std::uint64_t seed) {
  const auto rep = validate(spec, n_probe, seed);
  if (!rep.f_bound_ok || !rep.gamma_lower_ok || !rep.gamma_upper_ok)
    throw Error(ErrorCode::FieldUnbounded, rep.message);
  if (!rep.hr_ok) throw Error(ErrorCode::ConditionHrViolated, rep.message);
}

}  // namespace singint
