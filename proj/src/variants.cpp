#include "singint/variants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "singint/parallel.hpp"
#include "singint/quadrature.hpp"
#include "singint/singular_integrator.hpp"

namespace singint {

namespace {

constexpr double kPi = std::numbers::pi;

// Ray directions e_k and the transversal n_k with xy = t^2 theta on z = t (e_k + theta n_k).
constexpr std::array<std::array<double, 2>, 4> kRayE{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
constexpr std::array<std::array<double, 2>, 4> kRayN{{{0, 1}, {1, 0}, {0, -1}, {-1, 0}}};

template <class F>
double gk_integrate(F&& f, double a, double b, double rel_tol) {
  if (!(b > a)) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 18, rel_tol, &err);
}

std::pair<double, double> support_interval(const ScalarField& F) {
  const double inner = F.support_inner_radius.value_or(0.0);
  double outer = 0.0;
  if (F.support_radius) {
    outer = *F.support_radius;
  } else {
    // R^2 fields are not ProblemSpecs here; probe the decay directly.
    outer = 1.0;
    std::vector<double> z(F.dim, 0.0);
    for (int k = 0; k < 40; ++k) {
      const double r = std::ldexp(1.0, k - 4);
      double s = 0.0;
      for (int j = 0; j < 16; ++j) {
        const double a = 2.0 * kPi * j / 16;
        z[0] = r * std::cos(a);
        z[1] = r * std::sin(a);
        s = std::max(s, std::abs(F.eval(z)) * r * r);
      }
      if (s > 1e-16) outer = 2.0 * r;
    }
  }
  return {inner, outer};
}

}  // namespace

ContourResult contour_integral(const ScalarField& F, const WeightField& Gamma) {
  if (F.dim != 2 || Gamma.dim != 2) throw Error(ErrorCode::BadParams, "d = 1 fields live on R^2");
  const auto [inner, outer] = support_interval(F);
  ContourResult out;
  for (int k = 0; k < 4; ++k) {
    auto h = [&](double t) {
      const std::array<double, 2> z{t * kRayE[k][0], t * kRayE[k][1]};
      const double f = F.eval(z);
      return f == 0.0 ? 0.0 : f / (t * Gamma.eval(z));
    };
    out.per_ray[k] = gk_integrate(h, std::max(inner, 1e-12), outer, 1e-12);
    out.value += out.per_ray[k];
  }
  return out;
}

double d1_integral(const ScalarField& F, const WeightField& Gamma, double nu, double rel_tol) {
  if (F.dim != 2 || Gamma.dim != 2) throw Error(ErrorCode::BadParams, "d = 1 fields live on R^2");
  const auto [inner, outer] = support_interval(F);
  const double nu2 = nu * nu;
  double total = 0.0;
  for (int k = 0; k < 4; ++k) {
    auto fiber = [&](double t) {
      const std::array<double, 2> base{t * kRayE[k][0], t * kRayE[k][1]};
      const double eps = nu * Gamma.eval(base) / (t * t);
      const double t4 = t * t * t * t;
      auto g = [&](double th) {
        const std::array<double, 2> z{t * (kRayE[k][0] + th * kRayN[k][0]),
                                      t * (kRayE[k][1] + th * kRayN[k][1])};
        const double f = F.eval(z);
        if (f == 0.0) return 0.0;
        const double gm = Gamma.eval(z);
        return f / (t4 * th * th + nu2 * gm * gm);
      };
      // Fibers that only clip the support near |theta| = 1 are tiny; judge them against the
      // size of a full Lorentzian fiber.
      const double scale = kPi * F.bound_K / (nu * Gamma.eval(base) * t * t);
      const auto r = quad::integrate_peaked(g, -1.0, 1.0, 0.0, eps, rel_tol * 0.1,
                                            rel_tol * 1e-3 * scale);
      if (!r.converged)
        throw Error(ErrorCode::QuadratureNonConvergent, "d = 1 fiber quadrature did not settle");
      return t * r.value;  // Jacobian of (t, theta) -> t (e + theta n)
    };
    // |z| = t sqrt(1 + theta^2) <= t sqrt(2), so the support needs t in (inner / sqrt 2, outer).
    total += gk_integrate(fiber, std::max(inner / std::sqrt(2.0), 1e-12), outer, rel_tol);
  }
  return total;
}

D1Report d1_contour(const ScalarField& F, const WeightField& Gamma,
                    const std::vector<double>& nu_sweep, double slack) {
  if (!F.support_inner_radius || !(*F.support_inner_radius > 0.0))
    throw Error(ErrorCode::SupportTouchesOrigin, "F must vanish near the origin");
  if (!F.support_radius) throw Error(ErrorCode::NotCompactlySupported, "F must be compactly supported");
  if (nu_sweep.empty()) throw Error(ErrorCode::BadParams, "empty nu sweep");
  D1Report rep;
  rep.contour = contour_integral(F, Gamma);
  for (double nu : nu_sweep) {
    if (!(nu > 0.0 && nu <= 1.0)) throw Error(ErrorCode::NuOutOfRange, "need 0 < nu <= 1");
    D1Row row;
    row.nu = nu;
    row.I_nu = d1_integral(F, Gamma, nu);
    row.leading = kPi * rep.contour.value / nu;
    row.remainder = row.I_nu - row.leading;
    row.ratio = std::abs(row.remainder);
    rep.rows.push_back(row);
  }
  rep.bounded = true;
  for (const auto& r : rep.rows)
    if (r.ratio > slack * rep.rows.front().ratio) rep.bounded = false;
  return rep;
}

// ---- linear divisor -----------------------------------------------------------------------------

namespace {

struct ComplexStats {
  RunningStats re;
  RunningStats im;
};

ComplexEstimate reduce(const std::vector<ComplexStats>& strata) {
  ComplexEstimate out;
  double vre = 0.0;
  double vim = 0.0;
  for (const auto& s : strata) {
    out.re += s.re.mean();
    out.im += s.im.mean();
    if (s.re.count() > 1) {
      vre += s.re.variance() / s.re.count();
      vim += s.im.variance() / s.im.count();
    }
  }
  out.re_error = std::sqrt(vre);
  out.im_error = std::sqrt(vim);
  return out;
}

std::vector<double> log_edges(double lo, double hi, int n) {
  std::vector<double> g(n + 1);
  for (int k = 0; k <= n; ++k) g[k] = lo * std::pow(hi / lo, static_cast<double>(k) / n);
  g[n] = hi;
  return g;
}

constexpr double kInnerRadius = 1e-4;

// Runs per-stratum draws (equal allocation) returning complex samples.
template <class Draw>
std::vector<ComplexStats> run_complex(int n_strata, std::int64_t budget, std::uint64_t seed,
                                      std::uint64_t stream, Draw&& draw) {
  std::vector<ComplexStats> st(n_strata);
  const std::int64_t per = std::max<std::int64_t>(16, budget / n_strata);
  parallel_shards(n_strata, [&](int k) {
    Rng rng = make_rng(seed, stream, k);
    for (std::int64_t i = 0; i < per; ++i) {
      const std::complex<double> v = draw(k, rng);
      st[k].re.add(v.real());
      st[k].im.add(v.imag());
    }
  });
  return st;
}

}  // namespace

ComplexEstimate principal_value(const ProblemSpec& spec, std::int64_t budget, std::uint64_t seed,
                                const LinearDivisorOptions& opts) {
  const int d = spec.d;
  const int n = 2 * d;
  const double m = sigma1_volume(d);
  const double th1 = opts.theta_pv;
  const double t_max = radial_cutoff(spec);
  const auto tg = log_edges(kInnerRadius, t_max, opts.t_strata);
  auto inner = [&](int k, Rng& rng) -> std::complex<double> {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double L = std::log(tg[k + 1] / tg[k]);
    const double t = tg[k] * std::exp(L * unif(rng));
    AmbientPoint base(d);
    draw_sigma1_fibration(d, rng, base.coords());
    for (double& c : base.coords()) c *= t;
    const double th = th1 * unif(rng);
    const auto xi = QuadricPoint::unchecked(base);
    const double fp = spec.F.eval(pi_map(xi, th).coords());
    const double fm = spec.F.eval(pi_map(xi, -th).coords());
    // PV int_{-th1}^{th1} g / theta = int_0^{th1} (g(theta) - g(-theta)) / theta
    const double paired = mu_closed_form(d, th) * (fp - fm) / (t * t * th);
    return m * std::pow(t, n - 1) * th1 * paired * t * L;
  };
  const auto rg = log_edges(kInnerRadius, t_max * std::sqrt(1.0 + th1 * th1) * 1.5, 64);
  auto outer = [&](int k, Rng& rng) -> std::complex<double> {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double L = std::log(rg[k + 1] / rg[k]);
    const double r = rg[k] * std::exp(L * unif(rng));
    AmbientPoint z(d);
    uniform_on_sphere(rng, z.coords());
    for (double& c : z.coords()) c *= r;
    Inverted inv;
    if (try_invert_pi(z, inv) && std::abs(inv.theta) < th1) return 0.0;
    return spec.F.eval(z.coords()) / omega(z) * sphere_area(n) * std::pow(r, n) * L;
  };
  auto a = run_complex(opts.t_strata, budget / 2, seed, 0x9f01, inner);
  auto b = run_complex(64, budget / 2, seed, 0x9f02, outer);
  a.insert(a.end(), b.begin(), b.end());
  auto out = reduce(a);
  out.im = 0.0;
  out.im_error = 0.0;
  if (!std::isfinite(out.re) || !std::isfinite(out.re_error))
    throw Error(ErrorCode::PVNonConvergent, "principal-value estimate is not finite");
  return out;
}

ComplexEstimate linear_divisor_integral(const ProblemSpec& spec, double nu, std::int64_t budget,
                                        std::uint64_t seed, const LinearDivisorOptions& opts) {
  if (!(nu > 0.0 && nu <= 1.0)) throw Error(ErrorCode::NuOutOfRange, "need 0 < nu <= 1");
  const int d = spec.d;
  const int n = 2 * d;
  const double m = sigma1_volume(d);
  const double th0 = opts.theta0;
  const double t_max = radial_cutoff(spec);
  const auto tg = log_edges(kInnerRadius, t_max, opts.t_strata);
  using C = std::complex<double>;
  const C inu(0.0, nu);

  auto tube = [&](int k, Rng& rng) -> C {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double L = std::log(tg[k + 1] / tg[k]);
    const double t = tg[k] * std::exp(L * unif(rng));
    AmbientPoint base(d);
    draw_sigma1_fibration(d, rng, base.coords());
    for (double& c : base.coords()) c *= t;
    const double th = th0 * (2.0 * unif(rng) - 1.0);
    const double f0 = spec.F.eval(base.coords());
    const double g0 = spec.Gamma.eval(base.coords());
    const double t2 = t * t;
    const double eps = nu * g0 / t2;
    // int_{-th0}^{th0} d theta / (t^2 theta + i nu g0) = t^-2 ln((th0 + i eps) / (-th0 + i eps))
    const C frozen = f0 / t2 * std::log(C(th0, eps) / C(-th0, eps));
    const auto z = pi_map(QuadricPoint::unchecked(base), th);
    const double f = spec.F.eval(z.coords());
    const double g = spec.Gamma.eval(z.coords());
    const C corr = f * mu_closed_form(d, th) / (t2 * th + inu * g) - f0 / (t2 * th + inu * g0);
    return m * std::pow(t, n - 1) * (frozen + 2.0 * th0 * corr) * t * L;
  };
  const auto rg = log_edges(kInnerRadius, t_max * std::sqrt(1.0 + th0 * th0) * 1.5, 64);
  auto exterior = [&](int k, Rng& rng) -> C {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double L = std::log(rg[k + 1] / rg[k]);
    const double r = rg[k] * std::exp(L * unif(rng));
    AmbientPoint z(d);
    uniform_on_sphere(rng, z.coords());
    for (double& c : z.coords()) c *= r;
    Inverted inv;
    if (try_invert_pi(z, inv) && std::abs(inv.theta) < th0) return 0.0;
    const double f = spec.F.eval(z.coords());
    if (f == 0.0) return 0.0;
    return f / (omega(z) + inu * spec.Gamma.eval(z.coords())) * sphere_area(n) * std::pow(r, n) * L;
  };
  auto a = run_complex(opts.t_strata, budget / 2, seed, 0xd1a0, tube);
  auto b = run_complex(64, budget / 2, seed, 0xd1a1, exterior);
  a.insert(a.end(), b.begin(), b.end());
  return reduce(a);
}

LinearDivisorReport linear_divisor(const ProblemSpec& spec, const std::vector<double>& nu_sweep,
                                   std::uint64_t seed, const LinearDivisorOptions& opts) {
  LinearDivisorReport rep;
  auto g = [&spec](std::span<const double> z) {
    const double r = norm(z);
    return r > 0.0 ? spec.F.eval(z) / r : 0.0;
  };
  const auto s = surface_integral(spec.d, g, SurfaceMethod::charts, 4000, seed);
  rep.surface_term = s.value;
  rep.surface_term_error = s.std_error;
  rep.pv = principal_value(spec, opts.budget, seed + 1, opts);
  for (size_t i = 0; i < nu_sweep.size(); ++i) {
    LinearDivisorRow row;
    row.nu = nu_sweep[i];
    row.estimate = linear_divisor_integral(spec, row.nu, opts.budget, seed + 100 * (i + 1), opts);
    row.limit.re = rep.pv.re;
    row.limit.re_error = rep.pv.re_error;
    row.limit.im = -kPi * rep.surface_term;
    row.limit.im_error = kPi * rep.surface_term_error;
    const double scale = 0.05 * std::abs(row.limit.value());
    const bool re_ok = std::abs(row.estimate.re - row.limit.re) <=
                       std::max(3.0 * std::hypot(row.estimate.re_error, row.limit.re_error), scale);
    const bool im_ok = std::abs(row.estimate.im - row.limit.im) <=
                       std::max(3.0 * std::hypot(row.estimate.im_error, row.limit.im_error), scale);
    row.converged = re_ok && im_ok;
    rep.rows.push_back(row);
  }
  return rep;
}

// ---- sphere quadric ------------------------------------------------------------------------

double sphere_surface_integral(const ScalarField& F, const WeightField& Gamma, double radius,
                               int n_angle) {
  const int d = F.dim;
  const auto rule = quad::sphere_rule(d, n_angle);
  double sum = 0.0;
  std::vector<double> z(d);
  for (size_t j = 0; j < rule.dirs.size(); ++j) {
    for (int i = 0; i < d; ++i) z[i] = radius * rule.dirs[j][i];
    sum += rule.weights[j] * F.eval(z) / Gamma.eval(z);
  }
  return sum * std::pow(radius, d - 1);
}

double sphere_integral(const ScalarField& F, const WeightField& Gamma, double radius, double nu,
                       int n_angle) {
  const int d = F.dim;
  const auto rule = quad::sphere_rule(d, n_angle);
  const double R2 = radius * radius;
  const double nu2 = nu * nu;
  std::vector<double> partial(rule.dirs.size());
  parallel_shards(static_cast<int>(rule.dirs.size()), [&](int j) {
    std::vector<double> z(d);
    const auto& u = rule.dirs[j];
    auto h = [&](double r) {
      for (int i = 0; i < d; ++i) z[i] = r * u[i];
      const double f = F.eval(z);
      if (f == 0.0) return 0.0;
      const double w = r * r - R2;
      const double g = Gamma.eval(z);
      return std::pow(r, d - 1) * f / (w * w + nu2 * g * g);
    };
    for (int i = 0; i < d; ++i) z[i] = radius * u[i];
    const double width = nu * Gamma.eval(z) / (2.0 * radius);
    const auto core = quad::integrate_peaked(h, 0.0, 2.0 * radius, radius, width, 1e-12);
    if (!core.converged)
      throw Error(ErrorCode::QuadratureNonConvergent, "sphere radial quadrature did not settle");
    quad::RadialOptions ro;
    ro.include_origin = false;
    ro.rel_tol = 1e-12;
    const auto tail = quad::integrate_radial_from(h, 2.0 * radius, ro);
    partial[j] = rule.weights[j] * (core.value + tail.value);
  });
  double sum = 0.0;
  for (double p : partial) sum += p;
  return sum;
}

SphereReport sphere_quadric(const ScalarField& F, const WeightField& Gamma, double k_mod,
                            const std::vector<double>& nu_sweep, double slack) {
  if (!(k_mod > 0.0)) throw Error(ErrorCode::BadParams, "k_mod must be > 0");
  if (F.dim != Gamma.dim || F.dim < 2 || F.dim > 3)
    throw Error(ErrorCode::BadParams, "sphere quadric supports d = 2 and d = 3");
  SphereReport rep;
  rep.radius = 0.5 * k_mod;
  rep.surface_integral = sphere_surface_integral(F, Gamma, rep.radius);
  rep.leading_coefficient = kPi * rep.surface_integral / (2.0 * rep.radius);
  for (double nu : nu_sweep) {
    if (!(nu > 0.0 && nu <= 1.0)) throw Error(ErrorCode::NuOutOfRange, "need 0 < nu <= 1");
    SphereRow row;
    row.nu = nu;
    row.I_nu = sphere_integral(F, Gamma, rep.radius, nu);
    row.leading = rep.leading_coefficient / nu;
    row.remainder = row.I_nu - row.leading;
    row.ratio = std::abs(row.remainder);
    rep.rows.push_back(row);
  }
  rep.bounded = !rep.rows.empty();
  for (const auto& r : rep.rows)
    if (r.ratio > slack * rep.rows.front().ratio) rep.bounded = false;
  return rep;
}

// ---- kinetic kernel --------------------------------------------------------------------------

KineticIntegrand separable_gaussian_kinetic(std::span<const double> k) {
  KineticIntegrand out;
  out.d = static_cast<int>(k.size());
  std::vector<double> kk(k.begin(), k.end());
  out.fn = [kk](std::span<const double> k1, std::span<const double> k2, std::span<const double>) {
    double s = 0.0;
    for (size_t i = 0; i < kk.size(); ++i) {
      s += (k1[i] - kk[i]) * (k1[i] - kk[i]);
      s += (k2[i] - kk[i]) * (k2[i] - kk[i]);
    }
    return std::exp(-s);
  };
  out.decay_M = 8.0;
  return out;
}

IntegralEstimate kinetic_kernel_demo(const KineticIntegrand& Fk, std::span<const double> k,
                                     std::int64_t budget, std::uint64_t seed,
                                     SurfaceMethod method) {
  const int d = Fk.d;
  if (static_cast<int>(k.size()) != d) throw Error(ErrorCode::BadParams, "k has the wrong size");
  if (!(Fk.decay_M > 2.0 * d - 2.0))
    throw Error(ErrorCode::DecayInsufficient, "need decay M > 2d - 2 for the kernel to converge");
  std::vector<double> kk(k.begin(), k.end());
  auto g = [&Fk, kk, d](std::span<const double> z) {
    std::array<double, kMaxHalfDim> k1{};
    std::array<double, kMaxHalfDim> k2{};
    std::array<double, kMaxHalfDim> k3{};
    for (int i = 0; i < d; ++i) {
      k1[i] = z[i] + kk[i];
      k2[i] = z[d + i] + kk[i];
      k3[i] = z[i] + z[d + i] + kk[i];  // k3 = k1 + k2 - k
    }
    const double r = norm(z);
    if (r == 0.0) return 0.0;
    return Fk.fn({k1.data(), static_cast<size_t>(d)}, {k2.data(), static_cast<size_t>(d)},
                 {k3.data(), static_cast<size_t>(d)}) /
           r;
  };
  return surface_integral(d, g, method, budget, seed);
}

}  // namespace singint
