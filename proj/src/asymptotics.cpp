#include "singint/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "singint/quadrature.hpp"

namespace singint {

namespace {

AmbientFn leading_integrand(const ProblemSpec& spec) {
  return [&spec](std::span<const double> z) {
    const double f = spec.F.eval(z);
    if (f == 0.0) return 0.0;
    const double r = norm(z);
    return r > 0.0 ? f / (r * spec.Gamma.eval(z)) : 0.0;
  };
}

}  // namespace

LeadingCoefficient leading_coefficient(const ProblemSpec& spec, std::uint64_t seed,
                                       const LeadingOptions& opts) {
  const auto g = leading_integrand(spec);
  LeadingCoefficient out;
  out.charts = surface_integral(spec.d, g, SurfaceMethod::charts, opts.charts_budget, seed);
  out.thin_slab = surface_integral(spec.d, g, SurfaceMethod::thin_slab, opts.slab_budget, seed);
  const double vc = out.charts.std_error * out.charts.std_error;
  const double vs = out.thin_slab.std_error * out.thin_slab.std_error;
  if (vc == 0.0 && vs == 0.0) {
    out.A = 0.5 * (out.charts.value + out.thin_slab.value);
  } else if (vc == 0.0 || vs == 0.0) {
    out.A = vc == 0.0 ? out.charts.value : out.thin_slab.value;
  } else {
    out.A = (out.charts.value / vc + out.thin_slab.value / vs) / (1.0 / vc + 1.0 / vs);
    out.std_error = 1.0 / std::sqrt(1.0 / vc + 1.0 / vs);
  }
  const double diff = std::abs(out.charts.value - out.thin_slab.value);
  out.method_agreement = out.A != 0.0 ? diff / std::abs(out.A) : 0.0;
  const double allowed = std::max(3.0 * std::sqrt(vc + vs), opts.rel_floor * std::abs(out.A));
  if (diff > allowed)
    throw Error(ErrorCode::MethodsDisagree,
                "charts " + std::to_string(out.charts.value) + " vs thin_slab " +
                    std::to_string(out.thin_slab.value));
  return out;
}

double chi_d(int d, double nu) {
  if (d >= 3) return 1.0;
  return std::max(1.0, std::log(1.0 / nu));
}

const char* to_string(Regime r) {
  return r == Regime::r_star_le_2 ? "r_star_le_2" : "r_star_gt_2";
}

std::vector<double> default_sweep(int d) {
  const int last = d == 2 ? 10 : 5;
  std::vector<double> s;
  for (int k = 0; k <= last; ++k) s.push_back(std::pow(10.0, -1.0 - k / 5.0));
  return s;
}

AsymptoticReport verify_theorem(const ProblemSpec& spec, const std::vector<double>& nu_sweep,
                                std::uint64_t seed, const VerifyOptions& opts) {
  if (nu_sweep.empty()) throw Error(ErrorCode::BadParams, "empty nu sweep");
  for (size_t i = 0; i < nu_sweep.size(); ++i) {
    if (!(nu_sweep[i] > 0.0 && nu_sweep[i] <= 1.0))
      throw Error(ErrorCode::NuOutOfRange, "nu sweep must lie in (0, 1]");
    if (i > 0 && !(nu_sweep[i] < nu_sweep[i - 1]))
      throw Error(ErrorCode::BadParams, "nu sweep must be strictly decreasing");
  }
  AsymptoticReport rep;
  if (opts.known_A) {
    rep.leading_A = *opts.known_A;
  } else {
    const auto lc = leading_coefficient(spec, seed, opts.leading);
    rep.leading_A = lc.A;
    rep.leading_A_error = lc.std_error;
    rep.method_agreement = lc.method_agreement;
  }

  const double r_star = spec.Gamma.growth_r_star;
  const double M = spec.F.decay_M;
  const int d = spec.d;
  double beta = 0.0;
  double c_beta = 0.0;
  double tail_exponent = 0.0;
  if (r_star > 2.0) {
    rep.regime = Regime::r_star_gt_2;
    beta = 1.0 / (r_star - 2.0);
    c_beta = std::pow(opts.integrator.theta0 /
                          (std::pow(2.0, 1.0 + 0.5 * r_star) * spec.Gamma.bound_K),
                      beta);
    rep.beta = beta;
    rep.C_beta = c_beta;
    tail_exponent = -1.0 + beta * (M + r_star + 2.0 - 2.0 * d);
  }

  for (size_t i = 0; i < nu_sweep.size(); ++i) {
    const double nu = nu_sweep[i];
    AsymptoticRow row;
    row.nu = nu;
    auto io = opts.integrator;
    if (rep.regime == Regime::r_star_gt_2) {
      row.t_beta = c_beta * std::pow(nu, -beta);
      io.t_split = row.t_beta;
    }
    row.I_nu = evaluate_I_nu(spec, nu, opts.budget, seed + 1000 * (i + 1), io);
    row.leading = std::numbers::pi * rep.leading_A / nu;
    row.remainder = row.I_nu.value - row.leading;
    row.chi_d = chi_d(d, nu);
    row.ratio = std::abs(row.remainder) / row.chi_d;
    const double lead_err = std::numbers::pi * rep.leading_A_error / nu;
    row.ratio_error = std::hypot(row.I_nu.std_error, lead_err) / row.chi_d;
    if (rep.regime == Regime::r_star_gt_2) {
      if (const auto* tail = row.I_nu.stratum("tube_tail_remainder")) {
        row.tail = tail->value;
        row.tail_error = tail->std_error;
      }
      row.tail_envelope = row.tail / std::pow(nu, tail_exponent);
    }
    rep.rows.push_back(std::move(row));
  }

  const auto& first = rep.rows.front();
  rep.ratio_bounded = true;
  for (const auto& r : rep.rows)
    if (r.ratio - 3.0 * r.ratio_error > opts.slack * first.ratio) rep.ratio_bounded = false;
  if (rep.regime == Regime::r_star_gt_2) {
    // The tail is the tube integral beyond t_beta minus its leading mass, estimated as
    // C nu^{tail_exponent} <= C; the check is on boundedness by the largest-nu value.
    const double cap = std::abs(first.tail) + 3.0 * first.tail_error;
    for (const auto& r : rep.rows)
      if (std::abs(r.tail) - 3.0 * r.tail_error > opts.slack * cap) rep.tail_bounded = false;
  }
  return rep;
}

AsymptoticReport require_certified(const ProblemSpec& spec, const std::vector<double>& nu_sweep,
                                   std::uint64_t seed, const VerifyOptions& opts) {
  auto rep = verify_theorem(spec, nu_sweep, seed, opts);
  if (!rep.certified())
    throw Error(ErrorCode::RemainderUnbounded, "remainder ratio grows across the sweep");
  return rep;
}

ConvergenceCheck absolute_convergence(const ProblemSpec& spec, const QuadricPoint& eta) {
  const int d = eta.d();
  std::array<double, kMaxAmbientDim> z{};
  std::span<const double> zs(z.data(), 2 * d);
  auto h = [&](double t) {
    for (int i = 0; i < 2 * d; ++i) z[i] = t * eta.p.z[i];
    return std::pow(t, 2 * d - 3) * spec.F.eval(zs) / spec.Gamma.eval(zs);
  };
  ConvergenceCheck out;
  const auto main = quad::integrate_radial(h);
  out.total = main.value;
  out.t_max = main.t_max;
  quad::RadialOptions ro;
  ro.include_origin = false;
  ro.tail_tol = 1e-3;
  const auto tail = quad::integrate_radial_from(h, main.t_max, ro);
  out.tail_fraction = out.total != 0.0 ? std::abs(tail.value / out.total) : 0.0;
  return out;
}

}  // namespace singint
