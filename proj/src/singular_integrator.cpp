#include "singint/singular_integrator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "singint/parallel.hpp"
#include "singint/quadrature.hpp"

namespace singint {

namespace {

constexpr std::uint64_t kStreamTube = 0x7b0e;
constexpr std::uint64_t kStreamExterior = 0xe87e;
constexpr std::uint64_t kStreamOrigin = 0x0819;
constexpr std::uint64_t kStreamNear = 0x4ea7;
constexpr std::uint64_t kStreamTail = 0x7a11;

struct Stratified {
  std::vector<RunningStats> stats;
  std::vector<Rng> rngs;
};

// Pilot pass with equal allocation, then the remainder split in proportion to the pilot
// standard deviations. Each stratum owns its generator, so results do not depend on threads.
template <class Draw>
void run_stratified(Stratified& st, std::int64_t budget, Draw&& draw) {
  const int n = static_cast<int>(st.stats.size());
  const std::int64_t pilot = std::max<std::int64_t>(16, budget / (5 * n));
  parallel_shards(n, [&](int k) {
    for (std::int64_t i = 0; i < pilot; ++i) st.stats[k].add(draw(k, st.rngs[k]));
  });
  const std::int64_t rest = budget - pilot * n;
  if (rest <= 0) return;
  std::vector<double> sd(n);
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    sd[k] = std::sqrt(st.stats[k].variance());
    total += sd[k];
  }
  if (total == 0.0) return;
  parallel_shards(n, [&](int k) {
    const auto extra = static_cast<std::int64_t>(std::floor(rest * sd[k] / total));
    for (std::int64_t i = 0; i < extra; ++i) st.stats[k].add(draw(k, st.rngs[k]));
  });
}

Stratified make_strata(int n, std::uint64_t seed, std::uint64_t stream, int round) {
  Stratified st;
  st.stats.resize(n);
  st.rngs.reserve(n);
  for (int k = 0; k < n; ++k)
    st.rngs.push_back(make_rng(seed, stream + (static_cast<std::uint64_t>(round) << 32), k));
  return st;
}

struct SumStats {
  double value = 0.0;
  double var = 0.0;
  std::int64_t n = 0;
};

SumStats sum_strata(const std::vector<RunningStats>& s, int begin, int end) {
  SumStats out;
  for (int k = begin; k < end; ++k) {
    out.value += s[k].mean();
    if (s[k].count() > 1) out.var += s[k].variance() / static_cast<double>(s[k].count());
    out.n += s[k].count();
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n + 1);
  const double r = std::log(hi / lo);
  for (int k = 0; k <= n; ++k) g[k] = lo * std::exp(r * k / n);
  g[n] = hi;
  return g;
}

double gamma_at(const WeightField& g, std::span<const double> z) {
  return g.constant_value ? *g.constant_value : g.eval(z);
}

}  // namespace

double origin_radius(double nu) { return std::max(2.0 * nu, 1e-2); }

const char* to_string(Stratum s) {
  switch (s) {
    case Stratum::origin: return "origin";
    case Stratum::tube: return "tube";
    case Stratum::exterior: return "exterior";
  }
  return "?";
}

Stratum classify_stratum(const AmbientPoint& z, double delta0, double theta0) {
  if (z.norm() <= delta0) return Stratum::origin;
  Inverted inv;
  if (try_invert_pi(z, inv) && std::abs(inv.theta) < theta0) return Stratum::tube;
  return Stratum::exterior;
}

double radial_cutoff(const ProblemSpec& spec) {
  if (spec.F.support_radius) return *spec.F.support_radius;
  const int n = spec.F.dim;
  Rng rng = make_rng(99, 0xc0ff);
  std::vector<std::vector<double>> dirs(128, std::vector<double>(n));
  for (auto& dv : dirs) uniform_on_sphere(rng, dv);
  std::vector<double> z(n);
  std::vector<double> scale;
  const int k_lo = -4;
  const int k_hi = 20;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double r = std::ldexp(1.0, k);
    double s = 0.0;
    for (const auto& dv : dirs) {
      for (int i = 0; i < n; ++i) z[i] = r * dv[i];
      s = std::max(s, std::abs(spec.F.eval(z)) / spec.Gamma.eval(z));
    }
    scale.push_back(s * std::pow(r, n - 2));
  }
  const double peak = *std::max_element(scale.begin(), scale.end());
  if (peak == 0.0) return 1.0;
  int last = 0;
  for (int i = 0; i < static_cast<int>(scale.size()); ++i)
    if (scale[i] > 1e-13 * peak) last = i;
  return std::ldexp(1.0, k_lo + last + 1);
}

IntegralEstimate evaluate_I_nu(const ProblemSpec& spec, double nu, std::int64_t budget,
                               std::uint64_t seed, const IntegratorOptions& opts) {
  if (!(nu > 0.0 && nu <= 1.0)) throw Error(ErrorCode::NuOutOfRange, "need 0 < nu <= 1");
  if (budget < 1000) throw Error(ErrorCode::BadParams, "budget must be at least 1000");
  const int d = spec.d;
  const int n = 2 * d;
  const double theta0 = opts.theta0;
  const double delta0 = origin_radius(nu);
  const double m = sigma1_volume(d);
  const double t_max = opts.t_max > 0.0 ? opts.t_max : std::max(radial_cutoff(spec), 2.0 * delta0);
  const double r_ext = t_max * std::sqrt(1.0 + theta0 * theta0);
  const double t_lo = delta0 / std::sqrt(1.0 + theta0 * theta0);
  const auto& F = spec.F;
  const auto& G = spec.Gamma;
  const double nu2 = nu * nu;

  auto integrand = [&](const AmbientPoint& z) {
    const double f = F.eval(z.coords());
    if (f == 0.0) return 0.0;
    const double w = omega(z);
    const double g = gamma_at(G, z.coords());
    return f / (w * w + nu2 * g * g);
  };

  // Tube: base radius grid, with t_split inserted as a boundary when requested.
  std::vector<double> tgrid = log_grid(t_lo, t_max, opts.tube_strata);
  int split_index = opts.tube_strata;
  if (opts.t_split && *opts.t_split > t_lo && *opts.t_split < t_max) {
    auto it = std::lower_bound(tgrid.begin(), tgrid.end(), *opts.t_split);
    split_index = static_cast<int>(it - tgrid.begin());
    if (*it != *opts.t_split) tgrid.insert(it, *opts.t_split);
  }
  const int n_tube = static_cast<int>(tgrid.size()) - 1;

  // With remainder set, each sample has the leading fiber mass pi F / (nu t^2 Gamma) at its base
  // point subtracted.
  auto tube_sample = [&](int k, Rng& rng, bool remainder) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double L = std::log(tgrid[k + 1] / tgrid[k]);
    const double t = tgrid[k] * std::exp(L * unif(rng));
    AmbientPoint base(d);
    draw_sigma1_fibration(d, rng, base.coords());
    for (double& c : base.coords()) c *= t;
    const double g0 = gamma_at(G, base.coords());
    const double eps = nu * g0 / (t * t);
    const double theta_c = t < delta0 ? std::sqrt(delta0 * delta0 / (t * t) - 1.0) : 0.0;
    const double u = unif(rng);
    const double sign = unif(rng) < 0.5 ? -1.0 : 1.0;
    if (theta_c >= theta0) return 0.0;
    const double ac = std::atan(theta_c / eps);
    const double a0 = std::atan(theta0 / eps);
    const double th = sign * eps * std::tan(ac + u * (a0 - ac));
    // density of theta: Cauchy(0, eps) restricted to theta_c < |theta| < theta0
    const double p_theta = 0.5 * eps / ((eps * eps + th * th) * (a0 - ac));
    const double p_t = 1.0 / (t * L);
    const auto z = pi_map(QuadricPoint::unchecked(base), th);
    const double f = F.eval(z.coords());
    const double lead =
        remainder ? std::numbers::pi * F.eval(base.coords()) / (nu * t * t * g0) *
                        std::pow(t, n - 1) * m / p_t
                  : 0.0;
    if (f == 0.0) return -lead;
    const double g = gamma_at(G, z.coords());
    const double jac = std::pow(t, n - 1) * mu_closed_form(d, th) * m;
    return f / (t * t * t * t * th * th + nu2 * g * g) * jac / (p_t * p_theta) - lead;
  };
  auto tube_draw = [&](int k, Rng& rng) { return tube_sample(k, rng, false); };

  const auto rgrid = log_grid(delta0, r_ext, opts.exterior_strata);
  auto exterior_draw = [&](int k, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double L = std::log(rgrid[k + 1] / rgrid[k]);
    const double r = rgrid[k] * std::exp(L * unif(rng));
    AmbientPoint z(d);
    uniform_on_sphere(rng, z.coords());
    for (double& c : z.coords()) c *= r;
    Inverted inv;
    if (try_invert_pi(z, inv) && std::abs(inv.theta) < theta0) return 0.0;
    return integrand(z) * sphere_area(n) * std::pow(r, n) * L;
  };

  const double ball = ball_volume(n) * std::pow(delta0, n);
  auto origin_draw = [&](int, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    AmbientPoint z(d);
    uniform_on_sphere(rng, z.coords());
    const double r = delta0 * std::pow(unif(rng), 1.0 / n);
    for (double& c : z.coords()) c *= r;
    return integrand(z) * ball;
  };

  const int n_origin = 8;
  std::vector<RunningStats> tube_all(n_tube);
  std::vector<RunningStats> ext_all(opts.exterior_strata);
  std::vector<RunningStats> org_all(n_origin);
  IntegralEstimate out;
  std::int64_t spent = 0;
  const std::int64_t cap = std::max(opts.max_budget, budget);
  for (int round = 0;; ++round) {
    const std::int64_t b = round == 0 ? budget : spent;  // each extra round doubles the total
    const auto bt = static_cast<std::int64_t>(b * opts.tube_fraction);
    const auto be = static_cast<std::int64_t>(b * opts.exterior_fraction);
    const std::int64_t bo = std::max<std::int64_t>(b - bt - be, n_origin * 16);
    auto st = make_strata(n_tube, seed, kStreamTube, round);
    auto se = make_strata(opts.exterior_strata, seed, kStreamExterior, round);
    auto so = make_strata(n_origin, seed, kStreamOrigin, round);
    run_stratified(st, bt, tube_draw);
    run_stratified(se, be, exterior_draw);
    run_stratified(so, bo, origin_draw);
    for (int k = 0; k < n_tube; ++k) tube_all[k].merge(st.stats[k]);
    for (int k = 0; k < opts.exterior_strata; ++k) ext_all[k].merge(se.stats[k]);
    for (int k = 0; k < n_origin; ++k) org_all[k].merge(so.stats[k]);
    spent += b;

    const auto tube = sum_strata(tube_all, 0, n_tube);
    const auto ext = sum_strata(ext_all, 0, opts.exterior_strata);
    // origin strata are identical copies of one uniform-ball estimator: average them
    RunningStats org_merged;
    for (const auto& s : org_all) org_merged.merge(s);
    SumStats org{org_merged.mean(),
                 org_merged.count() > 1 ? org_merged.variance() / org_merged.count() : 0.0,
                 org_merged.count()};

    out = IntegralEstimate{};
    out.value = tube.value + ext.value + org.value;
    out.std_error = std::sqrt(tube.var + ext.var + org.var);
    out.n_samples = tube.n + ext.n + org.n;
    out.strata.push_back({"origin", org.value, std::sqrt(org.var), org.n});
    out.strata.push_back({"tube", tube.value, std::sqrt(tube.var), tube.n});
    out.strata.push_back({"exterior", ext.value, std::sqrt(ext.var), ext.n});
    if (split_index < n_tube) {
      const auto tail = sum_strata(tube_all, split_index, n_tube);
      out.strata.push_back({"tube_tail", tail.value, std::sqrt(tail.var), tail.n});
    }
    out.converged = true;
    if (opts.target_rel_error <= 0.0) break;
    if (out.std_error <= opts.target_rel_error * std::abs(out.value)) break;
    if (2 * spent > cap) {
      out.converged = false;
      break;
    }
  }
  if (split_index < n_tube) {
    const int n_tail = n_tube - split_index;
    std::int64_t tail_n = 0;
    for (int k = split_index; k < n_tube; ++k) tail_n += tube_all[k].count();
    auto sr = make_strata(n_tail, seed, kStreamTail, 0);
    run_stratified(sr, std::max<std::int64_t>(tail_n, 32 * n_tail),
                   [&](int k, Rng& rng) { return tube_sample(split_index + k, rng, true); });
    const auto rem = sum_strata(sr.stats, 0, n_tail);
    out.strata.push_back({"tube_tail_remainder", rem.value, std::sqrt(rem.var), rem.n});
  }
  return out;
}

NearOriginResult near_origin_bound(const ProblemSpec& spec, double nu, double delta,
                                   std::int64_t budget, std::uint64_t seed) {
  if (!(nu > 0.0 && nu <= 1.0)) throw Error(ErrorCode::NuOutOfRange, "need 0 < nu <= 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw Error(ErrorCode::BadParams, "need 0 < delta <= 1");
  const int d = spec.d;
  if (d < 2) throw Error(ErrorCode::BadParams, "near-origin bound needs d >= 2");

  auto draw_point = [&](Rng& rng, AmbientPoint& z) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    uniform_on_sphere(rng, z.x());
    uniform_on_sphere(rng, z.y());
    const double rx = delta * std::pow(unif(rng), 1.0 / d);
    const double ry = delta * std::pow(unif(rng), 1.0 / d);
    for (double& c : z.x()) c *= rx;
    for (double& c : z.y()) c *= ry;
  };

  // Extremes of F and Gamma on K_delta by sampling, with a 10% margin.
  double f_max = std::abs(spec.F.eval(AmbientPoint(d).coords()));
  double g_min = spec.Gamma.eval(AmbientPoint(d).coords());
  {
    Rng rng = make_rng(seed, kStreamNear, 1u << 20);
    AmbientPoint z(d);
    for (int i = 0; i < 4096; ++i) {
      draw_point(rng, z);
      f_max = std::max(f_max, std::abs(spec.F.eval(z.coords())));
      g_min = std::min(g_min, spec.Gamma.eval(z.coords()));
    }
  }
  NearOriginResult out;
  out.C1 = 1.1 * f_max;
  out.C = g_min / 1.1;
  // int_{|y|<=delta} dy / ((rho y_1)^2 + (nu C)^2) <= V_{d-1} delta^{d-1} pi / (rho nu C), and
  // int_{|x|<=delta} dx / |x| = |S^{d-1}| delta^{d-1} / (d - 1).
  out.bound = out.C1 * std::numbers::pi * ball_volume(d - 1) * sphere_area(d) /
              ((d - 1) * nu * out.C) * std::pow(delta, 2 * d - 2);

  const double vol = std::pow(ball_volume(d) * std::pow(delta, d), 2);
  const double nu2 = nu * nu;
  const int shards = kDefaultShards;
  std::vector<RunningStats> stats(shards);
  parallel_shards(shards, [&](int s) {
    auto [b, e] = shard_range(budget, shards, s);
    Rng rng = make_rng(seed, kStreamNear, s);
    AmbientPoint z(d);
    for (std::int64_t i = b; i < e; ++i) {
      draw_point(rng, z);
      const double f = spec.F.eval(z.coords());
      if (f == 0.0) {
        stats[s].add(0.0);
        continue;
      }
      const double w = omega(z);
      const double g = spec.Gamma.eval(z.coords());
      stats[s].add(vol * f / (w * w + nu2 * g * g));
    }
  });
  RunningStats all;
  for (const auto& st : stats) all.merge(st);
  out.empirical.value = all.mean();
  out.empirical.std_error = all.std_error();
  out.empirical.n_samples = all.count();
  out.empirical.strata.push_back({"K_delta", all.mean(), all.std_error(), all.count()});
  if (out.empirical.value > out.bound)
    throw Error(ErrorCode::BoundViolated, "near-origin integral exceeds its analytic bound");
  return out;
}

FiberDiagnostics fiber_integral(const ProblemSpec& spec, double nu, const QuadricPoint& eta,
                                double t, const FiberOptions& opts) {
  if (!(t > 0.0)) throw Error(ErrorCode::BadParams, "fiber_integral needs t > 0");
  if (!(nu > 0.0)) throw Error(ErrorCode::NuOutOfRange, "need nu > 0");
  const int d = eta.d();
  const double theta0 = opts.theta0;
  AmbientPoint base = eta.p;
  for (double& c : base.coords()) c *= t;
  const auto xi = QuadricPoint::unchecked(base);
  const double f0 = spec.F.eval(base.coords());
  const double g0 = spec.Gamma.eval(base.coords());
  const double t4 = t * t * t * t;
  const double nu2 = nu * nu;

  FiberDiagnostics out;
  out.eta = eta;
  out.t = t;
  out.epsilon = nu * g0 / (t * t);
  out.theta_bar_0 = theta0;
  out.J_0m = 2.0 * f0 / (t4 * out.epsilon) * std::atan(theta0 / out.epsilon);
  out.J_leading = std::numbers::pi * f0 / (nu * t * t * g0);

  auto integrand = [&](double th) {
    const auto z = pi_map(xi, th);
    const double f = spec.F.eval(z.coords());
    if (f == 0.0) return 0.0;
    const double g = spec.Gamma.eval(z.coords());
    return f * mu_closed_form(d, th) / (t4 * th * th + nu2 * g * g);
  };

  double lo = 0.0;
  if (opts.exclude_radius > t) lo = std::sqrt(opts.exclude_radius * opts.exclude_radius / (t * t) - 1.0);
  if (lo >= theta0) return out;
  // Each half-line separately so the panel clustering sits on the peak (theta = 0 or the cut).
  const double abs_tol = 1e-15 * std::abs(out.J_leading);
  const auto right = quad::integrate_peaked(integrand, lo, theta0, lo, out.epsilon, opts.rel_tol,
                                            abs_tol);
  const auto left = quad::integrate_peaked(integrand, -theta0, -lo, -lo, out.epsilon,
                                           opts.rel_tol, abs_tol);
  if (!right.converged || !left.converged)
    throw Error(ErrorCode::QuadratureNonConvergent, "theta quadrature did not settle");
  out.J_nu = right.value + left.value;
  out.levels = std::max(right.levels, left.levels);
  out.evaluations = right.evaluations + left.evaluations;
  return out;
}

}  // namespace singint
