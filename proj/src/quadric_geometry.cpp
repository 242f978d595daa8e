#include "singint/quadric_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "singint/quadrature.hpp"

namespace singint {

namespace {

constexpr double kOnQuadricTol = 1e-12;

void check_half_dim(int d) {
  if (d < 1 || d > kMaxHalfDim) throw Error(ErrorCode::BadParams, "half-dimension must be 1..4");
}

}  // namespace

bool QuadricPoint::on_quadric(const AmbientPoint& z) {
  const double r2 = dot(z.coords(), z.coords());
  return r2 > 0.0 && std::abs(omega(z)) <= kOnQuadricTol * r2;
}

QuadricPoint::QuadricPoint(const AmbientPoint& z) : p(z) {
  if (!on_quadric(z)) throw Error(ErrorCode::BadParams, "point is not on the quadric");
}

QuadricPoint QuadricPoint::unchecked(const AmbientPoint& z) {
  QuadricPoint q;
  q.p = z;
  return q;
}

double omega(std::span<const double> x, std::span<const double> y) { return dot(x, y); }

double omega(const AmbientPoint& z) { return dot(z.x(), z.y()); }

AmbientPoint pi_map(const QuadricPoint& xi, double theta) {
  const int d = xi.d();
  AmbientPoint z(d);
  for (int i = 0; i < d; ++i) {
    z.z[i] = xi.p.z[i] + theta * xi.p.z[d + i];
    z.z[d + i] = xi.p.z[d + i] + theta * xi.p.z[i];
  }
  return z;
}

bool try_invert_pi(const AmbientPoint& z, Inverted& out) {
  const int d = z.d;
  std::array<double, kMaxHalfDim> a{};
  std::array<double, kMaxHalfDim> b{};
  double na = 0.0;
  double nb = 0.0;
  for (int i = 0; i < d; ++i) {
    a[i] = z.z[i] + z.z[d + i];
    b[i] = z.z[i] - z.z[d + i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na == 0.0 || nb == 0.0) return false;
  const double sum = na + nb;
  out.theta = (na - nb) / sum;
  // x_xi + y_xi = a / (1 + theta) and x_xi - y_xi = b / (1 - theta); both have length sum / 2.
  const double sa = 0.5 * sum / na;
  const double sb = 0.5 * sum / nb;
  AmbientPoint xi(d);
  for (int i = 0; i < d; ++i) {
    const double s = a[i] * sa;
    const double t = b[i] * sb;
    xi.z[i] = 0.5 * (s + t);
    xi.z[d + i] = 0.5 * (s - t);
  }
  out.xi = QuadricPoint::unchecked(xi);
  return true;
}

Inverted invert_pi(const AmbientPoint& z) {
  Inverted out;
  if (!try_invert_pi(z, out))
    throw Error(ErrorCode::DegeneratePoint, "x + y = 0 or x - y = 0; no normal coordinates");
  return out;
}

TubeCoords to_tube_coords(const AmbientPoint& z, double theta0) {
  const auto inv = invert_pi(z);
  if (std::abs(inv.theta) >= theta0) throw Error(ErrorCode::OutsideTube, "|theta| >= theta0");
  TubeCoords c;
  c.t = inv.xi.norm();
  AmbientPoint eta = inv.xi.p;
  for (double& v : eta.coords()) v /= c.t;
  c.eta = QuadricPoint::unchecked(eta);
  c.theta = inv.theta;
  c.theta0 = theta0;
  return c;
}

AmbientPoint from_tube_coords(const TubeCoords& c) {
  AmbientPoint xi = c.eta.p;
  for (double& v : xi.coords()) v *= c.t;
  return pi_map(QuadricPoint::unchecked(xi), c.theta);
}

double dist_to_quadric(const AmbientPoint& z, double theta0_star) {
  if (dot(z.coords(), z.coords()) == 0.0) return 0.0;
  const auto inv = invert_pi(z);
  if (std::abs(inv.theta) >= theta0_star)
    throw Error(ErrorCode::OutsideTube, "distance formula is certified only inside the tube");
  return inv.xi.norm() * std::abs(inv.theta);
}

double mu_closed_form(int d, double theta) { return std::pow(1.0 - theta * theta, d - 1); }

JacobianSample mu_density(const QuadricPoint& eta, double theta, double t, double theta0) {
  const int d = eta.d();
  const int n = 2 * d;
  if (!(std::abs(theta) < theta0)) throw Error(ErrorCode::OutsideTube, "|theta| >= theta0");
  if (!(t > 0.0)) throw Error(ErrorCode::BadParams, "t must be > 0");

  Eigen::VectorXd e(n);
  Eigen::VectorXd nv(n);
  for (int i = 0; i < d; ++i) {
    e[i] = eta.p.z[i];
    e[d + i] = eta.p.z[d + i];
    nv[i] = eta.p.z[d + i];
    nv[d + i] = eta.p.z[i];
  }
  if (std::abs(e.norm() - 1.0) > 1e-9 || nv.norm() < 0.5)
    throw Error(ErrorCode::FrameConstructionFailed, "eta is not on the unit section");

  // Tangent frame of Sigma^1 at eta: orthogonal complement of span{eta, N(eta)}.
  Eigen::MatrixXd basis(n, 2);
  basis.col(0) = e;
  basis.col(1) = nv.normalized();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd frame = q.rightCols(n - 2);
  if ((frame.transpose() * basis).norm() > 1e-10)
    throw Error(ErrorCode::FrameConstructionFailed, "tangent frame is not orthogonal to normal");

  // P(s, t, theta) = pi(t R(eta + frame s), theta); R projects onto the quadric and renormalizes.
  auto param = [&](const Eigen::VectorXd& s, double tt, double th) {
    Eigen::VectorXd w = e + frame * s;
    AmbientPoint wp(d);
    for (int i = 0; i < n; ++i) wp.z[i] = w[i];
    const auto inv = invert_pi(wp);
    const double r = inv.xi.norm();
    AmbientPoint base(d);
    for (int i = 0; i < n; ++i) base.z[i] = inv.xi.p.z[i] * tt / r;
    const auto z = pi_map(QuadricPoint::unchecked(base), th);
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) out[i] = z.z[i];
    return out;
  };

  const double h = 1e-5;
  Eigen::MatrixXd jac(n, n);
  Eigen::VectorXd s0 = Eigen::VectorXd::Zero(n - 2);
  for (int k = 0; k < n - 2; ++k) {
    Eigen::VectorXd sp = s0;
    Eigen::VectorXd sm = s0;
    sp[k] = h;
    sm[k] = -h;
    jac.col(k) = (param(sp, t, theta) - param(sm, t, theta)) / (2.0 * h);
  }
  const double ht = h * t;
  jac.col(n - 2) = (param(s0, t + ht, theta) - param(s0, t - ht, theta)) / (2.0 * ht);
  jac.col(n - 1) = (param(s0, t, theta + h) - param(s0, t, theta - h)) / (2.0 * h);

  JacobianSample out;
  out.gram_det_sqrt = std::abs(jac.determinant());
  out.mu = out.gram_det_sqrt / std::pow(t, n - 1);
  return out;
}

double sigma1_volume(int d) {
  check_half_dim(d);
  if (d == 1) return 4.0;
  // m = |S^{d-1}| |S^{d-2}| int_0^{pi/2} (cos phi sin phi)^{d-2} d phi
  // = 2^{2-d} / 2 * B(1/2, (d-1)/2)
  const double beta = std::tgamma(0.5) * std::tgamma(0.5 * (d - 1)) / std::tgamma(0.5 * d);
  const double phi_integral = std::pow(0.5, d - 1) * beta;
  return sphere_area(d) * sphere_area(d - 1) * phi_integral;
}

void draw_sigma1_fibration(int d, Rng& rng, std::span<double> out) {
  std::array<double, kMaxHalfDim> u{};
  std::array<double, kMaxHalfDim> v{};
  std::array<double, kMaxHalfDim> w{};
  std::span<double> us(u.data(), d);
  std::span<double> vs(v.data(), d);
  std::span<double> ws(w.data(), d);
  uniform_on_sphere(rng, ws);
  const double phi = 0.5 * std::acos(std::clamp(w[0], -1.0, 1.0));
  uniform_on_sphere(rng, us);
  if (d == 1) {
    // Sigma^1 is the four points (+-1, 0), (0, +-1); phi is 0 or pi/2.
    out[0] = std::cos(phi) * u[0];
    out[1] = std::sin(phi) * (rng() & 1 ? 1.0 : -1.0);
    return;
  }
  std::normal_distribution<double> normal;
  double nv = 0.0;
  do {
    for (double& c : vs) c = normal(rng);
    const double proj = dot(vs, us);
    for (int i = 0; i < d; ++i) v[i] -= proj * u[i];
    nv = norm(vs);
  } while (nv < 1e-8);
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  for (int i = 0; i < d; ++i) {
    out[i] = c * u[i];
    out[d + i] = s * v[i] / nv;
  }
}

std::vector<WeightedQuadricPoint> sample_sigma1(int d, std::int64_t n, std::uint64_t seed,
                                                const Sigma1Options& opts) {
  check_half_dim(d);
  if (n < 1) throw Error(ErrorCode::BadParams, "sample_sigma1 needs n >= 1");
  const int shards = static_cast<int>(std::min<std::int64_t>(opts.shards, n));
  std::vector<std::vector<WeightedQuadricPoint>> parts(shards);

  if (opts.scheme == Sigma1Scheme::fibration) {
    const double w = sigma1_volume(d) / static_cast<double>(n);
    parallel_shards(shards, [&](int s) {
      auto [b, e] = shard_range(n, shards, s);
      Rng rng = make_rng(seed, 0x51a1, s);
      auto& out = parts[s];
      out.reserve(e - b);
      for (std::int64_t i = b; i < e; ++i) {
        AmbientPoint z(d);
        draw_sigma1_fibration(d, rng, z.coords());
        out.push_back({QuadricPoint::unchecked(z), w});
      }
    });
  } else {
    if (opts.eps_slab > opts.theta0 / 4.0)
      throw Error(ErrorCode::SlabTooWide, "eps_slab must not exceed theta0 / 4");
    if (d == 1) throw Error(ErrorCode::BadParams, "thin-slab sampling needs d >= 2");
    const double eps = opts.eps_slab;
    const double area = sphere_area(2 * d);
    parallel_shards(shards, [&](int s) {
      auto [b, e] = shard_range(n, shards, s);
      const std::int64_t want = e - b;
      Rng rng = make_rng(seed, 0x51ab, s);
      auto& out = parts[s];
      out.reserve(want);
      std::int64_t draws = 0;
      AmbientPoint z(d);
      while (static_cast<std::int64_t>(out.size()) < want) {
        uniform_on_sphere(rng, z.coords());
        ++draws;
        if (std::abs(omega(z)) >= eps) continue;
        Inverted inv;
        if (!try_invert_pi(z, inv)) continue;
        AmbientPoint eta = inv.xi.p;
        const double r = eta.norm();
        for (double& c : eta.coords()) c /= r;
        out.push_back({QuadricPoint::unchecked(eta), 0.0});
      }
      // (k - 1) / (N - 1) is unbiased for the acceptance probability when sampling until k hits.
      const double k = static_cast<double>(want);
      const double p_hat = want > 1 ? (k - 1.0) / static_cast<double>(draws - 1)
                                    : 1.0 / static_cast<double>(draws);
      const double w = area * p_hat / (2.0 * eps * static_cast<double>(n));
      for (auto& q : out) q.weight = w;
    });
  }

  std::vector<WeightedQuadricPoint> all;
  all.reserve(n);
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

double radial_integral(const AmbientFn& g, const QuadricPoint& eta, double rel_tol) {
  const int d = eta.d();
  const int n = 2 * d;
  std::array<double, kMaxAmbientDim> z{};
  std::span<const double> zs(z.data(), n);
  auto h = [&](double t) {
    for (int i = 0; i < n; ++i) z[i] = t * eta.p.z[i];
    return std::pow(t, n - 2) * g(zs);
  };
  quad::RadialOptions ro;
  ro.rel_tol = rel_tol;
  return quad::integrate_radial(h, ro).value;
}

namespace {

IntegralEstimate surface_charts(int d, const AmbientFn& g, std::int64_t budget, std::uint64_t seed,
                                const SurfaceOptions& opts) {
  const int shards = static_cast<int>(std::min<std::int64_t>(opts.shards, budget));
  const double m = sigma1_volume(d);
  std::vector<RunningStats> stats(shards);
  parallel_shards(shards, [&](int s) {
    auto [b, e] = shard_range(budget, shards, s);
    Rng rng = make_rng(seed, 0xc4a7, s);
    AmbientPoint eta(d);
    for (std::int64_t i = b; i < e; ++i) {
      draw_sigma1_fibration(d, rng, eta.coords());
      stats[s].add(m * radial_integral(g, QuadricPoint::unchecked(eta), opts.radial_rel_tol));
    }
  });
  RunningStats all;
  for (const auto& st : stats) all.merge(st);
  IntegralEstimate out;
  out.value = all.mean();
  out.std_error = all.std_error();
  out.n_samples = all.count();
  out.strata.push_back({"charts", out.value, out.std_error, out.n_samples});
  return out;
}

// Beta-prime(a, b) variate and its density; the ambient proposal's radial law.
double beta_prime_draw(Rng& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  return ga(rng) / gb(rng);
}

IntegralEstimate surface_thin_slab(int d, const AmbientFn& g, std::int64_t budget,
                                   std::uint64_t seed, const SurfaceOptions& opts) {
  if (d < 2) throw Error(ErrorCode::BadParams, "thin-slab surface integral needs d >= 2");
  const int shards = static_cast<int>(std::min<std::int64_t>(opts.shards, budget));
  const double alpha = opts.tail_alpha;
  const double a = d - 1.0;
  const double beta_fn = std::tgamma(a) * std::tgamma(alpha) / std::tgamma(a + alpha);
  // x: |x| ~ BetaPrime(d-1, alpha), direction uniform; y_perp in x^perp likewise.
  // Weight of g|z| / (|x| p(x) p_perp(y_perp)) collapses to this constant times (1+r)^..(1+rho)^..
  const double c0 = sphere_area(d) * sphere_area(d - 1) * beta_fn * beta_fn;
  const double e1 = opts.eps1;
  const double e2 = opts.eps2;
  std::vector<RunningStats> s1(shards);
  std::vector<RunningStats> s2(shards);
  std::vector<RunningStats> sx(shards);
  parallel_shards(shards, [&](int s) {
    auto [b, e] = shard_range(budget, shards, s);
    Rng rng = make_rng(seed, 0x5a1b, s);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::normal_distribution<double> normal;
    std::array<double, kMaxHalfDim> xh{};
    std::array<double, kMaxHalfDim> yp{};
    std::span<double> xhs(xh.data(), d);
    std::span<double> yps(yp.data(), d);
    AmbientPoint z(d);
    for (std::int64_t i = b; i < e; ++i) {
      const double r = beta_prime_draw(rng, a, alpha);
      const double rho = beta_prime_draw(rng, a, alpha);
      uniform_on_sphere(rng, xhs);
      double ny = 0.0;
      do {
        for (double& c : yps) c = normal(rng);
        const double pr = dot(yps, xhs);
        for (int k = 0; k < d; ++k) yp[k] -= pr * xh[k];
        ny = norm(yps);
      } while (ny < 1e-12);
      const double u = unif(rng);
      const double w = c0 * std::pow((1.0 + r) * (1.0 + rho), a + alpha);
      auto value_at = [&](double eps) {
        const double sv = u * eps / r;
        for (int k = 0; k < d; ++k) {
          z.z[k] = r * xh[k];
          z.z[d + k] = rho * yp[k] / ny + sv * xh[k];
        }
        const double gz = g(z.coords());
        return gz == 0.0 ? 0.0 : w * gz * z.norm();
      };
      const double v1 = value_at(e1);
      const double v2 = value_at(e2);
      s1[s].add(v1);
      s2[s].add(v2);
      sx[s].add((e1 * v2 - e2 * v1) / (e1 - e2));
    }
  });
  RunningStats a1;
  RunningStats a2;
  RunningStats ax;
  for (int s = 0; s < shards; ++s) {
    a1.merge(s1[s]);
    a2.merge(s2[s]);
    ax.merge(sx[s]);
  }
  IntegralEstimate out;
  out.value = ax.mean();
  out.std_error = ax.std_error();
  out.n_samples = ax.count();
  out.strata.push_back({"eps1", a1.mean(), a1.std_error(), a1.count()});
  out.strata.push_back({"eps2", a2.mean(), a2.std_error(), a2.count()});
  out.strata.push_back({"extrapolated", out.value, out.std_error, out.n_samples});
  return out;
}

}  // namespace

IntegralEstimate surface_integral(int d, const AmbientFn& g, SurfaceMethod method,
                                  std::int64_t budget, std::uint64_t seed,
                                  const SurfaceOptions& opts) {
  check_half_dim(d);
  if (budget < 2) throw Error(ErrorCode::BadParams, "surface_integral needs budget >= 2");
  return method == SurfaceMethod::charts ? surface_charts(d, g, budget, seed, opts)
                                         : surface_thin_slab(d, g, budget, seed, opts);
}

}  // namespace singint
