#include "singint/stationary_phase.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "singint/asymptotics.hpp"
#include "singint/parallel.hpp"
#include "singint/quadrature.hpp"

namespace singint {

namespace {

constexpr double kPi = std::numbers::pi;
using C = std::complex<double>;

void phase_gradient(const PhaseProblem& p, std::span<const double> x, std::span<double> out) {
  if (p.grad) {
    p.grad(x, out);
    return;
  }
  std::vector<double> w(x.begin(), x.end());
  const double h = 1e-6 * japanese_bracket(norm(x));
  for (int i = 0; i < p.n; ++i) {
    const double xi = w[i];
    w[i] = xi + h;
    const double gp = p.g(w);
    w[i] = xi - h;
    const double gm = p.g(w);
    w[i] = xi;
    out[i] = (gp - gm) / (2.0 * h);
  }
}

// 1-D panel edges on [-R, R] with width <= 0.4 wavelength (8 nodes per panel, 20 per wavelength).
std::vector<double> axis_edges(const PhaseProblem& p, int axis, double lambda,
                               double nodes_per_wavelength) {
  const double R = p.box_half_width;
  const int n = p.n;
  // max |d_axis g| over a coarse grid of the other coordinates, tabulated along the axis
  const int n_tab = 1024;
  const int n_other = 9;
  std::vector<double> gmax(n_tab + 1, 0.0);
  std::vector<double> x(n);
  std::vector<double> gr(n);
  int combos = 1;
  for (int i = 0; i < n - 1; ++i) combos *= n_other;
  for (int j = 0; j <= n_tab; ++j) {
    x[axis] = -R + 2.0 * R * j / n_tab;
    for (int c = 0; c < combos; ++c) {
      int rem = c;
      for (int i = 0; i < n; ++i) {
        if (i == axis) continue;
        x[i] = -R + 2.0 * R * (rem % n_other) / (n_other - 1);
        rem /= n_other;
      }
      phase_gradient(p, x, gr);
      gmax[j] = std::max(gmax[j], std::abs(gr[axis]));
    }
  }
  const double panel_nodes = 8.0;
  const double w_cap = R / 16.0;
  auto local_g = [&](double a, double b) {
    const int ja = std::clamp(static_cast<int>(std::floor((a + R) / (2.0 * R) * n_tab)) - 1, 0, n_tab);
    const int jb = std::clamp(static_cast<int>(std::ceil((b + R) / (2.0 * R) * n_tab)) + 1, 0, n_tab);
    double g = 0.0;
    for (int j = ja; j <= jb; ++j) g = std::max(g, gmax[j]);
    return g;
  };
  std::vector<double> edges{-R};
  double s = -R;
  while (s < R) {
    double w = w_cap;
    for (int it = 0; it < 4; ++it) {
      const double g = local_g(s, s + w);
      const double wl = g > 0.0 ? 2.0 * kPi / (lambda * g) : INFINITY;
      w = std::min(w_cap, panel_nodes / nodes_per_wavelength * wl);
    }
    s = std::min(R, s + w);
    if (R - s < 1e-3 * w) s = R;
    edges.push_back(s);
  }
  // even panel count so the half-resolution pass can merge pairs
  if ((edges.size() - 1) % 2 == 1) {
    const double a = edges[edges.size() - 2];
    edges.insert(edges.end() - 1, 0.5 * (a + R));
  }
  return edges;
}

struct AxisRule {
  std::vector<double> x;
  std::vector<double> w;
};

AxisRule gl_nodes(const std::vector<double>& edges, int stride) {
  using Rule = boost::math::quadrature::gauss<double, 8>;
  const auto& a = Rule::abscissa();
  const auto& wt = Rule::weights();
  AxisRule r;
  for (size_t p = 0; p + stride < edges.size(); p += stride) {
    const double c = 0.5 * (edges[p] + edges[p + stride]);
    const double h = 0.5 * (edges[p + stride] - edges[p]);
    for (size_t i = 0; i < a.size(); ++i) {
      r.x.push_back(c + h * a[i]);
      r.w.push_back(h * wt[i]);
      if (a[i] != 0.0) {
        r.x.push_back(c - h * a[i]);
        r.w.push_back(h * wt[i]);
      }
    }
  }
  return r;
}

C tensor_sum(const PhaseProblem& p, double lambda, const std::vector<AxisRule>& rules) {
  const int n = p.n;
  const int n0 = static_cast<int>(rules[0].x.size());
  std::vector<C> partial(n0);
  parallel_shards(n0, [&](int i0) {
    std::vector<double> x(n);
    x[0] = rules[0].x[i0];
    C sum = 0.0;
    std::vector<size_t> idx(n, 0);
    // odometer over axes 1..n-1
    while (true) {
      double w = rules[0].w[i0];
      for (int a = 1; a < n; ++a) {
        x[a] = rules[a].x[idx[a]];
        w *= rules[a].w[idx[a]];
      }
      const double f = p.phi.eval(x);
      if (f != 0.0) sum += w * f * std::polar(1.0, lambda * p.g(x));
      int a = 1;
      for (; a < n; ++a) {
        if (++idx[a] < rules[a].x.size()) break;
        idx[a] = 0;
      }
      if (a >= n) break;
    }
    partial[i0] = sum;
  });
  C total = 0.0;
  for (const auto& v : partial) total += v;
  return total;
}

}  // namespace

PhaseProblem quadratic_phase_problem(const ScalarField& phi, double box_half_width, double shift) {
  PhaseProblem p;
  p.n = phi.dim;
  p.phi = phi;
  p.box_half_width = box_half_width;
  p.g = [shift](std::span<const double> x) { return 0.5 * dot(x, x) - shift; };
  p.grad = [](std::span<const double> x, std::span<double> out) {
    std::copy(x.begin(), x.end(), out.begin());
  };
  const int n = p.n;
  p.hessian = [n](std::span<const double>, std::span<double> h) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) h[i * n + j] = i == j ? 1.0 : 0.0;
  };
  p.x0.assign(n, 0.0);
  p.hess_C = 2.0;
  return p;
}

PhaseProblem negated_phase(const PhaseProblem& p) {
  PhaseProblem q = p;
  auto g = p.g;
  q.g = [g](std::span<const double> x) { return -g(x); };
  if (p.grad) {
    auto gr = p.grad;
    q.grad = [gr](std::span<const double> x, std::span<double> out) {
      gr(x, out);
      for (double& v : out) v = -v;
    };
  }
  if (p.hessian) {
    auto h = p.hessian;
    q.hessian = [h](std::span<const double> x, std::span<double> out) {
      h(x, out);
      for (double& v : out) v = -v;
    };
  }
  return q;
}

OscillatoryResult oscillatory_integral(const PhaseProblem& p, double lambda,
                                       const OscillatoryOptions& opts) {
  if (!(lambda >= 1.0)) throw Error(ErrorCode::BadParams, "lambda must be >= 1");
  if (p.n < 1 || p.n > 3) throw Error(ErrorCode::BadParams, "oscillatory integrals need n = 1..3");
  std::vector<std::vector<double>> edges(p.n);
  double total_nodes = 1.0;
  for (int a = 0; a < p.n; ++a) {
    edges[a] = axis_edges(p, a, lambda, opts.nodes_per_wavelength);
    total_nodes *= 8.0 * static_cast<double>(edges[a].size() - 1);
  }
  if (total_nodes > static_cast<double>(opts.max_nodes))
    throw Error(ErrorCode::ResolutionExceeded, "wavelength resolution needs too many nodes");
  std::vector<AxisRule> fine(p.n);
  std::vector<AxisRule> coarse(p.n);
  OscillatoryResult out;
  for (int a = 0; a < p.n; ++a) {
    fine[a] = gl_nodes(edges[a], 1);
    coarse[a] = gl_nodes(edges[a], 2);
    out.nodes_per_axis.push_back(static_cast<int>(fine[a].x.size()));
  }
  out.value = tensor_sum(p, lambda, fine);
  out.truncation_estimate = std::abs(out.value - tensor_sum(p, lambda, coarse));
  return out;
}

std::vector<double> phase_hessian(const PhaseProblem& p, std::span<const double> x) {
  const int n = p.n;
  std::vector<double> h(n * n);
  if (p.hessian) {
    p.hessian(x, h);
    return h;
  }
  const double s = 1e-4;
  std::vector<double> w(x.begin(), x.end());
  auto at = [&](int i, double di, int j, double dj) {
    w[i] += di;
    w[j] += dj;
    const double v = p.g(w);
    w[i] -= di;
    w[j] -= dj;
    return v;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      h[i * n + j] = (at(i, s, j, s) - at(i, s, j, -s) - at(i, -s, j, s) + at(i, -s, j, -s)) /
                     (4.0 * s * s);
    }
  }
  return h;
}

HessianInfo hessian_info(const PhaseProblem& p) {
  const int n = p.n;
  const auto h = phase_hessian(p, p.x0);
  Eigen::MatrixXd H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) H(i, j) = 0.5 * (h[i * n + j] + h[j * n + i]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  const auto& ev = es.eigenvalues();
  const double thr = 1e-8 * H.norm();
  HessianInfo info;
  info.det = 1.0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(ev[i]) <= thr) throw Error(ErrorCode::DegenerateHessian, "singular Hessian at x0");
    info.signature += ev[i] > 0 ? 1 : -1;
    info.det *= ev[i];
  }
  return info;
}

std::complex<double> stationary_phase_leading(const PhaseProblem& p, double lambda) {
  std::vector<double> gr(p.n);
  phase_gradient(p, p.x0, gr);
  if (norm(gr) > 1e-10) throw Error(ErrorCode::BadParams, "x0 is not a critical point of g");
  const auto info = hessian_info(p);
  const double amp = std::pow(2.0 * kPi / lambda, 0.5 * p.n) / std::sqrt(std::abs(info.det)) *
                     p.phi.eval(p.x0);
  return amp * std::polar(1.0, lambda * p.g(p.x0) + 0.25 * kPi * info.signature);
}

ResolventReport resolvent_bound_check(const ScalarField& f, const PhaseProblem& phase,
                                      double gamma_const, const std::vector<double>& nu_sweep,
                                      double slack) {
  if (!(gamma_const > 0.0)) throw Error(ErrorCode::BadParams, "Gamma must be a positive constant");
  if (!f.support_radius) throw Error(ErrorCode::NotCompactlySupported, "f needs compact support");
  if (nu_sweep.empty()) throw Error(ErrorCode::BadParams, "empty nu sweep");
  const int n = phase.n;
  if (f.dim != n || n < 2 || n > 3) throw Error(ErrorCode::BadParams, "resolvent check needs n = 2, 3");
  const auto& x0 = phase.x0;
  hessian_info(phase);

  // x0 on the edge of supp f: f vanishes at x0 but not arbitrarily close to it.
  if (f.eval(x0) == 0.0) {
    const auto probe = quad::sphere_rule(n, 32);
    for (double r : {1e-3, 1e-2}) {
      for (const auto& u : probe.dirs) {
        std::vector<double> x(n);
        for (int i = 0; i < n; ++i) x[i] = x0[i] + r * u[i];
        if (f.eval(x) != 0.0)
          throw Error(ErrorCode::CriticalPointOnSupportBoundary, "x0 lies on the boundary of supp f");
      }
    }
  }

  const double r_max = *f.support_radius + norm(x0);
  const auto rule = quad::sphere_rule(n, 64);
  const int n_dirs = static_cast<int>(rule.dirs.size());

  // Roots of g along each ray, found once.
  std::vector<std::vector<std::pair<double, double>>> roots(n_dirs);  // (r, |dg/dr|)
  for (int j = 0; j < n_dirs; ++j) {
    std::vector<double> x(n);
    auto gr = [&](double r) {
      for (int i = 0; i < n; ++i) x[i] = x0[i] + r * rule.dirs[j][i];
      return phase.g(x);
    };
    const int n_scan = 400;
    double a = 0.0;
    double ga = gr(a);
    for (int k = 1; k <= n_scan; ++k) {
      const double b = r_max * k / n_scan;
      const double gb = gr(b);
      if ((ga < 0.0) != (gb < 0.0)) {
        double lo = a;
        double hi = b;
        double glo = ga;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * r_max; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double gm = gr(mid);
          if ((gm < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = gm;
          } else {
            hi = mid;
          }
        }
        const double r0 = 0.5 * (lo + hi);
        const double h = 1e-6 * r_max;
        roots[j].push_back({r0, std::abs(gr(r0 + h) - gr(r0 - h)) / (2.0 * h)});
      }
      a = b;
      ga = gb;
    }
  }

  // Integrates q(x, g(x)) r^{n-1} over the ball with peaks resolved at the roots of g.
  auto integrate = [&](auto&& q, double width_scale) {
    std::vector<C> partial(n_dirs);
    parallel_shards(n_dirs, [&](int j) {
      std::vector<double> x(n);
      auto h = [&](double r) -> C {
        for (int i = 0; i < n; ++i) x[i] = x0[i] + r * rule.dirs[j][i];
        const double fv = f.eval(x);
        if (fv == 0.0) return 0.0;
        return std::pow(r, n - 1) * q(fv, phase.g(x));
      };
      auto piece = [&](double a, double b, double center, double width) {
        const auto res = quad::integrate_peaked_complex(h, a, b, center, width, 1e-10, 1e-16);
        if (!res.converged)
          throw Error(ErrorCode::QuadratureNonConvergent, "resolvent quadrature did not settle");
        return res.value;
      };
      const auto& rs = roots[j];
      C sum = 0.0;
      if (rs.empty()) sum = piece(0.0, r_max, 0.0, r_max);
      double a = 0.0;
      for (size_t k = 0; k < rs.size(); ++k) {
        const double b = k + 1 < rs.size() ? 0.5 * (rs[k].first + rs[k + 1].first) : r_max;
        sum += piece(a, b, rs[k].first, width_scale / std::max(rs[k].second, 1e-12));
        a = b;
      }
      partial[j] = rule.weights[j] * sum;
    });
    C total = 0.0;
    for (const auto& v : partial) total += v;
    return total;
  };

  const double abs_f = std::abs(integrate([](double fv, double) { return C(std::abs(fv), 0.0); }, 1.0));
  ResolventReport rep;
  rep.laplace_consistent = true;
  for (double nu : nu_sweep) {
    if (!(nu > 0.0 && nu <= 1.0)) throw Error(ErrorCode::NuOutOfRange, "need 0 < nu <= 1");
    ResolventRow row;
    row.nu = nu;
    const double width = nu * gamma_const;
    // nu / (nu Gamma + i g) = 1 / a with a = Gamma + i g / nu
    row.I = integrate([&](double fv, double g) { return fv / C(gamma_const, g / nu); }, width);
    row.abs_I = std::abs(row.I);
    row.bound_ratio = row.abs_I / (nu * chi_d(n, nu));
    const double t_end = 40.0 / gamma_const;
    row.I1 = integrate(
        [&](double fv, double g) {
          const C a(gamma_const, g / nu);
          return fv * (1.0 - std::exp(-nu * a)) / a;
        },
        width);
    row.I2 = integrate(
        [&](double fv, double g) {
          const C a(gamma_const, g / nu);
          return fv * (std::exp(-nu * a) - std::exp(-t_end * a)) / a;
        },
        width);
    row.I1_bound = nu * abs_f;
    if (std::abs(row.I1) > row.I1_bound * (1.0 + 1e-9) ||
        std::abs(row.I - row.I1 - row.I2) > 1e-8 * std::max(row.abs_I, 1e-300))
      rep.laplace_consistent = false;
    rep.rows.push_back(row);
  }
  rep.bounded = true;
  for (const auto& r : rep.rows)
    if (r.bound_ratio > slack * rep.rows.front().bound_ratio) rep.bounded = false;
  return rep;
}

}  // namespace singint
