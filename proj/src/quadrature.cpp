#include "singint/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace singint::quad {

namespace {

// Edges on [lo, hi] starting at lo with first panel h0 and doubling widths.
void geometric_side(double lo, double hi, double h0, std::vector<double>& out) {
  double x = lo;
  double h = h0;
  while (x + h < hi * (1.0 - 1e-14) + lo * 1e-14 && hi - (x + h) > 1e-15 * std::abs(hi)) {
    x += h;
    out.push_back(x);
    h *= 2.0;
  }
}

}  // namespace

std::vector<double> clustered_edges(double a, double b, double center, double width) {
  const double c = std::clamp(center, a, b);
  const double w = width > 0.0 ? width : (b - a);
  std::vector<double> left;
  std::vector<double> right;
  if (c > a) geometric_side(0.0, c - a, std::min(w / 8.0, c - a), left);
  if (b > c) geometric_side(0.0, b - c, std::min(w / 8.0, b - c), right);

  std::vector<double> edges;
  edges.reserve(left.size() + right.size() + 3);
  edges.push_back(a);
  for (auto it = left.rbegin(); it != left.rend(); ++it) edges.push_back(c - *it);
  if (c > a && c < b) edges.push_back(c);
  for (double r : right) edges.push_back(c + r);
  edges.push_back(b);
  return edges;
}

RadialResult integrate_radial_from(const std::function<double(double)>& h, double t_lo,
                                   const RadialOptions& opts) {
  RadialResult out;
  // Panels in u = ln t, a quarter octave wide.
  const double du = 0.25 * std::log(2.0);
  auto g = [&](double u) {
    const double t = std::exp(u);
    return h(t) * t;
  };
  double u = std::log(t_lo);
  const double u_limit = std::log(opts.t_limit);
  double total = 0.0;
  int quiet = 0;
  double last_panel = 0.0;
  while (u < u_limit) {
    const double piece = integrate_smooth(g, u, u + du, opts.rel_tol, 1e-3 * opts.tail_tol * std::abs(total));
    total += piece;
    last_panel = piece;
    u += du;
    const double t = std::exp(u);
    if (t >= 1.0 && std::abs(piece) <= opts.tail_tol * std::abs(total) && total != 0.0) {
      if (++quiet >= 12) break;
    } else {
      quiet = 0;
    }
  }
  if (u >= u_limit && total != 0.0 && std::abs(last_panel) > opts.tail_tol * std::abs(total))
    throw Error(ErrorCode::NonIntegrableProfile, "radial tail does not decay before t_limit");
  out.value = total;
  out.t_max = std::exp(u);
  return out;
}

RadialResult integrate_radial(const std::function<double(double)>& h, const RadialOptions& opts) {
  RadialResult out = integrate_radial_from(h, opts.t_min, opts);
  if (!opts.include_origin) return out;
  // h(t) ~ c t^p on (0, t_min]; estimate p from two points.
  const double t1 = opts.t_min;
  const double t2 = 0.5 * opts.t_min;
  const double h1 = h(t1);
  const double h2 = h(t2);
  if (h1 == 0.0 && h2 == 0.0) return out;
  if (h1 == 0.0 || h2 == 0.0 || (h1 > 0) != (h2 > 0)) return out;
  const double p = std::log(h1 / h2) / std::log(t1 / t2);
  if (!(p > -1.0 + 1e-6))
    throw Error(ErrorCode::NonIntegrableProfile, "radial profile not integrable at t = 0");
  out.value += h1 * t1 / (p + 1.0);
  return out;
}

SphereRule sphere_rule(int n, int n_angle) {
  SphereRule rule;
  const double two_pi = 2.0 * std::numbers::pi;
  if (n == 2) {
    for (int j = 0; j < n_angle; ++j) {
      const double a = two_pi * j / n_angle;
      rule.dirs.push_back({std::cos(a), std::sin(a)});
      rule.weights.push_back(two_pi / n_angle);
    }
  } else if (n == 3) {
    using Rule = boost::math::quadrature::gauss<double, 32>;
    const auto& x = Rule::abscissa();
    const auto& w = Rule::weights();
    for (size_t i = 0; i < x.size(); ++i) {
      for (double sgn : {1.0, -1.0}) {
        if (x[i] == 0.0 && sgn < 0) continue;
        const double c = sgn * x[i];
        const double s = std::sqrt(1.0 - c * c);
        for (int j = 0; j < n_angle; ++j) {
          const double a = two_pi * j / n_angle;
          rule.dirs.push_back({s * std::cos(a), s * std::sin(a), c});
          rule.weights.push_back(w[i] * two_pi / n_angle);
        }
      }
    }
  } else {
    throw Error(ErrorCode::BadParams, "sphere rules exist for n = 2 and n = 3");
  }
  return rule;
}

}  // namespace singint::quad
