#pragma once

// Deterministic 1-D quadrature building blocks shared by the fiber, radial and variant
// integrators.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "singint/common.hpp"

namespace singint::quad {

/// Composite 8-point Gauss-Legendre on [a, b].
template <class F>
auto gauss8(F&& f, double a, double b) -> decltype(f(a)) {
  using Rule = boost::math::quadrature::gauss<double, 8>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  // Boost stores the non-negative half of the rule; an even order has no centre node.
  decltype(f(a)) sum{};
  for (size_t i = 0; i < x.size(); ++i)
    sum += x[i] == 0.0 ? w[i] * f(c) : w[i] * (f(c - h * x[i]) + f(c + h * x[i]));
  return h * sum;
}

struct PeakedResult {
  double value = 0.0;
  int levels = 0;
  int evaluations = 0;
  bool converged = false;
};

struct PeakedComplexResult {
  std::complex<double> value{};
  int levels = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Panel edges on [a, b] clustered geometrically (ratio 2) toward `center`, the smallest panel no
/// wider than width / 8.
std::vector<double> clustered_edges(double a, double b, double center, double width);

namespace detail {
template <class T, class F>
T integrate_on_edges(F& f, const std::vector<double>& edges, int level) {
  T sum{};
  const int split = 1 << level;
  for (size_t p = 0; p + 1 < edges.size(); ++p) {
    const double h = (edges[p + 1] - edges[p]) / split;
    for (int s = 0; s < split; ++s) {
      const double lo = edges[p] + s * h;
      sum += gauss8(f, lo, lo + h);
    }
  }
  return sum;
}
}  // namespace detail

/// Integrates f over [a, b] for integrands with a Lorentzian-type peak of half-width `width`
/// at `center`. Every panel is bisected per level until the relative change drops below
/// rel_tol (or the absolute change below abs_tol).
template <class F>
PeakedResult integrate_peaked(F&& f, double a, double b, double center, double width,
                              double rel_tol = 1e-8, double abs_tol = 0.0, int max_level = 12) {
  PeakedResult out;
  if (!(b > a)) return out;
  const auto edges = clustered_edges(a, b, center, width);
  const int n_panels = static_cast<int>(edges.size()) - 1;
  double prev = detail::integrate_on_edges<double>(f, edges, 0);
  out.evaluations = 15 * n_panels;
  for (int level = 1; level <= max_level; ++level) {
    const double cur = detail::integrate_on_edges<double>(f, edges, level);
    out.evaluations += 15 * n_panels * (1 << level);
    const double change = std::abs(cur - prev);
    prev = cur;
    if (change <= rel_tol * std::abs(cur) || change <= abs_tol) {
      out.value = cur;
      out.levels = level;
      out.converged = true;
      return out;
    }
  }
  out.value = prev;
  out.levels = max_level;
  return out;
}

template <class F>
PeakedComplexResult integrate_peaked_complex(F&& f, double a, double b, double center,
                                             double width, double rel_tol = 1e-8,
                                             double abs_tol = 0.0, int max_level = 12) {
  PeakedComplexResult out;
  if (!(b > a)) return out;
  const auto edges = clustered_edges(a, b, center, width);
  const int n_panels = static_cast<int>(edges.size()) - 1;
  auto prev = detail::integrate_on_edges<std::complex<double>>(f, edges, 0);
  out.evaluations = 15 * n_panels;
  for (int level = 1; level <= max_level; ++level) {
    const auto cur = detail::integrate_on_edges<std::complex<double>>(f, edges, level);
    out.evaluations += 15 * n_panels * (1 << level);
    const double change = std::abs(cur - prev);
    prev = cur;
    if (change <= rel_tol * std::abs(cur) || change <= abs_tol) {
      out.value = cur;
      out.levels = level;
      out.converged = true;
      return out;
    }
  }
  out.value = prev;
  out.levels = max_level;
  return out;
}

namespace detail {
template <class F>
double smooth_rec(F& f, double a, double b, double rel_tol, double abs_tol, int depth) {
  double err = 0.0;
  double l1 = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &err, &l1);
  if (depth == 0 || err <= std::max(rel_tol * l1, abs_tol)) return v;
  const double m = 0.5 * (a + b);
  return smooth_rec(f, a, m, rel_tol, 0.5 * abs_tol, depth - 1) +
         smooth_rec(f, m, b, rel_tol, 0.5 * abs_tol, depth - 1);
}
}  // namespace detail

/// Adaptive Gauss-Kronrod (15 point) on a finite interval.  The absolute floor is the larger of
/// abs_tol and rel_tol times the L1 norm of the first pass, halved on every split.
template <class F>
double integrate_smooth(F&& f, double a, double b, double rel_tol = 1e-12, double abs_tol = 0.0) {
  if (!(b > a)) return 0.0;
  double err = 0.0;
  double l1 = 0.0;
  boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &err, &l1);
  return detail::smooth_rec(f, a, b, rel_tol, std::max(abs_tol, rel_tol * l1), 20);
}

struct RadialResult {
  double value = 0.0;
  double t_max = 0.0;
};

struct RadialOptions {
  double t_min = 1e-6;
  double t_limit = 1e8;
  /// Stop once three octaves in a row each add less than this fraction of the total per panel.
  double tail_tol = 1e-12;
  double rel_tol = 1e-11;
  /// When set, add the [0, t_min] piece by power-law extrapolation of h near t_min.
  bool include_origin = true;
};

/// Integrates h(t) over (0, inf) (or [t_min, inf) when include_origin is false) on octave
/// panels in log t. Throws NonIntegrableProfile when the tail does not decay before t_limit
/// or the behaviour at 0 is not integrable.
RadialResult integrate_radial(const std::function<double(double)>& h,
                              const RadialOptions& opts = {});

/// Integrates h over [t_lo, inf) with the same octave scheme.
RadialResult integrate_radial_from(const std::function<double(double)>& h, double t_lo,
                                   const RadialOptions& opts = {});

struct SphereRule {
  std::vector<std::vector<double>> dirs;
  std::vector<double> weights;
};

/// Product rule on S^{n-1}: trapezoid in the azimuth (n_angle nodes) for n = 2; Gauss-Legendre
/// (64 nodes) in cos(polar) times the azimuthal trapezoid for n = 3.
SphereRule sphere_rule(int n, int n_angle);

}  // namespace singint::quad
