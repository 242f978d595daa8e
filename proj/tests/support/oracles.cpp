#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace oracle {

namespace {

constexpr double kPi = std::numbers::pi;

// Composite 20-point Gauss-Legendre, 8 equal panels.
template <class T, class F>
T gk(F&& f, double a, double b) {
  if (!(b > a)) return T{};
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  const int panels = 8;
  const double h = (b - a) / panels;
  T sum{};
  for (int p = 0; p < panels; ++p) {
    const double c = a + (p + 0.5) * h;
    for (size_t i = 0; i < x.size(); ++i)
      sum += (0.5 * h * w[i]) * (f(c - 0.5 * h * x[i]) + f(c + 0.5 * h * x[i]));
  }
  return sum;
}

// Integral over [lo, hi] split at the given points and on a unit grid.
template <class T, class F>
T split_integral(F&& f, double lo, double hi, std::vector<double> cuts) {
  cuts.push_back(lo);
  cuts.push_back(hi);
  for (double g = std::ceil(lo); g < hi; g += 1.0) cuts.push_back(g);
  std::sort(cuts.begin(), cuts.end());
  T sum{};
  double prev = lo;
  for (double c : cuts) {
    if (c <= prev || c > hi) continue;
    sum += gk<T>(f, prev, c);
    prev = c;
  }
  return sum;
}

std::vector<double> geometric_cuts(double center, double lo, double hi) {
  std::vector<double> out;
  for (int k = -8; k <= 8; ++k) {
    const double c = center * std::pow(4.0, k);
    if (c > lo && c < hi) out.push_back(c);
  }
  return out;
}

double sphere_area(int n) { return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n); }

// Angular integral over the relative direction of x and y of 1 / ((p cos phi)^2 + c^2).
double angular_real(int d, double p, double c) {
  if (d == 2) return 4.0 * kPi * kPi / (c * std::sqrt(p * p + c * c));
  const double r = p / c;
  const double at = r < 1e-8 ? 1.0 : std::atan(r) / r;
  return 16.0 * kPi * kPi * at / (c * c);
}

// Same for 1 / (p cos phi + i c).
std::complex<double> angular_complex(int d, double p, double c) {
  if (d == 2) return {0.0, -4.0 * kPi * kPi / std::sqrt(p * p + c * c)};
  const double r = p / c;
  const double at = r < 1e-8 ? 1.0 : std::atan(r) / r;
  return {0.0, -16.0 * kPi * kPi * at / c};
}

template <class T, class K>
T ab_integral(int d, const Profile2& f, const Profile1& gamma, double nu, double R, K&& kernel) {
  auto outer = [&](double a) -> T {
    auto inner = [&](double b) -> T {
      const double fv = f(a, b);
      if (fv == 0.0) return T{};
      const double c = nu * gamma(std::hypot(a, b));
      return std::pow(a * b, d - 1) * fv * kernel(a * b, c);
    };
    const double bstar = a > 0.0 ? nu / a : R;
    return split_integral<T>(inner, 0.0, R, geometric_cuts(bstar, 0.0, R));
  };
  return split_integral<T>(outer, 0.0, R, geometric_cuts(std::sqrt(nu), 0.0, R));
}

}  // namespace

double I_nu(int d, const Profile2& f, const Profile1& gamma, double nu, double R) {
  return ab_integral<double>(d, f, gamma, nu, R,
                             [d](double p, double c) { return angular_real(d, p, c); });
}

std::complex<double> linear_divisor(int d, const Profile2& f, const Profile1& gamma, double nu,
                                    double R) {
  return ab_integral<std::complex<double>>(
      d, f, gamma, nu, R, [d](double p, double c) { return angular_complex(d, p, c); });
}

double surface(int d, const Profile2& h, double R) {
  const double c = sphere_area(d) * sphere_area(d - 1);
  auto outer = [&](double a) {
    auto inner = [&](double b) { return std::pow(a * b, d - 2) * std::hypot(a, b) * h(a, b); };
    return gk<double>(inner, 0.0, R);
  };
  return c * gk<double>(outer, 0.0, R);
}

double leading_A(int d, const Profile2& f, const Profile1& gamma, double R) {
  return surface(
      d, [&](double a, double b) { return f(a, b) / (std::hypot(a, b) * gamma(std::hypot(a, b))); },
      R);
}

double sphere(int d, const Profile1& f, const Profile1& gamma, double rho, double nu, double R) {
  auto h = [&](double r) {
    const double w = r * r - rho * rho;
    const double c = nu * gamma(r);
    return std::pow(r, d - 1) * f(r) / (w * w + c * c);
  };
  std::vector<double> cuts{rho};
  for (int k = -2; k <= 12; ++k) {
    const double off = nu * std::pow(4.0, k) / (2.0 * rho);
    if (rho - off > 0.0) cuts.push_back(rho - off);
    if (rho + off < R) cuts.push_back(rho + off);
  }
  return sphere_area(d) * split_integral<double>(h, 0.0, R, cuts);
}

double d1(const Profile1& f, const Profile1& gamma, double nu, double r1, double r2) {
  // int_0^{2 pi} d phi / (B sin^2 2phi + c^2) = 2 pi / (c sqrt(B + c^2)), B = r^4 / 4
  auto h = [&](double r) {
    const double c = nu * gamma(r);
    return r * f(r) * 2.0 * kPi / (c * std::sqrt(0.25 * std::pow(r, 4) + c * c));
  };
  return gk<double>(h, r1, r2);
}

double distance_to_quadric(std::span<const double> x, std::span<const double> y) {
  const size_t d = x.size();
  double c = 0.0;
  double s = 0.0;
  for (size_t i = 0; i < d; ++i) {
    c += x[i] * y[i];
    s += x[i] * x[i] + y[i] * y[i];
  }
  double best = std::sqrt(s);  // distance to the vertex
  if (c == 0.0) return 0.0;
  // c lambda^2 - s lambda + c = 0
  const double disc = std::sqrt(std::max(0.0, s * s - 4.0 * c * c));
  for (double lam : {(s - disc) / (2.0 * c), (s + disc) / (2.0 * c)}) {
    const double den = 1.0 - lam * lam;
    if (std::abs(den) < 1e-300) continue;
    double dist2 = 0.0;
    for (size_t i = 0; i < d; ++i) {
      const double wx = (x[i] - lam * y[i]) / den;
      const double wy = (y[i] - lam * x[i]) / den;
      dist2 += (x[i] - wx) * (x[i] - wx) + (y[i] - wy) * (y[i] - wy);
    }
    best = std::min(best, std::sqrt(dist2));
  }
  return best;
}

std::complex<double> gaussian_oscillatory(int n, double lambda) {
  const std::complex<double> one = std::sqrt(kPi / std::complex<double>(1.0, -0.5 * lambda));
  return std::pow(one, n);
}

McResult plain_mc(int dim, const std::function<double(std::span<const double>)>& f, double R,
                  std::int64_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-R, R);
  std::vector<double> z(dim);
  double sum = 0.0;
  double sum2 = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    for (double& v : z) v = u(rng);
    const double fv = f(z);
    sum += fv;
    sum2 += fv * fv;
  }
  const double vol = std::pow(2.0 * R, dim);
  const double mean = sum / n;
  const double var = std::max(0.0, sum2 / n - mean * mean);
  return {vol * mean, vol * std::sqrt(var / n)};
}

}  // namespace oracle
