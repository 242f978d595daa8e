#include "singint/surface_measure.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>

#include "singint/singular_integrator.hpp"

namespace singint {

const WeightedSurfaceMeasure& surface_measure(int d) {
  static std::array<WeightedSurfaceMeasure, kMaxHalfDim + 1> cache;
  static std::once_flag once;
  std::call_once(once, [] {
    for (int k = 1; k <= kMaxHalfDim; ++k) cache[k] = {k, sigma1_volume(k)};
  });
  if (d < 1 || d > kMaxHalfDim) throw Error(ErrorCode::BadParams, "half-dimension must be 1..4");
  return cache[d];
}

double ball_mass(int d, double r, double R) {
  if (!(r >= 0.0 && R > r)) throw Error(ErrorCode::BadParams, "ball_mass needs 0 <= r < R");
  if (d < 2) throw Error(ErrorCode::BadParams, "ball_mass needs d >= 2");
  const int k = 2 * d - 2;
  return surface_measure(d).sigma1_mass * (std::pow(R, k) - std::pow(r, k)) / k;
}

double weighted_sup_norm(const ScalarField& f, double m_norm) {
  const int n = f.dim;
  Rng rng = make_rng(5, 0x50f);
  std::vector<double> dir(n);
  std::vector<double> z(n);
  double sup = std::abs(f.eval(std::vector<double>(n, 0.0)));
  for (int k = 0; k < 64; ++k) {
    uniform_on_sphere(rng, dir);
    for (int i = 1; i <= 4000; ++i) {
      const double r = 1e-3 * std::pow(1e6, i / 4000.0);
      for (int j = 0; j < n; ++j) z[j] = r * dir[j];
      sup = std::max(sup, std::abs(f.eval(z)) * std::pow(japanese_bracket(r), m_norm));
    }
  }
  return sup;
}

double functional_constant(int d, double m_norm) {
  const int k = 2 * d - 2;
  if (!(m_norm > k)) throw Error(ErrorCode::NormExponentTooSmall, "need m > 2d - 2");
  const double mass = surface_measure(d).sigma1_mass;
  const long n_terms = 100000;
  double sum = 0.0;
  for (long R = 0; R < n_terms; ++R) {
    const double r = static_cast<double>(R);
    sum += std::pow(japanese_bracket(r), -m_norm) * (std::pow(r + 1.0, k) - std::pow(r, k)) / k;
  }
  // Remaining annuli: ((R+1)^k - R^k)/k <= (R+1)^{k-1} and <R>^{-m} <= R^{-m}, so the tail is at
  // most int_{N-1}^inf (x+2)^{k-1} x^{-m} dx <= ((N+1)/(N-1))^{k-1} (N-1)^{k-m} / (m-k).
  const double N = static_cast<double>(n_terms);
  sum += std::pow((N + 1.0) / (N - 1.0), k - 1) * std::pow(N - 1.0, k - m_norm) / (m_norm - k);
  return mass * sum;
}

MeasureIntegral integrate_measure(const ScalarField& f, double m_norm, std::int64_t budget,
                                  std::uint64_t seed) {
  if (f.dim % 2 != 0) throw Error(ErrorCode::BadParams, "field must live on R^{2d}");
  const int d = f.dim / 2;
  MeasureIntegral out;
  out.C3 = functional_constant(d, m_norm);
  out.f_norm = weighted_sup_norm(f, m_norm);
  out.bound = out.C3 * out.f_norm;
  auto g = [&f](std::span<const double> z) {
    const double r = norm(z);
    return r > 0.0 ? f.eval(z) / r : 0.0;
  };
  out.value = surface_integral(d, g, SurfaceMethod::charts, budget, seed);
  if (std::abs(out.value.value) > out.bound + 3.0 * out.value.std_error)
    throw Error(ErrorCode::BoundViolated, "|int f d mu| exceeds C3 |f|_m");
  return out;
}

WeakConvergenceReport weak_convergence_check(const WeightField& gamma, const ScalarField& f,
                                             const std::vector<double>& nu_sweep,
                                             std::int64_t budget, std::uint64_t seed) {
  if (!f.compactly_supported())
    throw Error(ErrorCode::NotCompactlySupported, "test function must have compact support");
  if (nu_sweep.empty()) throw Error(ErrorCode::BadParams, "empty nu sweep");
  const ProblemSpec spec(f, gamma);
  auto g = [&](std::span<const double> z) {
    const double v = f.eval(z);
    if (v == 0.0) return 0.0;
    const double r = norm(z);
    return r > 0.0 ? v / (r * gamma.eval(z)) : 0.0;
  };
  const auto lim = surface_integral(spec.d, g, SurfaceMethod::charts, 4000, seed);
  const double limit = std::numbers::pi * lim.value;
  const double limit_err = std::numbers::pi * lim.std_error;

  WeakConvergenceReport rep;
  for (size_t i = 0; i < nu_sweep.size(); ++i) {
    const double nu = nu_sweep[i];
    const auto est = evaluate_I_nu(spec, nu, budget, seed + 7919 * (i + 1));
    WeakConvergenceRow row;
    row.nu = nu;
    row.lhs = nu * est.value;
    row.lhs_error = nu * est.std_error;
    row.limit = limit;
    row.limit_error = limit_err;
    row.gap = std::abs(row.lhs - limit);
    rep.rows.push_back(row);
  }
  const auto& first = rep.rows.front();
  const auto& last = rep.rows.back();
  const double sigma = std::hypot(last.lhs_error, last.limit_error);
  rep.final_within_tolerance = last.gap <= std::max(3.0 * sigma, 0.05 * std::abs(limit));
  rep.decreasing = last.gap <= first.gap + 3.0 * std::hypot(sigma, first.lhs_error);
  return rep;
}

}  // namespace singint
