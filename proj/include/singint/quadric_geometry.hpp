#pragma once

// Geometry of the cone {x.y = 0} in R^{2d}: normal coordinates, their closed-form inverse,
// the volume density and samplers for the unit section.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "singint/common.hpp"
#include "singint/parallel.hpp"

namespace singint {

inline constexpr double kDefaultTheta0 = 0.1;

/// Point (x, y) with x.y = 0 up to 1e-12 (|x|^2 + |y|^2), not the origin.
struct QuadricPoint {
  AmbientPoint p;

  QuadricPoint() = default;
  /// Throws BadParams if z is off the quadric or zero.
  explicit QuadricPoint(const AmbientPoint& z);

  int d() const { return p.d; }
  std::span<const double> x() const { return p.x(); }
  std::span<const double> y() const { return p.y(); }
  std::span<const double> coords() const { return p.coords(); }
  double norm() const { return p.norm(); }

  static bool on_quadric(const AmbientPoint& z);
  /// Wraps without checking; for points produced by the samplers/inverse.
  static QuadricPoint unchecked(const AmbientPoint& z);
};

/// Normal-coordinate description (eta, t, theta) of a tube point.
struct TubeCoords {
  QuadricPoint eta;  // |eta| = 1
  double t = 0.0;
  double theta = 0.0;
  double theta0 = kDefaultTheta0;
};

struct JacobianSample {
  double mu = 0.0;
  double gram_det_sqrt = 0.0;
};

double omega(const AmbientPoint& z);
double omega(std::span<const double> x, std::span<const double> y);

/// (x + theta y, y + theta x) for xi = (x, y).
AmbientPoint pi_map(const QuadricPoint& xi, double theta);

struct Inverted {
  QuadricPoint xi;
  double theta = 0.0;
};

/// Closed-form inverse of pi_map; valid for every z with x + y != 0 and x - y != 0, giving
/// |theta| < 1. Throws DegeneratePoint otherwise.
Inverted invert_pi(const AmbientPoint& z);

/// Same without throwing; returns false on the degenerate set.
bool try_invert_pi(const AmbientPoint& z, Inverted& out);

TubeCoords to_tube_coords(const AmbientPoint& z, double theta0 = kDefaultTheta0);
AmbientPoint from_tube_coords(const TubeCoords& c);

/// |xi| |theta|; throws OutsideTube when |theta| >= theta0_star.
double dist_to_quadric(const AmbientPoint& z, double theta0_star = kDefaultTheta0);

/// Density mu(eta, theta) of dz = t^{2d-1} mu m(d eta) dt d theta from the Gram determinant of
/// the numerically differentiated parametrization, evaluated at base radius t.
JacobianSample mu_density(const QuadricPoint& eta, double theta, double t = 1.0,
                          double theta0 = kDefaultTheta0);

/// mu(eta, theta) = (1 - theta^2)^{d-1}. pi = (I + theta S) xi with S the swap (x, y) -> (y, x),
/// det(I + theta S) = (1 - theta^2)^d, and the normal component of (I + theta S)^{-1} S xi is
/// |xi| / (1 - theta^2).
double mu_closed_form(int d, double theta);

/// Riemannian volume m(Sigma^1) of the unit section {x.y = 0, |z| = 1}; d = 1 counts 4 points.
double sigma1_volume(int d);

enum class Sigma1Scheme { thin_slab, fibration };

struct WeightedQuadricPoint {
  QuadricPoint eta;
  double weight = 0.0;
};

struct Sigma1Options {
  Sigma1Scheme scheme = Sigma1Scheme::thin_slab;
  double eps_slab = 1e-3;
  double theta0 = kDefaultTheta0;
  int shards = kDefaultShards;
};

/// Weighted points on Sigma^1 whose weighted sums estimate integrals against m(d eta).
std::vector<WeightedQuadricPoint> sample_sigma1(int d, std::int64_t n, std::uint64_t seed,
                                                const Sigma1Options& opts = {});

/// One exact draw from the normalized measure m / m(Sigma^1): x = cos(phi) u,
/// y = sin(phi) v with u uniform on S^{d-1}, v uniform on the great sphere orthogonal to u,
/// and 2 phi distributed as the polar angle of a uniform point on S^{d-1}.
void draw_sigma1_fibration(int d, Rng& rng, std::span<double> out);

enum class SurfaceMethod { charts, thin_slab };

using AmbientFn = std::function<double(std::span<const double>)>;

struct SurfaceOptions {
  /// Slab half-widths for the thin-slab method; the result is extrapolated linearly to 0.
  double eps1 = 1e-2;
  double eps2 = 5e-3;
  /// Shape parameter of the heavy-tailed ambient proposal.
  double tail_alpha = 2.0;
  double radial_rel_tol = 1e-9;
  int shards = kDefaultShards;
};

/// Estimates int_{Sigma*} g dsigma, dsigma = t^{2d-2} m(d eta) dt. `budget` is the number of
/// base points (charts) or ambient samples (thin_slab).
IntegralEstimate surface_integral(int d, const AmbientFn& g, SurfaceMethod method,
                                  std::int64_t budget, std::uint64_t seed,
                                  const SurfaceOptions& opts = {});

/// int_0^inf t^{2d-2} g(t eta) dt by deterministic octave quadrature.
double radial_integral(const AmbientFn& g, const QuadricPoint& eta, double rel_tol = 1e-9);

}  // namespace singint
