#pragma once

// Reference computations used by the tests. None of them goes through the library's
// integrators: they reduce the integrals by symmetry and use Boost quadrature directly.

#include <complex>
#include <cstdint>
#include <functional>
#include <span>

namespace oracle {

using Profile2 = std::function<double(double a, double b)>;  // a = |x|, b = |y|
using Profile1 = std::function<double(double r)>;

/// For F = f(|x|, |y|) and Gamma = gamma(|z|) (d = 2, 3) the angle between x and y integrates in
/// closed form and I_nu becomes a 2-D integral over (a, b) in [0, R]^2.
double I_nu(int d, const Profile2& f, const Profile1& gamma, double nu, double R);

/// A = int_{Sigma*} F / (|z| Gamma) dsigma = |S^{d-1}| |S^{d-2}| int (ab)^{d-2} F / Gamma da db.
double leading_A(int d, const Profile2& f, const Profile1& gamma, double R);

/// int_{Sigma*} h dsigma for h depending on (|x|, |y|) only.
double surface(int d, const Profile2& h, double R);

/// int F / (x.y + i nu Gamma) for the same class of integrands (d = 2, 3).
std::complex<double> linear_divisor(int d, const Profile2& f, const Profile1& gamma, double nu,
                                    double R);

/// int_{R^d} F / ((|z|^2 - rho^2)^2 + (nu Gamma)^2) dz for radial F, Gamma.
double sphere(int d, const Profile1& f, const Profile1& gamma, double rho, double nu, double R);

/// d = 1: int_{R^2} F / ((xy)^2 + (nu Gamma)^2) for radial F, Gamma supported in [r1, r2].
double d1(const Profile1& f, const Profile1& gamma, double nu, double r1, double r2);

/// Euclidean distance from (x, y) to {x.y = 0} via the Lagrange conditions
/// (I + lambda S) w = z, w_x . w_y = 0.
double distance_to_quadric(std::span<const double> x, std::span<const double> y);

/// int_{R^n} e^{-|x|^2} e^{i lambda |x|^2 / 2} dx = (pi / (1 - i lambda / 2))^{n/2}.
std::complex<double> gaussian_oscillatory(int n, double lambda);

/// Plain Monte Carlo of f over the box [-R, R]^dim; returns mean and standard error.
struct McResult {
  double value;
  double std_error;
};
McResult plain_mc(int dim, const std::function<double(std::span<const double>)>& f, double R,
                  std::int64_t n, std::uint64_t seed);

}  // namespace oracle
