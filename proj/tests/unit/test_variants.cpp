#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "oracles.hpp"
#include "singint/variants.hpp"

using namespace singint;

namespace {
const double kPi = std::numbers::pi;
double radial_gauss(double r) { return std::exp(-r * r); }
double one(double) { return 1.0; }
}  // namespace

TEST_CASE("d = 1 cross") {
  const auto F = bump_annulus_field(2, 0.5, 2.0);
  const auto G = const_weight(2);
  SUBCASE("contour splits evenly over the four rays") {
    const auto c = contour_integral(F, G);
    const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [](double t) { return bump_annulus_profile(t, 0.5, 2.0) / t; }, 0.5, 2.0, 15, 1e-13);
    for (double v : c.per_ray) CHECK(v == doctest::Approx(ref).epsilon(1e-12));
    CHECK(c.value == doctest::Approx(4.0 * ref).epsilon(1e-14));
    CHECK(c.value > 0.0);
  }
  SUBCASE("I'_nu against the angular oracle") {
    for (double nu : {1e-1, 1e-2, 1e-3}) {
      const double ref = oracle::d1(
          [](double r) { return bump_annulus_profile(r, 0.5, 2.0); }, one, nu, 0.5, 2.0);
      CHECK(d1_integral(F, G, nu) == doctest::Approx(ref).epsilon(1e-6));
    }
  }
  SUBCASE("remainder ratio bounded over two decades") {
    const auto rep = d1_contour(F, G, {1e-1, 1e-2, 1e-3});
    CHECK(rep.bounded);
    for (const auto& r : rep.rows) CHECK(r.nu * r.I_nu == doctest::Approx(kPi * rep.contour.value).epsilon(0.2));
  }
  SUBCASE("reflection x -> -x relabels the rays") {
    const auto B = ball_bump_field(std::vector<double>{1.2, 0.2}, 0.6);
    const auto Br = ball_bump_field(std::vector<double>{-1.2, 0.2}, 0.6);
    const auto a = contour_integral(B, G);
    const auto b = contour_integral(Br, G);
    CHECK(a.per_ray[0] == doctest::Approx(b.per_ray[2]).epsilon(1e-10));
    CHECK(a.per_ray[1] == doctest::Approx(b.per_ray[1]).epsilon(1e-10));
    CHECK(d1_integral(B, G, 1e-2) == doctest::Approx(d1_integral(Br, G, 1e-2)).epsilon(1e-8));
  }
  CHECK_THROWS_WITH_AS(d1_contour(gaussian_field(2), G, {0.1}),
                       doctest::Contains("SupportTouchesOrigin"), Error);
}

TEST_CASE("sphere quadric") {
  SUBCASE("d = 2 and d = 3 against the radial oracle") {
    for (int d : {2, 3}) {
      const auto F = gaussian_field(d);
      const auto G = const_weight(d);
      for (double nu : {1e-1, 1e-2, 1e-3}) {
        const double ref = oracle::sphere(d, radial_gauss, one, 1.0, nu, 8.0);
        CHECK(sphere_integral(F, G, 1.0, nu) == doctest::Approx(ref).epsilon(1e-8));
      }
      const double area = d == 2 ? 2.0 * kPi : 4.0 * kPi;
      CHECK(sphere_surface_integral(F, G, 1.0) ==
            doctest::Approx(area / std::exp(1.0)).epsilon(1e-12));
    }
  }
  SUBCASE("leading coefficient carries 1 / |grad omega|") {
    const auto rep = sphere_quadric(gaussian_field(2), const_weight(2), 2.0, {1e-2, 1e-3, 1e-4});
    CHECK(rep.leading_coefficient == doctest::Approx(kPi * kPi / std::exp(1.0)).epsilon(1e-12));
    CHECK(rep.rows.back().nu * rep.rows.back().I_nu ==
          doctest::Approx(rep.leading_coefficient).epsilon(1e-3));
    CHECK(rep.bounded);
  }
  SUBCASE("dilation of a constant integrand") {
    const auto F = scaled(zero_field(2), 0.0);
    CHECK(sphere_quadric(F, const_weight(2), 2.0, {0.1}).rows[0].I_nu == 0.0);
    for (int d : {2, 3}) {
      ScalarField c = gaussian_field(d);
      c.eval = [](std::span<const double>) { return 1.0; };
      const double s1 = sphere_surface_integral(c, const_weight(d), 1.0);
      const double s2 = sphere_surface_integral(c, const_weight(d), 2.0);
      CHECK(s2 == doctest::Approx(std::pow(2.0, d - 1) * s1).epsilon(1e-13));
    }
  }
}

TEST_CASE("linear divisor") {
  const ProblemSpec spec(gaussian_field(4), const_weight(4));
  LinearDivisorOptions o;
  o.budget = 400000;
  SUBCASE("principal value of an even integrand vanishes") {
    const auto pv = principal_value(spec, o.budget, 11, o);
    CHECK(std::abs(pv.re) <= 3.0 * pv.re_error + 1e-12);
  }
  SUBCASE("I'_nu against the angular oracle") {
    for (double nu : {1e-1, 1e-2}) {
      const auto ref = oracle::linear_divisor(
          2, [](double a, double b) { return std::exp(-a * a - b * b); }, one, nu, 8.0);
      const auto est = linear_divisor_integral(spec, nu, o.budget, 5, o);
      CHECK(std::abs(est.im - ref.imag()) <= std::max(4.0 * est.im_error, 0.01 * std::abs(ref)));
      CHECK(std::abs(est.re - ref.real()) <= std::max(4.0 * est.re_error, 0.01 * std::abs(ref)));
    }
  }
  SUBCASE("limit is -i pi times the surface term") {
    const auto rep = linear_divisor(spec, {1e-3}, 3, o);
    CHECK(rep.surface_term == doctest::Approx(kPi * kPi).epsilon(0.01));
    CHECK(rep.rows[0].limit.im == doctest::Approx(-kPi * rep.surface_term));
    CHECK(rep.rows[0].converged);
  }
  SUBCASE("zero integrand") {
    const ProblemSpec z(zero_field(4), const_weight(4));
    const auto est = linear_divisor_integral(z, 1e-2, 10000, 1, o);
    CHECK(est.re == 0.0);
    CHECK(est.im == 0.0);
  }
}

TEST_CASE("kinetic kernel") {
  const std::vector<double> k0{0.0, 0.0};
  const auto Fk = separable_gaussian_kinetic(k0);
  const auto v = kinetic_kernel_demo(Fk, k0, 4000, 1);
  CHECK(std::abs(v.value - kPi * kPi) <= std::max(3.0 * v.std_error, 0.005 * kPi * kPi));

  // k = (1, 0): F~(x, y) = exp(-|x|^2 - |y|^2) again, since the separable Gaussian is centred at k.
  const std::vector<double> k1{1.0, 0.0};
  const auto v1 = kinetic_kernel_demo(separable_gaussian_kinetic(k1), k1, 4000, 1);
  CHECK(v1.value == doctest::Approx(v.value).epsilon(1e-12));

  KineticIntegrand weak = Fk;
  weak.decay_M = 2.0;
  CHECK_THROWS_WITH_AS(kinetic_kernel_demo(weak, k0, 100), doctest::Contains("DecayInsufficient"),
                       Error);
}
