#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "oracles.hpp"
#include "singint/parallel.hpp"
#include "singint/singular_integrator.hpp"

using namespace singint;

namespace {

const double kPi = std::numbers::pi;

double gauss_ab(double a, double b) { return std::exp(-a * a - b * b); }
double one(double) { return 1.0; }
double bracket2(double r) { return 1.0 + r * r; }

QuadricPoint eta_from(Rng& rng, int d) {
  AmbientPoint z(d);
  draw_sigma1_fibration(d, rng, z.coords());
  return QuadricPoint::unchecked(z);
}

}  // namespace

TEST_CASE("zero integrand") {
  const ProblemSpec spec(zero_field(4), const_weight(4));
  const auto est = evaluate_I_nu(spec, 0.1, 10000, 1);
  CHECK(est.value == 0.0);
  CHECK(est.std_error == 0.0);
}

TEST_CASE("I_nu against the (|x|, |y|) quadrature oracle") {
  SUBCASE("d = 2, Gamma = <z>^2, nu = 0.1") {
    const ProblemSpec spec(gaussian_field(4), poly_growth_weight(4, 2.0));
    const double ref = oracle::I_nu(2, gauss_ab, bracket2, 0.1, 8.0);
    const auto est = evaluate_I_nu(spec, 0.1, 1000000, 3);
    INFO(est.value << " +- " << est.std_error << " vs " << ref);
    CHECK(std::abs(est.value - ref) <= 0.01 * ref);
    CHECK(std::abs(est.value - ref) <= 4.0 * est.std_error);
  }
  SUBCASE("d = 2, Gamma = 1, nu = 0.01") {
    const ProblemSpec spec(gaussian_field(4), const_weight(4));
    const double ref = oracle::I_nu(2, gauss_ab, one, 0.01, 8.0);
    const auto est = evaluate_I_nu(spec, 0.01, 1000000, 4);
    INFO(est.value << " +- " << est.std_error << " vs " << ref);
    CHECK(std::abs(est.value - ref) <= 4.0 * est.std_error);
    CHECK(est.std_error < 0.002 * ref);
  }
  SUBCASE("d = 3, Gamma = 1, nu = 0.1") {
    const ProblemSpec spec(gaussian_field(6, 6.0), const_weight(6));
    const double ref = oracle::I_nu(3, gauss_ab, one, 0.1, 8.0);
    const auto est = evaluate_I_nu(spec, 0.1, 1000000, 5);
    INFO(est.value << " +- " << est.std_error << " vs " << ref);
    CHECK(std::abs(est.value - ref) <= 4.0 * est.std_error);
  }
}

TEST_CASE("stratified estimate agrees with plain Monte Carlo at nu = 0.25") {
  const ProblemSpec spec(gaussian_field(4), const_weight(4));
  const double nu = 0.25;
  const auto est = evaluate_I_nu(spec, nu, 200000, 6);
  const auto mc = oracle::plain_mc(
      4,
      [&](std::span<const double> z) {
        const double w = z[0] * z[2] + z[1] * z[3];
        return std::exp(-dot(z, z)) / (w * w + nu * nu);
      },
      4.5, 2000000, 7);
  const double sigma = std::hypot(est.std_error, mc.std_error);
  INFO(est.value << " vs " << mc.value << " sigma " << sigma);
  CHECK(std::abs(est.value - mc.value) <= 3.0 * sigma);
}

TEST_CASE("strata partition ambient space") {
  Rng rng = make_rng(1, 77);
  std::normal_distribution<double> n(0.0, 0.3);
  const double delta0 = origin_radius(0.01);
  CHECK(delta0 == 0.02);
  CHECK(origin_radius(0.1) == doctest::Approx(0.2));
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 100000; ++i) {
    AmbientPoint z(2);
    for (double& c : z.coords()) c = n(rng);
    if (i % 10 == 0)
      for (double& c : z.coords()) c *= 0.02;
    const auto s = classify_stratum(z, delta0);
    ++counts[static_cast<int>(s)];
    const bool in_ball = z.norm() <= delta0;
    Inverted inv;
    const bool in_tube = !in_ball && try_invert_pi(z, inv) && std::abs(inv.theta) < kDefaultTheta0;
    CHECK(static_cast<int>(in_ball) + static_cast<int>(in_tube) +
              static_cast<int>(!in_ball && !in_tube) == 1);
    CHECK((s == Stratum::origin) == in_ball);
    CHECK((s == Stratum::tube) == in_tube);
  }
  CHECK(counts[0] + counts[1] + counts[2] == 100000);
  CHECK(counts[0] > 0);
  CHECK(counts[1] > 0);
  CHECK(counts[2] > 0);
}

TEST_CASE("fiber integrals rebuild the tube stratum") {
  const ProblemSpec spec(gaussian_field(4), const_weight(4));
  const double nu = 0.1;
  const double delta0 = origin_radius(nu);
  const double theta0 = kDefaultTheta0;
  const double t_lo = delta0 / std::sqrt(1.0 + theta0 * theta0);
  const double t_max = radial_cutoff(spec);
  Rng rng = make_rng(2, 5);
  FiberOptions fo;
  fo.exclude_radius = delta0;
  double recon = 0.0;
  const int n_eta = 4;
  for (int i = 0; i < n_eta; ++i) {
    const auto eta = eta_from(rng, 2);
    auto h = [&](double u) {
      const double t = std::exp(u);
      return std::pow(t, 4) * fiber_integral(spec, nu, eta, t, fo).J_nu;
    };
    recon += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        h, std::log(t_lo), std::log(t_max), 12, 1e-9);
  }
  recon *= sigma1_volume(2) / n_eta;
  const auto est = evaluate_I_nu(spec, nu, 1000000, 8);
  const auto* tube = est.stratum("tube");
  REQUIRE(tube != nullptr);
  INFO(tube->value << " +- " << tube->std_error << " vs " << recon);
  CHECK(std::abs(tube->value - recon) <= 3.0 * tube->std_error);
}

TEST_CASE("fiber diagnostics satisfy the two-sided bounds") {
  const ProblemSpec spec(gaussian_field(4), const_weight(4));
  Rng rng = make_rng(3, 3);
  for (double nu : {1e-1, 1e-2}) {
    for (int i = 0; i < 5; ++i) {
      const auto eta = eta_from(rng, 2);
      for (double t : {0.5, 1.0, 2.0, 3.0}) {
        const auto fd = fiber_integral(spec, nu, eta, t);
        const double f0 = std::exp(-t * t);
        const double t4 = std::pow(t, 4);
        CHECK(fd.epsilon == doctest::Approx(nu / (t * t)));
        CHECK(std::abs(fd.J_0m) <= kPi / (fd.epsilon * t4) * f0 * (1.0 + 1e-12));
        if (fd.epsilon <= fd.theta_bar_0 / 2.0) {
          CHECK(fd.J_leading - fd.J_0m > 0.0);
          CHECK(fd.J_leading - fd.J_0m < 2.0 / fd.theta_bar_0 * f0 / t4);
        }
      }
    }
  }
  CHECK_THROWS_AS(fiber_integral(spec, 0.1, eta_from(rng, 2), 0.0), Error);
}

TEST_CASE("near-origin bound scales like delta^{2d-2}") {
  const ProblemSpec spec(gaussian_field(4), const_weight(4));
  const double nu = 0.05;
  std::vector<double> scaled;
  for (double delta : {0.2, 0.1, 0.05, 0.025}) {
    const auto r = near_origin_bound(spec, nu, delta, 200000, 4);
    CHECK(r.empirical.value <= r.bound);
    scaled.push_back(r.empirical.value / std::pow(delta, 2));
  }
  // bounded as delta -> 0 (for delta^2 << nu it even decays like delta^2 / nu^2)
  for (double s : scaled) CHECK(s <= 3.0 * scaled.front());
  const auto z = near_origin_bound(ProblemSpec(zero_field(4), const_weight(4)), nu, 0.1, 10000, 1);
  CHECK(z.empirical.value == 0.0);
  CHECK(z.empirical.value <= z.bound);
}

TEST_CASE("estimates are non-negative for non-negative F and reproducible") {
  const ProblemSpec spec(bump_annulus_field(4, 0.5, 2.0), poly_growth_weight(4, 2.0));
  const auto a = evaluate_I_nu(spec, 0.03, 100000, 9);
  const auto b = evaluate_I_nu(spec, 0.03, 100000, 9);
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  for (const auto& s : a.strata) CHECK(s.value >= 0.0);
  CHECK_THROWS_WITH_AS(evaluate_I_nu(spec, 1.5, 100000, 9), doctest::Contains("NuOutOfRange"),
                       Error);
}

TEST_CASE("budget doubling stops at the target error") {
  const ProblemSpec spec(gaussian_field(4), const_weight(4));
  IntegratorOptions o;
  o.target_rel_error = 2e-3;
  o.max_budget = 4000000;
  const auto est = evaluate_I_nu(spec, 0.1, 100000, 10, o);
  CHECK(est.converged);
  CHECK(est.std_error <= 2e-3 * est.value);
  o.max_budget = 100000;
  o.target_rel_error = 1e-6;
  CHECK_FALSE(evaluate_I_nu(spec, 0.1, 100000, 10, o).converged);
}
