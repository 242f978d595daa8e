#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "oracles.hpp"
#include "singint/stationary_phase.hpp"

using namespace singint;

namespace {
const double kPi = std::numbers::pi;
using C = std::complex<double>;
}  // namespace

TEST_CASE("oscillatory integral basics") {
  SUBCASE("zero amplitude") {
    const auto p = quadratic_phase_problem(zero_field(2), 3.0);
    CHECK(std::abs(oscillatory_integral(p, 10.0).value) == 0.0);
  }
  SUBCASE("constant phase factorizes") {
    auto p = quadratic_phase_problem(gaussian_field(1), 6.5);
    p.g = [](std::span<const double>) { return 0.7; };
    p.grad = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    const auto r = oscillatory_integral(p, 3.0);
    const C ref = std::exp(C(0.0, 3.0 * 0.7)) * std::sqrt(kPi);
    CHECK(std::abs(r.value - ref) <= 1e-13);
  }
  SUBCASE("gaussian against the exact transform") {
    for (int n : {1, 2}) {
      const auto p = quadratic_phase_problem(gaussian_field(n), 6.5);
      for (double lambda : {1.0, 10.0, 40.0}) {
        const auto r = oscillatory_integral(p, lambda);
        const C ref = oracle::gaussian_oscillatory(n, lambda);
        CHECK(std::abs(r.value - ref) <= 1e-6 * std::abs(ref));
        CHECK(r.truncation_estimate <= 1e-6 * std::abs(ref));
      }
    }
  }
  SUBCASE("phase -g gives the conjugate") {
    const std::vector<double> c{0.2, -0.1};
    const auto p = quadratic_phase_problem(ball_bump_field(c, 1.5), 2.0, 0.1);
    const auto a = oscillatory_integral(p, 30.0).value;
    const auto b = oscillatory_integral(negated_phase(p), 30.0).value;
    CHECK(std::abs(a - std::conj(b)) <= 1e-12 * std::abs(a));
  }
  SUBCASE("grid budget") {
    OscillatoryOptions o;
    o.max_nodes = 1000;
    const auto p = quadratic_phase_problem(gaussian_field(2), 6.5);
    CHECK_THROWS_WITH_AS(oscillatory_integral(p, 100.0, o), doctest::Contains("ResolutionExceeded"),
                         Error);
  }
}

TEST_CASE("stationary phase leading term") {
  const auto p = quadratic_phase_problem(gaussian_field(2), 6.5);
  const auto h = hessian_info(p);
  CHECK(h.det == doctest::Approx(1.0));
  CHECK(h.signature == 2);
  const C lead = stationary_phase_leading(p, 50.0);
  CHECK(std::abs(lead - (2.0 * kPi / 50.0) * C(0.0, 1.0)) <= 1e-14);

  // FD Hessian path and a negative-definite phase
  auto q = negated_phase(p);
  q.hessian = nullptr;
  const auto hq = hessian_info(q);
  CHECK(hq.signature == -2);
  CHECK(hq.det == doctest::Approx(1.0).epsilon(1e-6));

  SUBCASE("error decays like lambda^{-n/2-1}") {
    for (int n : {1, 2}) {
      const auto pn = quadratic_phase_problem(gaussian_field(n), 6.5);
      std::vector<double> lx;
      std::vector<double> ly;
      for (double lambda : {20.0, 40.0, 80.0}) {
        const C exact = oracle::gaussian_oscillatory(n, lambda);
        lx.push_back(std::log(lambda));
        ly.push_back(std::log(std::abs(exact - stationary_phase_leading(pn, lambda))));
      }
      const double slope = (ly.back() - ly.front()) / (lx.back() - lx.front());
      CHECK(slope == doctest::Approx(-0.5 * n - 1.0).epsilon(0.05));
    }
  }

  SUBCASE("degenerate Hessian") {
    auto d = p;
    d.g = [](std::span<const double> x) { return 0.5 * x[0] * x[0]; };
    d.grad = nullptr;
    d.hessian = nullptr;
    CHECK_THROWS_WITH_AS(hessian_info(d), doctest::Contains("DegenerateHessian"), Error);
  }
}

TEST_CASE("resolvent bound") {
  const std::vector<double> sweep{1e-1, 1e-2, 1e-3};
  SUBCASE("n = 2 with the zero set crossing the support") {
    const std::vector<double> c{0.0, 0.0};
    const auto f = ball_bump_field(c, 1.0);
    const auto p = quadratic_phase_problem(f, 1.0, 0.1);
    const auto rep = resolvent_bound_check(f, p, 1.0, sweep);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.bounded);
    CHECK(rep.laplace_consistent);
    for (const auto& r : rep.rows) CHECK(std::abs(r.I1) <= r.I1_bound * (1.0 + 1e-9));
    // |I| -> pi nu int_{g=0} f / |grad g| up to the log: the ratio stays of order one
    CHECK(rep.rows.back().bound_ratio > 0.0);
  }
  SUBCASE("n = 3") {
    const std::vector<double> c{0.0, 0.0, 0.0};
    const auto f = ball_bump_field(c, 1.0);
    const auto p = quadratic_phase_problem(f, 1.0, 0.1);
    const auto rep = resolvent_bound_check(f, p, 1.0, {1e-1, 1e-2});
    CHECK(rep.bounded);
    CHECK(rep.laplace_consistent);
  }
  SUBCASE("zero test function") {
    const std::vector<double> c{0.0, 0.0};
    auto f = ball_bump_field(c, 1.0);
    f = scaled(f, 0.0);
    const auto p = quadratic_phase_problem(f, 1.0, 0.1);
    const auto rep = resolvent_bound_check(f, p, 1.0, {0.1, 0.01});
    for (const auto& r : rep.rows) CHECK(r.abs_I == 0.0);
    CHECK(rep.bounded);
  }
  SUBCASE("critical point on the support boundary") {
    const std::vector<double> c{1.0, 0.0};
    const auto f = ball_bump_field(c, 1.0);
    const auto p = quadratic_phase_problem(f, 2.0, 0.1);
    CHECK_THROWS_WITH_AS(resolvent_bound_check(f, p, 1.0, {0.1}),
                         doctest::Contains("CriticalPointOnSupportBoundary"), Error);
  }
}
