#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "singint/parallel.hpp"
#include "singint/quadric_geometry.hpp"

using namespace singint;

namespace {

const double kPi = std::numbers::pi;

AmbientPoint pt(std::vector<double> x, std::vector<double> y) { return AmbientPoint(x, y); }

QuadricPoint random_base(int d, Rng& rng, double t) {
  std::vector<double> buf(2 * d);
  draw_sigma1_fibration(d, rng, buf);
  AmbientPoint z(d);
  for (int i = 0; i < 2 * d; ++i) z.z[i] = t * buf[i];
  return QuadricPoint::unchecked(z);
}

}  // namespace

TEST_CASE("omega examples") {
  CHECK(omega(pt({1, 0}, {0, 1})) == 0.0);
  CHECK(omega(pt({1, 0.5}, {0.5, 1})) == 1.0);
  CHECK(omega(pt({1, 1, 1}, {1, 1, 1})) == 3.0);
}

TEST_CASE("pi_map examples") {
  const QuadricPoint xi(pt({1, 0}, {0, 1}));
  const auto z = pi_map(xi, 0.5);
  CHECK(z.z[0] == 1.0);
  CHECK(z.z[1] == 0.5);
  CHECK(z.z[2] == 0.5);
  CHECK(z.z[3] == 1.0);
  CHECK(omega(z) == doctest::Approx(2.0 * 0.5));
  CHECK(z.norm() == doctest::Approx(std::sqrt(2.0) * std::sqrt(1.25)));
  const auto same = pi_map(xi, 0.0);
  for (int i = 0; i < 4; ++i) CHECK(same.z[i] == xi.p.z[i]);
  CHECK_THROWS_AS(QuadricPoint(pt({1, 0.5}, {0.5, 1})), Error);
}

TEST_CASE("invert_pi examples") {
  const auto inv = invert_pi(pt({1, 0.5}, {0.5, 1}));
  CHECK(inv.theta == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(inv.xi.p.z[0] == doctest::Approx(1.0));
  CHECK(std::abs(inv.xi.p.z[1]) < 1e-15);
  CHECK(std::abs(inv.xi.p.z[2]) < 1e-15);
  CHECK(inv.xi.p.z[3] == doctest::Approx(1.0));

  const auto on = invert_pi(pt({0.3, 0.0}, {0.0, -2.0}));
  CHECK(on.theta == 0.0);
  CHECK(on.xi.p.z[3] == doctest::Approx(-2.0));

  CHECK_THROWS_WITH_AS(invert_pi(pt({1, 0}, {1, 0})), doctest::Contains("DegeneratePoint"), Error);
}

TEST_CASE("distance to the quadric") {
  CHECK_THROWS_WITH_AS(dist_to_quadric(pt({1, 0.5}, {0.5, 1})), doctest::Contains("OutsideTube"),
                       Error);
  CHECK(dist_to_quadric(pt({1, 0.5}, {0.5, 1}), 0.6) == doctest::Approx(std::sqrt(2.0) * 0.5));
  CHECK(dist_to_quadric(pt({0.3, 0.0}, {0.0, -2.0})) == 0.0);

  Rng rng = make_rng(3, 1);
  for (int d : {2, 3}) {
    for (int i = 0; i < 200; ++i) {
      const auto xi = random_base(d, rng, 2.0);
      const double theta = i % 2 ? 0.05 : -0.03;
      const auto z = pi_map(xi, theta);
      const double lib = dist_to_quadric(z);
      const double ref = oracle::distance_to_quadric(z.x(), z.y());
      CHECK(lib == doctest::Approx(2.0 * std::abs(theta)).epsilon(1e-12));
      CHECK(lib == doctest::Approx(ref).epsilon(1e-10));
    }
  }
}

TEST_CASE("normal-coordinate identities on 1e4 random cases") {
  for (int d : {2, 3, 4}) {
    Rng rng = make_rng(42, d);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double e_omega = 0.0;
    double e_norm = 0.0;
    double e_round = 0.0;
    double e_dil = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double t = std::pow(10.0, -2.0 + 4.0 * u(rng));
      const auto xi = random_base(d, rng, t);
      const double theta = kDefaultTheta0 * (2.0 * u(rng) - 1.0);
      const auto z = pi_map(xi, theta);
      // relative to |z|^2: x.y itself is a cancellation of terms of that size
      e_omega = std::max(e_omega, std::abs(omega(z) - t * t * theta) / (t * t));
      e_norm = std::max(e_norm, std::abs(z.norm() / (t * std::sqrt(1.0 + theta * theta)) - 1.0));
      const auto inv = invert_pi(z);
      double r = std::abs(inv.theta - theta);
      for (int k = 0; k < 2 * d; ++k) r = std::max(r, std::abs(inv.xi.p.z[k] - xi.p.z[k]) / t);
      e_round = std::max(e_round, r);
      for (double s : {0.1, 3.0, 50.0}) {
        AmbientPoint sz = z;
        for (int k = 0; k < 2 * d; ++k) sz.z[k] *= s;
        const auto si = invert_pi(sz);
        double dr = std::abs(si.theta - inv.theta);
        for (int k = 0; k < 2 * d; ++k)
          dr = std::max(dr, std::abs(si.xi.p.z[k] - s * inv.xi.p.z[k]) / (s * t));
        e_dil = std::max(e_dil, dr);
      }
    }
    INFO("d = " << d);
    CHECK(e_omega < 1e-12);
    CHECK(e_norm < 1e-12);
    CHECK(e_round < 1e-10);
    CHECK(e_dil < 1e-14);
  }
}

TEST_CASE("away from the tube |x.y| >= c R^2 with one constant per d") {
  const double theta0 = kDefaultTheta0;
  for (int d : {2, 3}) {
    Rng rng = make_rng(8, d);
    std::vector<double> c_per_R;
    for (double R : {0.1, 1.0, 10.0}) {
      double c = INFINITY;
      int kept = 0;
      std::vector<double> u(2 * d);
      while (kept < 10000) {
        uniform_on_sphere(rng, u);
        AmbientPoint z(d);
        for (int i = 0; i < 2 * d; ++i) z.z[i] = R * u[i];
        const double dist = oracle::distance_to_quadric(z.x(), z.y());
        if (dist < 0.5 * theta0 * R / std::sqrt(1.0 + theta0 * theta0)) continue;
        ++kept;
        c = std::min(c, std::abs(omega(z)) / (R * R));
      }
      c_per_R.push_back(c);
    }
    const double c_fit = 0.9 * *std::min_element(c_per_R.begin(), c_per_R.end());
    INFO("d = " << d << " fitted c = " << c_fit);
    CHECK(c_fit > 0.01);
    for (double c : c_per_R) CHECK(c >= c_fit);
  }
}

TEST_CASE("volume element") {
  Rng rng = make_rng(9, 9);
  for (int d : {2, 3}) {
    for (int i = 0; i < 10; ++i) {
      const auto eta = random_base(d, rng, 1.0);
      CHECK(std::abs(mu_density(eta, 0.0).mu - 1.0) < 1e-8);
      for (int j = 0; j < 10; ++j) {
        const double theta = -0.09 + 0.02 * j;
        const auto a = mu_density(eta, theta, 1.0);
        const auto b = mu_density(eta, theta, 7.0);
        CHECK(std::abs(a.mu - b.mu) < 1e-8);
        CHECK(std::abs(a.mu - mu_closed_form(d, theta)) < 1e-8);
        CHECK(a.mu > 0.0);
      }
    }
  }
  // regression pin from the Gram route
  const double s = 1.0 / std::sqrt(2.0);
  const QuadricPoint eta(pt({s, 0}, {0, s}));
  CHECK(mu_density(eta, 0.05).mu == doctest::Approx(0.9975).epsilon(1e-9));
  CHECK_THROWS_AS(mu_density(QuadricPoint(pt({2, 0}, {0, 0})), 0.0), Error);
}

TEST_CASE("sigma1 samplers") {
  CHECK(sigma1_volume(2) == doctest::Approx(2.0 * kPi * kPi));
  CHECK(sigma1_volume(3) == doctest::Approx(4.0 * kPi * kPi));

  // Thin-slab weights are constant per shard; the hit count n drives the error, ~ mass / sqrt(n).
  auto mass = [](const std::vector<WeightedQuadricPoint>& pts) {
    double sum = 0.0;
    for (const auto& p : pts) sum += p.weight;
    return sum;
  };
  const auto pts = sample_sigma1(2, 20000, 5);
  for (const auto& p : pts) {
    CHECK(QuadricPoint::on_quadric(p.eta.p));
    CHECK(std::abs(p.eta.norm() - 1.0) < 1e-12);
  }
  const double m2 = mass(pts);
  CHECK(std::abs(m2 - 2.0 * kPi * kPi) <= 3.0 * m2 / std::sqrt(20000.0));

  Sigma1Options fib;
  fib.scheme = Sigma1Scheme::fibration;
  CHECK(mass(sample_sigma1(2, 100, 5, fib)) == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-12));

  // d = 3 by the thin slab at two widths; the two must also agree with each other
  std::vector<double> m3;
  for (double eps : {1e-2, 1e-3}) {
    Sigma1Options o;
    o.eps_slab = eps;
    m3.push_back(mass(sample_sigma1(3, 20000, 6, o)));
    INFO("eps = " << eps << " estimate " << m3.back());
    CHECK(std::abs(m3.back() - 4.0 * kPi * kPi) <= 3.0 * m3.back() / std::sqrt(20000.0));
  }
  CHECK(std::abs(m3[0] - m3[1]) <= 3.0 * std::sqrt(2.0) * m3[0] / std::sqrt(20000.0));
  Sigma1Options wide;
  wide.eps_slab = 0.05;
  CHECK_THROWS_WITH_AS(sample_sigma1(2, 10, 1, wide), doctest::Contains("SlabTooWide"), Error);
}

TEST_CASE("surface integrals by both methods") {
  auto g = [](std::span<const double> z) {
    const double r = norm(z);
    return std::exp(-r * r) / r;
  };
  const auto h = [](double a, double b) {
    const double r = std::hypot(a, b);
    return std::exp(-r * r) / r;
  };
  for (int d : {2, 3}) {
    const double ref = oracle::surface(d, h, 8.0);
    const auto c = surface_integral(d, g, SurfaceMethod::charts, 2000, 1);
    const auto s = surface_integral(d, g, SurfaceMethod::thin_slab, 1000000, 2);
    INFO("d = " << d << " ref " << ref << " charts " << c.value << " slab " << s.value);
    CHECK(std::abs(c.value - ref) <= 3.0 * c.std_error + 1e-9 * ref);
    CHECK(std::abs(s.value - ref) <= 3.0 * s.std_error);
    CHECK(std::abs(c.value - s.value) <= 3.0 * std::hypot(c.std_error, s.std_error));
  }
  CHECK(oracle::surface(2, h, 8.0) == doctest::Approx(kPi * kPi).epsilon(1e-9));
  CHECK(oracle::surface(3, h, 8.0) == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-9));
  const auto zero = surface_integral(2, [](std::span<const double>) { return 0.0; },
                                     SurfaceMethod::charts, 100, 1);
  CHECK(zero.value == 0.0);
  CHECK(zero.std_error == 0.0);
  CHECK_THROWS_WITH_AS(
      surface_integral(2, [](std::span<const double> z) { return 1.0 / (1.0 + norm(z)); },
                       SurfaceMethod::charts, 100, 1),
      doctest::Contains("NonIntegrableProfile"), Error);
}

TEST_CASE("tube coordinates round trip") {
  Rng rng = make_rng(4, 4);
  const auto xi = random_base(2, rng, 3.0);
  const auto z = pi_map(xi, 0.07);
  const auto tc = to_tube_coords(z);
  CHECK(tc.t == doctest::Approx(3.0));
  CHECK(tc.theta == doctest::Approx(0.07));
  const auto back = from_tube_coords(tc);
  for (int k = 0; k < 4; ++k) CHECK(back.z[k] == doctest::Approx(z.z[k]).epsilon(1e-13));
  CHECK_THROWS_AS(to_tube_coords(pi_map(xi, 0.3)), Error);
}
