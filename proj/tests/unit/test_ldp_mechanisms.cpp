#include <cmath>
#include <vector>

#include "../support/oracles.hpp"
#include "cpr/errors.hpp"
#include "cpr/ldp_mechanisms.hpp"
#include "doctest.h"

using cpr::DomainError;

TEST_CASE("split_budget") {
  CHECK(cpr::split_budget(5, 5).eps0 == 1.0);
  // 0.2 added 25 times overshoots 5, so the share sits just below 0.2.
  const double share = cpr::split_budget(5, 25).eps0;
  CHECK(share < 0.2);
  CHECK(0.2 - share <= 4 * (0.2 - std::nextafter(0.2, 0.0)));
  CHECK(cpr::split_budget(1, 1).eps0 == 1.0);
  CHECK_THROWS_AS(cpr::split_budget(0, 5), DomainError);
  CHECK_THROWS_AS(cpr::split_budget(-1, 5), DomainError);
  CHECK_THROWS_AS(cpr::split_budget(1, 0), DomainError);
  CHECK_THROWS_AS(cpr::split_budget(INFINITY, 1), DomainError);

  for (double eps : {0.5, 1.0, 2.0, 5.0, 7.5, 0.1 + 0.2}) {
    for (std::size_t w : {1u, 2u, 3u, 4u, 5u, 8u, 10u, 25u}) {
      const auto s = cpr::split_budget(eps, w);
      const double ulp = std::nextafter(eps, INFINITY) - eps;
      CHECK(std::abs(s.eps0 * static_cast<double>(w) - eps) <= static_cast<double>(w) * ulp);
      double window = 0.0;
      for (std::size_t i = 0; i < w; ++i) window += s.eps0;
      CHECK(window <= eps);
    }
  }
}

TEST_CASE("sw_params closed forms") {
  const auto p1 = cpr::sw_params(1.0);
  CHECK(p1.b == doctest::Approx(0.2561).epsilon(2e-4));
  CHECK(p1.p == doctest::Approx(1.1363).epsilon(1e-4));
  CHECK(p1.q == doctest::Approx(0.4180).epsilon(1e-4));
  CHECK(p1.p / p1.q == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  CHECK(cpr::sw_params(5.0).b < p1.b);
  CHECK_THROWS_AS(cpr::sw_params(0.0), DomainError);
  CHECK_THROWS_AS(cpr::sw_params(-2.0), DomainError);

  for (double eps0 : {0.04, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0}) {
    CAPTURE(eps0);
    const auto got = cpr::sw_params(eps0);
    const auto want = oracle::sw_closed_form(eps0);
    CHECK(got.b == doctest::Approx(want.b).epsilon(1e-9));
    CHECK(got.p == doctest::Approx(want.p).epsilon(1e-9));
    CHECK(got.q == doctest::Approx(want.q).epsilon(1e-9));
    CHECK(got.norm_factor == doctest::Approx(want.norm).epsilon(1e-9));
    CHECK(std::abs(got.p / got.q - std::exp(eps0)) <= 1e-9 * std::exp(eps0));
    CHECK(got.b > 0.0);
    CHECK(got.p > got.q);
    CHECK(got.q > 0.0);
    for (double x : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      CHECK(std::abs(oracle::sw_mass(got, x) - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("sw_density") {
  const auto p = cpr::sw_params(1.0);
  CHECK(cpr::sw_density(p, 0.5, 0.5) == p.high());
  CHECK(cpr::sw_density(p, 0.9, 0.0) == p.low());
  CHECK(cpr::sw_density(p, 0.1, 0.0) == p.high());
  CHECK(cpr::sw_density(p, 0.99, 1.0) == p.high());
  CHECK_THROWS_AS(cpr::sw_density(p, 1.1, 0.5), DomainError);
  CHECK_THROWS_AS(cpr::sw_density(p, 0.5, -0.1), DomainError);

  const auto in = cpr::sw_interval(p, 0.0);
  CHECK(in.lo == 0.0);
  CHECK(in.hi == doctest::Approx(2 * p.b));

  // Worst-case ratio on a 101^3 grid.
  for (double eps0 : {0.5, 2.0}) {
    const auto q = cpr::sw_params(eps0);
    double worst = 0.0;
    for (int iy = 0; iy <= 100; ++iy) {
      for (int ix = 0; ix <= 100; ++ix) {
        const double fx = cpr::sw_density(q, iy / 100.0, ix / 100.0);
        for (int jx = 0; jx <= 100; ++jx) {
          worst = std::max(worst, fx / cpr::sw_density(q, iy / 100.0, jx / 100.0));
        }
      }
    }
    CHECK(std::abs(worst - std::exp(eps0)) <= 1e-9 * std::exp(eps0));
  }
}

TEST_CASE("Rng is deterministic and uniform draws stay in [0,1)") {
  cpr::Rng a(cpr::RngSeed{42});
  cpr::Rng b(cpr::RngSeed{42});
  cpr::Rng c(cpr::RngSeed{43});
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    differs = differs || (u != c.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(differs);
}

TEST_CASE("sw_perturb in-interval frequency") {
  const auto p = cpr::sw_params(1.0);
  cpr::Rng rng(cpr::RngSeed{1});
  const int n = 1000000;
  const auto in = cpr::sw_interval(p, 0.5);
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const double y = cpr::sw_perturb(p, 0.5, rng);
    REQUIRE(y >= 0.0);
    REQUIRE(y <= 1.0);
    hits += (y >= in.lo && y <= in.hi);
  }
  const double mass = p.high_mass();
  const double se = std::sqrt(mass * (1 - mass) / n);
  CHECK(std::abs(hits / static_cast<double>(n) - mass) <= 3 * se);
}

TEST_CASE("sw_perturb near-noiseless regime") {
  // The analytic in-interval mass at eps0 = 50 is about 0.98, not 0.999:
  // 2bp -> (eps0 - 1)/eps0 as eps0 grows.
  const auto p = cpr::sw_params(50.0);
  CHECK(p.high_mass() == doctest::Approx(49.0 / 50.0).epsilon(1e-3));
  cpr::Rng rng(cpr::RngSeed{5});
  const auto in = cpr::sw_interval(p, 0.5);
  const int n = 200000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const double y = cpr::sw_perturb(p, 0.5, rng);
    hits += (y >= in.lo && y <= in.hi);
  }
  const double se = std::sqrt(p.high_mass() * (1 - p.high_mass()) / n);
  CHECK(std::abs(hits / static_cast<double>(n) - p.high_mass()) <= 3 * se);

  const cpr::NormalizedSeries half(std::vector<double>(10000, 0.5));
  cpr::Rng rng2(cpr::RngSeed{6});
  const auto out = cpr::sw_perturb_series(half, cpr::split_budget(250, 5), rng2);
  double mean = 0.0;
  for (double v : out.values()) mean += v;
  CHECK(std::abs(mean / 10000.0 - 0.5) <= 0.02);
}

TEST_CASE("sw_perturb matches the density (chi-square)") {
  for (double eps0 : {0.5, 2.0}) {
    for (double x : {0.0, 0.3, 0.5, 0.97}) {
      CAPTURE(eps0);
      CAPTURE(x);
      const auto p = cpr::sw_params(eps0);
      cpr::Rng rng(cpr::RngSeed{static_cast<std::uint64_t>(eps0 * 1000 + x * 100)});
      std::vector<double> ys(200000);
      for (double& y : ys) y = cpr::sw_perturb(p, x, rng);
      CHECK(oracle::chi_square(ys, p, x, 50).p_value > 0.001);
    }
  }
}

TEST_CASE("sw_perturb_series") {
  const cpr::NormalizedSeries one({0.3});
  cpr::Rng r1(cpr::RngSeed{9});
  CHECK(cpr::sw_perturb_series(one, cpr::split_budget(1, 1), r1).size() == 1);

  const cpr::NormalizedSeries x(oracle::sine_wave(20, 300));
  cpr::Rng a(cpr::RngSeed{77});
  cpr::Rng b(cpr::RngSeed{77});
  const auto ya = cpr::sw_perturb_series(x, cpr::split_budget(2, 4), a);
  const auto yb = cpr::sw_perturb_series(x, cpr::split_budget(2, 4), b);
  CHECK(ya.vec() == yb.vec());
  CHECK_THROWS_AS(cpr::sw_perturb(cpr::sw_params(1), 1.5, a), DomainError);
}

TEST_CASE("laplace_perturb_series") {
  const cpr::NormalizedSeries x(oracle::sine_wave(10, 100));
  cpr::Rng rng(cpr::RngSeed{3});
  const auto sharp = cpr::laplace_perturb_series(x, cpr::split_budget(1e9, 1), rng);
  for (std::size_t t = 0; t < x.size(); ++t) CHECK(std::abs(sharp[t] - x[t]) < 1e-6);

  const cpr::NormalizedSeries zeros(std::vector<double>(1000000, 0.0));
  cpr::Rng rng2(cpr::RngSeed{4});
  const auto noisy = cpr::laplace_perturb_series(zeros, cpr::split_budget(5, 5), rng2);
  double ss = 0.0;
  double mean = 0.0;
  for (double v : noisy.values()) {
    ss += v * v;
    mean += v;
  }
  CHECK(std::abs(ss / 1e6 - 2.0) < 0.03);
  CHECK(std::abs(mean / 1e6) < 0.01);

  cpr::Rng a(cpr::RngSeed{8});
  cpr::Rng b(cpr::RngSeed{8});
  const auto la = cpr::laplace_perturb_series(x, cpr::split_budget(1, 1), a);
  const auto lb = cpr::laplace_perturb_series(x, cpr::split_budget(1, 1), b);
  CHECK(std::equal(la.values().begin(), la.values().end(), lb.values().begin()));
}
