#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "../support/oracles.hpp"
#include "cpr/errors.hpp"
#include "cpr/ldp_mechanisms.hpp"
#include "cpr/period_detection.hpp"
#include "doctest.h"

using cpr::DomainError;
using cpr::ScaleEstimate;

namespace {

cpr::DetectionConfig vote_config(std::vector<std::size_t> scales, double tau) {
  cpr::DetectionConfig c;
  c.scales = std::move(scales);
  c.t_min = 2;
  c.t_max = 200;
  c.tau = tau;
  return c;
}

std::vector<ScaleEstimate> estimates(const std::vector<std::size_t>& scales,
                                     const std::vector<std::size_t>& periods,
                                     const std::vector<double>& reps) {
  std::vector<ScaleEstimate> out;
  for (std::size_t i = 0; i < scales.size(); ++i) out.push_back({scales[i], periods[i], reps[i]});
  return out;
}

}  // namespace

TEST_CASE("DetectionConfig defaults and validation") {
  const auto c = cpr::DetectionConfig::defaults_for(1000);
  CHECK(c.scales == std::vector<std::size_t>{125, 250, 500});
  CHECK(c.t_min == 2);
  CHECK(c.t_max == 333);
  CHECK(c.peaks == 5);
  CHECK(c.tau == 0.1);
  CHECK(c.hann);
  CHECK_NOTHROW(c.validate());

  const auto tiny = cpr::DetectionConfig::defaults_for(40);
  CHECK(tiny.scales == std::vector<std::size_t>{8, 10, 20});

  auto bad = c;
  bad.t_min = 1;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = c;
  bad.tau = 1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = c;
  bad.peaks = 0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = c;
  bad.scales = {3};
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = c;
  bad.scales = {};
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = c;
  bad.t_max = 1;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("window_starts") {
  CHECK(cpr::window_starts(10, 4) == std::vector<std::size_t>{0, 2, 4, 6});
  CHECK(cpr::window_starts(4, 4) == std::vector<std::size_t>{0});
  CHECK(cpr::window_starts(9, 6) == std::vector<std::size_t>{0, 3});
  CHECK_THROWS_AS(cpr::window_starts(4, 5), DomainError);
  const std::vector<double> x(10, 0.5);
  CHECK(cpr::window_slices(x, 4).size() == 4);
}

TEST_CASE("preprocess_window") {
  const auto flat = cpr::preprocess_window(std::vector<double>{1, 1, 1, 1}, false);
  for (double v : flat) CHECK(v == 0.0);

  const std::vector<double> z{0.3, 0.9, 0.2, 0.55, 0.1};
  const auto d = cpr::preprocess_window(z, false);
  double mean = 0.0;
  for (double v : d) mean += v;
  CHECK(std::abs(mean / 5.0) <= 1e-12);

  const auto h = cpr::preprocess_window(std::vector<double>{0, 1}, true);
  CHECK(h[0] == 0.0);
  CHECK(std::abs(h[1]) <= 1e-17);
  CHECK_THROWS_AS(cpr::preprocess_window(std::vector<double>{1}, false), DomainError);
}

TEST_CASE("spectral candidates") {
  CHECK(cpr::fft_length(64) == 64);
  CHECK(cpr::fft_length(65) == 128);
  CHECK(cpr::fft_length(187) == 256);
  CHECK(cpr::bin_period(100, 3) == 33);
  CHECK(cpr::bin_period(64, 4) == 16);

  std::vector<double> tone(64);
  for (std::size_t t = 0; t < 64; ++t) tone[t] = std::sin(2 * M_PI * t / 16.0);
  auto config = vote_config({64}, 0.1);
  config.t_max = 32;
  const auto plain = cpr::spectral_candidates(cpr::preprocess_window(tone, false), config);
  REQUIRE_FALSE(plain.empty());
  CHECK(plain.front() == 16);
  CHECK(cpr::spectral_peaks(tone, 1) == std::vector<std::size_t>{4});

  const std::vector<double> zeros(64, 0.0);
  CHECK(cpr::spectral_candidates(zeros, config).empty());

  // Refined candidates for a raw window with a period between bin centres.
  std::vector<double> wave(128);
  for (std::size_t t = 0; t < 128; ++t) wave[t] = 0.5 + 0.5 * std::sin(2 * M_PI * t / 25.0);
  config.t_max = 60;
  const auto refined = cpr::window_candidates(wave, config);
  CHECK(std::find(refined.begin(), refined.end(), 25) != refined.end());
}

TEST_CASE("repeatability") {
  const std::vector<double> z{1, 2, 1, 2, 1, 2};
  CHECK(*cpr::repeatability(z, 2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*cpr::repeatability(z, 3) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_FALSE(cpr::repeatability(z, 4).has_value());
  CHECK_THROWS_AS(cpr::repeatability(z, 0), DomainError);

  // A flat segment contributes similarity 0.
  const std::vector<double> flat_then_wave{0.5, 0.5, 0.5, 0.1, 0.9, 0.1, 0.1, 0.9, 0.1};
  CHECK(*cpr::repeatability(flat_then_wave, 3) == doctest::Approx(0.5).epsilon(1e-12));

  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(90);
  for (double& v : w) v = u(gen);
  for (std::size_t T : {2u, 5u, 13u, 30u, 45u}) {
    const double base = *cpr::repeatability(w, T);
    for (double c : {0.01, 3.0, 250.0}) {
      std::vector<double> scaled(w);
      for (double& v : scaled) v *= c;
      CHECK(std::abs(*cpr::repeatability(scaled, T) - base) <= 1e-12);
    }
  }
}

TEST_CASE("best_window_candidate") {
  std::vector<double> tone(64);
  for (std::size_t t = 0; t < 64; ++t) tone[t] = 0.5 + 0.4 * std::sin(2 * M_PI * t / 16.0);
  const auto config = vote_config({64}, 0.1);
  const std::vector<std::size_t> one{16};
  const auto best = cpr::best_window_candidate(tone, one, config);
  REQUIRE(best.has_value());
  CHECK(best->t_star == 16);
  CHECK(best->rep == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_FALSE(cpr::best_window_candidate(tone, std::vector<std::size_t>{}, config).has_value());

  std::vector<double> p8(64);
  for (std::size_t t = 0; t < 64; ++t) p8[t] = (t % 8 < 3) ? 0.9 : 0.2;
  const std::vector<std::size_t> both{16, 8};
  const auto tie = cpr::best_window_candidate(p8, both, config);
  REQUIRE(tie.has_value());
  CHECK(tie->t_star == 8);
}

TEST_CASE("lower_median and vote tolerance") {
  CHECK(cpr::lower_median({20, 20, 20}) == 20);
  CHECK(cpr::lower_median({40, 18, 20, 20}) == 20);
  CHECK(cpr::lower_median({7}) == 7);
  CHECK(cpr::lower_median({9, 3}) == 3);
  CHECK_THROWS_AS(cpr::lower_median({}), DomainError);
  CHECK(cpr::vote_tolerance(0.1, 30) == 3);
  CHECK(cpr::vote_tolerance(0.1, 31) == 4);
  CHECK(cpr::vote_tolerance(0.1, 5) == 1);
  CHECK(cpr::vote_tolerance(0.05, 20) == 1);
}

TEST_CASE("scale_estimate") {
  const std::vector<double> flat(200, 0.4);
  const auto config = vote_config({50}, 0.1);
  CHECK_FALSE(cpr::scale_estimate(flat, 50, config).has_value());
  CHECK_THROWS_AS(cpr::scale_estimate(flat, 201, config), DomainError);

  const auto x = oracle::sine_wave(20, 400);
  auto c = vote_config({100}, 0.1);
  c.t_max = 50;
  const auto est = cpr::scale_estimate(x, 100, c);
  REQUIRE(est.has_value());
  CHECK(est->scale == 100);
  CHECK(est->t_s == 20);
  CHECK(est->q_s == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("consensus_vote examples") {
  const std::vector<std::size_t> S{64, 128, 256, 512};
  CHECK(cpr::consensus_vote(estimates(S, {20, 20, 20, 20}, {0.5, 0.5, 0.5, 0.5}),
                            vote_config(S, 0.1)) == 20);
  CHECK(cpr::consensus_vote(estimates(S, {10, 10, 10, 21}, {0.5, 0.5, 0.5, 0.5}),
                            vote_config(S, 0.1)) == 10);
  CHECK(cpr::consensus_vote(estimates(S, {20, 20, 40, 40}, {0.5, 0.5, 0.5, 0.5}),
                            vote_config(S, 0.05)) == 20);
  CHECK(cpr::consensus_vote(estimates(S, {20, 20, 40, 40}, {0.3, 0.3, 0.6, 0.6}),
                            vote_config(S, 0.05)) == 40);
  // Harmonic on a long scale only: the fundamental wins on support.
  CHECK(cpr::consensus_vote(estimates(S, {25, 25, 25, 50}, {0.9, 0.9, 0.9, 0.9}),
                            vote_config(S, 0.1)) == 25);
  // Equal support and repeatability for T and 2T: the smaller period wins.
  const std::vector<std::size_t> S2{64, 512};
  CHECK(cpr::consensus_vote(estimates(S2, {12, 24}, {0.8, 0.8}), vote_config(S2, 0.05)) == 12);
  CHECK_THROWS_AS(cpr::consensus_vote(std::vector<ScaleEstimate>{}, vote_config(S, 0.1)),
                  DomainError);
}

TEST_CASE("consensus_vote agrees with the exhaustive oracle") {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 300; ++trial) {
    std::uniform_int_distribution<int> count(1, 6);
    std::uniform_int_distribution<std::size_t> scale(8, 600);
    std::uniform_real_distribution<double> tau(0.01, 0.3);
    std::vector<std::size_t> S;
    const int k = count(gen);
    while (static_cast<int>(S.size()) < k) {
      const std::size_t s = scale(gen);
      if (std::find(S.begin(), S.end(), s) == S.end()) S.push_back(s);
    }
    auto config = vote_config(S, tau(gen));
    config.t_max = 80;
    std::uniform_int_distribution<std::size_t> period(2, 80);
    std::uniform_int_distribution<int> rep_level(-4, 4);
    std::vector<ScaleEstimate> est;
    for (std::size_t s : S) est.push_back({s, period(gen), rep_level(gen) / 4.0});
    CAPTURE(trial);
    CHECK(cpr::consensus_vote(est, config) ==
          oracle::consensus_vote(est, S, config.tau, config.t_min, config.t_max));
  }
}

TEST_CASE("detect_period") {
  const cpr::NormalizedSeries flat(std::vector<double>(400, 0.5));
  CHECK_THROWS_AS(cpr::detect_period(flat, cpr::DetectionConfig::defaults_for(400)),
                  cpr::DetectionFailure);

  const cpr::NormalizedSeries clean(oracle::sine_wave(40, 1000));
  CHECK(cpr::detect_period(clean, cpr::DetectionConfig::defaults_for(1000)) == 40);

  cpr::Rng rng(cpr::RngSeed{12});
  const auto priv = cpr::sw_perturb_series(clean, cpr::split_budget(250, 5), rng);
  const auto config = cpr::DetectionConfig::defaults_for(1000);
  const std::size_t first = cpr::detect_period(priv, config);
  CHECK(first == 40);
  CHECK(cpr::detect_period(priv, config) == first);

  auto too_long = config;
  too_long.scales = {1200};
  too_long.t_max = 300;
  CHECK_THROWS_AS(cpr::detect_period(clean, too_long), DomainError);

  // Whatever the noise, the answer stays inside the admissible range.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    cpr::Rng r(cpr::RngSeed{seed});
    const auto noisy = cpr::sw_perturb_series(clean, cpr::split_budget(0.5, 5), r);
    auto c = config;
    c.t_min = 5;
    c.t_max = 120;
    try {
      const std::size_t t = cpr::detect_period(noisy, c);
      CHECK(t >= 5);
      CHECK(t <= 120);
    } catch (const cpr::DetectionFailure&) {
    }
  }
}

TEST_CASE("refinement resolves periods between FFT bins") {
  // T = 50 is not round(N/k) for any N in {256, 512, 1024}.
  const cpr::NormalizedSeries x(oracle::square_wave(50, 1500));
  auto config = cpr::DetectionConfig::defaults_for(1500);
  CHECK(cpr::detect_period(x, config) == 50);
  config.refine = false;
  CHECK(cpr::detect_period(x, config) != 50);
}
