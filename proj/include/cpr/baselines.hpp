#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cpr/core_signal.hpp"
#include "cpr/ldp_mechanisms.hpp"

namespace cpr {

struct BaselineConfig {
  std::size_t moving_window = 9;
  double filter_sigma = 2.0;
  std::size_t laplace_smooth_window = 9;
  double lbd_threshold_frac = 0.5;

  void validate() const;
};

// Centered moving average of odd width, mirror-reflected edges.
std::vector<double> moving_average(std::span<const double> x, std::size_t window);

// Gaussian taps for offsets -r..r, r = ceil(4 sigma), normalized to sum 1.
std::vector<double> gaussian_kernel(double sigma);

// Convolution with gaussian_kernel(sigma), mirror-reflected edges.
std::vector<double> gaussian_smooth(std::span<const double> x, double sigma);

NormalizedSeries baseline_sw_direct(const RawSeries& x, double epsilon, std::size_t w,
                                    Rng& rng);

NormalizedSeries baseline_sw_moving(const RawSeries& x, double epsilon, std::size_t w,
                                    const BaselineConfig& cfg, Rng& rng);

NormalizedSeries baseline_sw_filter(const RawSeries& x, double epsilon, std::size_t w,
                                    const BaselineConfig& cfg, Rng& rng);

NormalizedSeries baseline_laplace_smooth(const RawSeries& x, double epsilon,
                                         std::size_t w, const BaselineConfig& cfg,
                                         Rng& rng);

struct LbdResult {
  NormalizedSeries series;
  std::vector<double> spent;  // budget consumed at each time step
  std::vector<bool> published;
};

// Adaptive publication under a w-event budget. Each step spends
// epsilon/(2w) on a Laplace probe of |x_t - last release|. A new release
// uses half of the publication pool (epsilon/2 minus releases in the last
// w-1 steps) and happens only when the probe, less four times its noise
// scale, exceeds lbd_threshold_frac times that release's expected absolute
// error. The first step always releases.
// Otherwise the previous release is repeated.
LbdResult baseline_lbd(const RawSeries& x, double epsilon, std::size_t w,
                       const BaselineConfig& cfg, Rng& rng);

// Sum of ledger[t-w+1..t] (clamped at 0), accumulated in index order.
double window_spend(std::span<const double> ledger, std::size_t t, std::size_t w);

// Largest window_spend over all t.
double max_window_spend(std::span<const double> ledger, std::size_t w);

}  // namespace cpr
