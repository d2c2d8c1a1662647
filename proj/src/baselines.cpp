#include "cpr/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "cpr/errors.hpp"

namespace cpr {

namespace {

// Without the margin a constant stream republishes on ~e^-1 of steps.
constexpr double kProbeMargin = 3.0;

std::vector<double> convolve_mirrored(std::span<const double> x,
                                      std::span<const double> taps) {
  const std::size_t radius = taps.size() / 2;
  if (radius == 0) return {x.begin(), x.end()};
  if (radius > x.size() - 1) {
    throw DomainError("smoothing: kernel wider than the series allows");
  }
  const auto padded = mirror_pad(x, radius);
  std::vector<double> out(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    double acc = 0.0;
    for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k] * padded[t + k];
    out[t] = acc;
  }
  return out;
}

std::vector<double> clip_unit(std::vector<double> v) {
  for (double& e : v) e = std::clamp(e, 0.0, 1.0);
  return v;
}

}  // namespace

void BaselineConfig::validate() const {
  if (moving_window < 1 || moving_window % 2 == 0) {
    throw DomainError("BaselineConfig: moving_window must be odd and >= 1");
  }
  if (laplace_smooth_window < 1 || laplace_smooth_window % 2 == 0) {
    throw DomainError("BaselineConfig: laplace_smooth_window must be odd and >= 1");
  }
  if (!(filter_sigma > 0.0)) throw DomainError("BaselineConfig: filter_sigma must be positive");
  if (!(lbd_threshold_frac > 0.0 && lbd_threshold_frac < 1.0)) {
    throw DomainError("BaselineConfig: lbd_threshold_frac outside (0,1)");
  }
}

std::vector<double> moving_average(std::span<const double> x, std::size_t window) {
  if (window < 1 || window % 2 == 0) {
    throw DomainError("moving_average: window must be odd and >= 1");
  }
  const std::vector<double> taps(window, 1.0 / static_cast<double>(window));
  return convolve_mirrored(x, taps);
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw DomainError("gaussian_kernel: sigma must be positive");
  const auto radius = static_cast<std::size_t>(std::ceil(4.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (std::size_t k = 0; k < taps.size(); ++k) {
    const double d = static_cast<double>(k) - static_cast<double>(radius);
    taps[k] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += taps[k];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

std::vector<double> gaussian_smooth(std::span<const double> x, double sigma) {
  const auto taps = gaussian_kernel(sigma);
  return convolve_mirrored(x, taps);
}

NormalizedSeries baseline_sw_direct(const RawSeries& x, double epsilon, std::size_t w,
                                    Rng& rng) {
  return sw_perturb_series(normalize(x), split_budget(epsilon, w), rng);
}

NormalizedSeries baseline_sw_moving(const RawSeries& x, double epsilon, std::size_t w,
                                    const BaselineConfig& cfg, Rng& rng) {
  const auto priv = baseline_sw_direct(x, epsilon, w, rng);
  return NormalizedSeries(clip_unit(moving_average(priv.values(), cfg.moving_window)));
}

NormalizedSeries baseline_sw_filter(const RawSeries& x, double epsilon, std::size_t w,
                                    const BaselineConfig& cfg, Rng& rng) {
  const auto priv = baseline_sw_direct(x, epsilon, w, rng);
  return NormalizedSeries(clip_unit(gaussian_smooth(priv.values(), cfg.filter_sigma)));
}

NormalizedSeries baseline_laplace_smooth(const RawSeries& x, double epsilon,
                                         std::size_t w, const BaselineConfig& cfg,
                                         Rng& rng) {
  const auto noisy = laplace_perturb_series(normalize(x), split_budget(epsilon, w), rng);
  return NormalizedSeries(
      clip_unit(moving_average(noisy.values(), cfg.laplace_smooth_window)));
}

double window_spend(std::span<const double> ledger, std::size_t t, std::size_t w) {
  const std::size_t first = t + 1 >= w ? t + 1 - w : 0;
  double sum = 0.0;
  for (std::size_t i = first; i <= t; ++i) sum += ledger[i];
  return sum;
}

double max_window_spend(std::span<const double> ledger, std::size_t w) {
  double worst = 0.0;
  for (std::size_t t = 0; t < ledger.size(); ++t) {
    worst = std::max(worst, window_spend(ledger, t, w));
  }
  return worst;
}

LbdResult baseline_lbd(const RawSeries& x, double epsilon, std::size_t w,
                       const BaselineConfig& cfg, Rng& rng) {
  const BudgetSplit budget = split_budget(epsilon, w);
  const NormalizedSeries xn = normalize(x);
  const std::size_t n = xn.size();
  const double probe_share = epsilon / (2.0 * static_cast<double>(w));
  const double pool = epsilon / 2.0;

  std::vector<double> spent(n, 0.0);
  std::vector<double> release_spend(n, 0.0);
  std::vector<double> released(n, 0.0);
  std::vector<bool> published(n, false);
  double last = 0.5;

  // The window ending at t is the only one a spend at t can newly overflow;
  // later windows are checked when their own steps spend.
  const auto fits = [&](std::size_t t, double amount) {
    const double saved = spent[t];
    spent[t] = saved + amount;
    const bool ok = window_spend(spent, t, budget.w) <= epsilon;
    spent[t] = saved;
    return ok;
  };
  // Largest amount <= request that fits, judged by window_spend itself so the
  // ledger audit can never disagree by rounding.
  const auto shrink_to_fit = [&](std::size_t t, double amount) {
    if (fits(t, amount)) return amount;
    amount = std::min(amount, std::max(0.0, epsilon - window_spend(spent, t, budget.w)));
    for (int i = 0; i < 64 && amount > 0.0 && !fits(t, amount); ++i) {
      amount = std::nextafter(amount, 0.0);
    }
    return fits(t, amount) ? amount : 0.0;
  };

  for (std::size_t t = 0; t < n; ++t) {
    const double probe = shrink_to_fit(t, probe_share);
    double dissimilarity = 0.0;
    if (probe > 0.0) {
      const double noisy = xn[t] + rng.laplace(1.0 / probe);
      // Bias-correct by the mean absolute probe noise, then demand a further
      // kProbeMargin noise scales so a noisy probe alone rarely triggers.
      dissimilarity = std::abs(noisy - last) - (1.0 + kProbeMargin) / probe;
      spent[t] += probe;
    }

    double used = 0.0;
    const std::size_t first = t + 1 >= w ? t + 1 - w : 0;
    for (std::size_t i = first; i < t; ++i) used += release_spend[i];
    const double share = shrink_to_fit(t, std::max(0.0, pool - used) / 2.0);
    const bool release =
        share > 0.0 && (t == 0 || dissimilarity > cfg.lbd_threshold_frac / share);
    if (release) {
      last = xn[t] + rng.laplace(1.0 / share);
      spent[t] += share;
      release_spend[t] = share;
      published[t] = true;
    }
    released[t] = std::clamp(last, 0.0, 1.0);
  }
  return LbdResult{NormalizedSeries(std::move(released)), std::move(spent),
                   std::move(published)};
}

}  // namespace cpr
