#include "cpr/period_detection.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <tuple>

#include "cpr/errors.hpp"
#include "fft.hpp"

namespace cpr {

namespace {

// Spread below this fraction of the magnitude counts as flat.
constexpr double kFlatRelTol = 64.0 * DBL_EPSILON;

std::vector<std::size_t> ranked_peaks(std::span<const double> power,
                                      std::size_t count) {
  std::vector<std::size_t> bins;
  for (std::size_t k = 1; k < power.size(); ++k) {
    if (power[k] > 0.0) bins.push_back(k);
  }
  std::stable_sort(bins.begin(), bins.end(), [&](std::size_t a, std::size_t b) {
    return power[a] > power[b];
  });
  if (bins.size() > count) bins.resize(count);
  return bins;
}

bool in_range(std::size_t period, const DetectionConfig& config) {
  return period >= config.t_min && period <= config.t_max;
}

void push_unique(std::vector<std::size_t>& out, std::size_t v) {
  if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
}

std::vector<std::size_t> candidates_from_bins(std::span<const std::size_t> bins,
                                              std::size_t n_fft,
                                              std::span<const double> z,
                                              const DetectionConfig& config,
                                              bool refine) {
  std::vector<std::size_t> out;
  for (std::size_t k : bins) {
    const std::size_t centre = bin_period(n_fft, k);
    if (!refine) {
      if (in_range(centre, config)) push_unique(out, centre);
      continue;
    }
    // The bin only locates the period to within N/k^2 samples. Pick the
    // integer T with N/T in [k - 1/2, k + 1/2) that minimizes the shift
    // discrepancy over the whole window.
    const double n = static_cast<double>(n_fft);
    const auto first = std::max<std::size_t>(
        static_cast<std::size_t>(std::floor(n / (static_cast<double>(k) + 0.5))) + 1,
        config.t_min);
    const auto last = std::min<std::size_t>(
        {static_cast<std::size_t>(std::floor(n / (static_cast<double>(k) - 0.5))),
         config.t_max, z.size() / 2});
    std::optional<std::size_t> best;
    double best_loss = 0.0;
    for (std::size_t t = first; t <= last; ++t) {
      const double loss = period_loss(z, t);
      if (!best || loss < best_loss) {
        best = t;
        best_loss = loss;
      }
    }
    if (best) {
      push_unique(out, *best);
    } else if (in_range(centre, config)) {
      push_unique(out, centre);
    }
  }
  return out;
}

std::vector<std::size_t> window_candidates_with(detail::RealFft& fft,
                                                std::size_t n_fft,
                                                std::span<const double> z,
                                                const DetectionConfig& config) {
  const auto power = fft.power(preprocess_window(z, config.hann));
  const auto bins = ranked_peaks(power, config.peaks);
  return candidates_from_bins(bins, n_fft, z, config, config.refine);
}

double demeaned_cosine(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  double mag_a = 0.0;
  double mag_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    dot += da * db;
    na += da * da;
    nb += db * db;
    mag_a = std::max(mag_a, std::abs(a[i]));
    mag_b = std::max(mag_b, std::abs(b[i]));
  }
  const double ra = std::sqrt(na);
  const double rb = std::sqrt(nb);
  const double root_n = std::sqrt(n);
  // Zero-variance segment: no evidence of repetition.
  if (ra <= kFlatRelTol * mag_a * root_n || rb <= kFlatRelTol * mag_b * root_n) {
    return 0.0;
  }
  return std::clamp(dot / (ra * rb), -1.0, 1.0);
}

}  // namespace

DetectionConfig DetectionConfig::defaults_for(std::size_t n) {
  DetectionConfig c;
  c.t_min = 2;
  c.t_max = std::max<std::size_t>(n / 3, c.t_min);
  const std::size_t floor_scale = std::min<std::size_t>(4 * c.t_min, n);
  for (std::size_t s : {n / 8, n / 4, n / 2}) {
    s = std::min(std::max(s, floor_scale), n);
    push_unique(c.scales, s);
  }
  return c;
}

void DetectionConfig::validate() const {
  if (scales.empty()) throw DomainError("DetectionConfig: empty scale set");
  if (t_min < 2 || t_min > t_max) {
    throw DomainError("DetectionConfig: need 2 <= T_min <= T_max");
  }
  if (peaks < 1) throw DomainError("DetectionConfig: L must be >= 1");
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("DetectionConfig: tau outside (0,1)");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (scales[i] < 2 * t_min) {
      throw DomainError("DetectionConfig: scale " + std::to_string(scales[i]) +
                        " shorter than 2 T_min");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (scales[i] == scales[j]) throw DomainError("DetectionConfig: duplicate scale");
    }
  }
}

std::vector<std::size_t> window_starts(std::size_t n, std::size_t s) {
  if (s < 1 || s > n) throw DomainError("window_slices: need 1 <= s <= n");
  const std::size_t hop = std::max<std::size_t>(s / 2, 1);
  std::vector<std::size_t> starts;
  for (std::size_t start = 0; start + s <= n; start += hop) starts.push_back(start);
  return starts;
}

std::vector<std::span<const double>> window_slices(std::span<const double> x,
                                                   std::size_t s) {
  std::vector<std::span<const double>> out;
  for (std::size_t start : window_starts(x.size(), s)) {
    out.push_back(x.subspan(start, s));
  }
  return out;
}

std::vector<double> preprocess_window(std::span<const double> z, bool hann) {
  const std::size_t s = z.size();
  if (s < 2) throw DomainError("preprocess_window: need s >= 2");
  const double mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(s);
  std::vector<double> out(s);
  double spread = 0.0;
  double mag = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    out[i] = z[i] - mean;
    spread = std::max(spread, std::abs(out[i]));
    mag = std::max(mag, std::abs(z[i]));
  }
  if (spread <= kFlatRelTol * mag) {
    std::fill(out.begin(), out.end(), 0.0);
    return out;
  }
  if (hann) {
    const double denom = static_cast<double>(s - 1);
    for (std::size_t i = 0; i < s; ++i) {
      out[i] *= 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom));
    }
  }
  return out;
}

std::size_t bin_period(std::size_t n_fft, std::size_t k) {
  if (k < 1) throw DomainError("bin_period: k must be >= 1");
  return static_cast<std::size_t>(
      std::llround(static_cast<double>(n_fft) / static_cast<double>(k)));
}

std::size_t fft_length(std::size_t s) {
  std::size_t n = 1;
  while (n < s) n <<= 1;
  return n;
}

std::vector<std::size_t> spectral_peaks(std::span<const double> z,
                                        std::size_t count) {
  const std::size_t n_fft = fft_length(z.size());
  detail::RealFft fft(n_fft);
  const auto power = fft.power(z);
  return ranked_peaks(power, count);
}

std::vector<std::size_t> spectral_candidates(std::span<const double> z,
                                             const DetectionConfig& config) {
  const auto bins = spectral_peaks(z, config.peaks);
  return candidates_from_bins(bins, fft_length(z.size()), z, config, false);
}

std::vector<std::size_t> window_candidates(std::span<const double> z,
                                           const DetectionConfig& config) {
  const auto n_fft = fft_length(z.size());
  detail::RealFft fft(n_fft);
  return window_candidates_with(fft, n_fft, z, config);
}

std::optional<double> repeatability(std::span<const double> z, std::size_t period) {
  if (period < 1) throw DomainError("repeatability: T must be >= 1");
  const std::size_t fits = z.size() / period;
  if (fits < 2) return std::nullopt;
  const std::size_t segments = std::min<std::size_t>(3, fits);
  double total = 0.0;
  for (std::size_t m = 0; m + 1 < segments; ++m) {
    total += demeaned_cosine(z.subspan(m * period, period),
                             z.subspan((m + 1) * period, period));
  }
  return total / static_cast<double>(segments - 1);
}

std::optional<WindowEstimate> best_window_candidate(
    std::span<const double> z, std::span<const std::size_t> candidates,
    const DetectionConfig& config) {
  std::optional<WindowEstimate> best;
  for (std::size_t t : candidates) {
    if (!in_range(t, config)) continue;
    const auto rep = repeatability(z, t);
    if (!rep) continue;
    if (!best || *rep > best->rep || (*rep == best->rep && t < best->t_star)) {
      best = WindowEstimate{t, *rep};
    }
  }
  return best;
}

std::size_t lower_median(std::vector<std::size_t> values) {
  if (values.empty()) throw DomainError("lower_median: empty input");
  const std::size_t mid = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  return values[mid];
}

std::optional<ScaleEstimate> scale_estimate(std::span<const double> x,
                                            std::size_t s,
                                            const DetectionConfig& config) {
  if (s > x.size()) throw DomainError("scale_estimate: scale longer than series");
  const std::size_t n_fft = fft_length(s);
  detail::RealFft fft(n_fft);
  std::vector<std::size_t> periods;
  std::vector<double> reps;
  for (auto z : window_slices(x, s)) {
    const auto candidates = window_candidates_with(fft, n_fft, z, config);
    if (const auto est = best_window_candidate(z, candidates, config)) {
      periods.push_back(est->t_star);
      reps.push_back(est->rep);
    }
  }
  if (periods.empty()) return std::nullopt;
  std::sort(reps.begin(), reps.end());
  const std::size_t m = reps.size();
  const double q = (m % 2 == 1) ? reps[m / 2] : 0.5 * (reps[m / 2 - 1] + reps[m / 2]);
  return ScaleEstimate{s, lower_median(std::move(periods)), q};
}

std::size_t vote_tolerance(double tau, std::size_t period) {
  // The 1e-9 guard keeps products like 0.1 * 30 = 3.0000000000000004 at 3.
  const double raw = std::ceil(tau * static_cast<double>(period) - 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::max(raw, 0.0)));
}

std::size_t consensus_vote(std::span<const ScaleEstimate> estimates,
                           const DetectionConfig& config) {
  if (estimates.empty()) throw DomainError("consensus_vote: no scale estimates");
  std::vector<std::size_t> sorted_scales = config.scales;
  if (sorted_scales.empty()) {
    for (const auto& e : estimates) sorted_scales.push_back(e.scale);
  }
  std::sort(sorted_scales.begin(), sorted_scales.end());
  const std::size_t split = sorted_scales[(sorted_scales.size() - 1) / 2];

  struct Tally {
    std::size_t period;
    std::size_t support;
    double mean_rep;
    std::size_t deviation;
    bool both_sides;
  };
  // Ordering: support desc, mean repeatability desc, total deviation asc, T asc.
  const auto better = [](const Tally& a, const Tally& b) {
    if (a.support != b.support) return a.support > b.support;
    if (a.mean_rep != b.mean_rep) return a.mean_rep > b.mean_rep;
    if (a.deviation != b.deviation) return a.deviation < b.deviation;
    return a.period < b.period;
  };

  std::optional<Tally> best_eligible;
  std::optional<Tally> best_any;
  for (std::size_t t = config.t_min; t <= config.t_max; ++t) {
    const std::size_t delta = vote_tolerance(config.tau, t);
    Tally tally{t, 0, 0.0, 0, false};
    bool short_side = false;
    bool long_side = false;
    double rep_sum = 0.0;
    for (const auto& e : estimates) {
      const std::size_t dev = e.t_s > t ? e.t_s - t : t - e.t_s;
      if (dev > delta) continue;
      ++tally.support;
      rep_sum += e.q_s;
      tally.deviation += dev;
      (e.scale <= split ? short_side : long_side) = true;
    }
    if (tally.support == 0) continue;
    tally.mean_rep = rep_sum / static_cast<double>(tally.support);
    tally.both_sides = short_side && long_side;
    if (!best_any || better(tally, *best_any)) best_any = tally;
    if (tally.both_sides && (!best_eligible || better(tally, *best_eligible))) {
      best_eligible = tally;
    }
  }
  if (best_eligible) return best_eligible->period;
  if (best_any) return best_any->period;
  throw DetectionFailure("consensus_vote: no period in range has support");
}

std::size_t detect_period(const NormalizedSeries& x_priv,
                          const DetectionConfig& config) {
  config.validate();
  const auto x = x_priv.values();
  std::vector<ScaleEstimate> estimates;
  for (std::size_t s : config.scales) {
    if (s > x.size()) throw DomainError("detect_period: series shorter than max(S)");
    if (auto est = scale_estimate(x, s, config)) estimates.push_back(*est);
  }
  if (estimates.empty()) {
    throw DetectionFailure("detect_period: no scale produced a period estimate");
  }
  const std::size_t voted = consensus_vote(estimates, config);
  if (!config.refine) return voted;
  // The vote fixes T only up to its tolerance band; the whole stream pins it.
  // Lags kT for k = 1..K are pooled: a wrong T drifts by k samples at lag kT,
  // so later multiples separate neighbouring periods far better than lag T.
  const std::size_t delta = vote_tolerance(config.tau, voted);
  const std::size_t lo = std::max(config.t_min, voted > delta ? voted - delta : 1);
  const std::size_t hi = std::min({config.t_max, voted + delta, x.size() - 1});
  const std::size_t multiples = std::max<std::size_t>(1, x.size() / 2 / hi);
  const auto pooled_loss = [&](std::size_t t) {
    double acc = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 1; k <= multiples && k * t < x.size(); ++k, ++used) {
      acc += period_loss(x, k * t);
    }
    return acc / static_cast<double>(used);
  };
  std::size_t best = voted;
  double best_loss = pooled_loss(voted);
  for (std::size_t t = lo; t <= hi; ++t) {
    const double loss = pooled_loss(t);
    if (loss < best_loss || (loss == best_loss && t < best)) {
      best = t;
      best_loss = loss;
    }
  }
  return best;
}

}  // namespace cpr
