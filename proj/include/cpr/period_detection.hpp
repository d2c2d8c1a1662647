#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cpr/core_signal.hpp"

namespace cpr {

struct DetectionConfig {
  std::vector<std::size_t> scales;  // probing window lengths S
  std::size_t t_min = 2;
  std::size_t t_max = 2;
  std::size_t peaks = 5;  // L, spectral peaks kept per window
  double tau = 0.1;       // relative vote tolerance
  bool hann = true;
  // Sharpen periods beyond FFT bin resolution: each peak k yields the period
  // in its bin with the lowest period_loss over the window, and the voted
  // period is re-picked within its tolerance band by period_loss over the
  // whole stream. With this off only round(N/k) is tried and the vote is final.
  bool refine = true;

  // S = {n/8, n/4, n/2} (each >= 4 T_min, <= n), T in [2, n/3], L = 5,
  // tau = 0.1, Hann on.
  static DetectionConfig defaults_for(std::size_t n);

  // Throws DomainError on violated invariants.
  void validate() const;
};

struct WindowEstimate {
  std::size_t t_star;
  double rep;
};

struct ScaleEstimate {
  std::size_t scale;
  std::size_t t_s;
  double q_s;
};

// Window start offsets (0-based) with hop floor(s/2).
std::vector<std::size_t> window_starts(std::size_t n, std::size_t s);
std::vector<std::span<const double>> window_slices(std::span<const double> x,
                                                   std::size_t s);

std::vector<double> preprocess_window(std::span<const double> z, bool hann);

// Positive-frequency non-DC bins of the zero-padded power spectrum, strongest
// first (ties toward lower k), zero-power bins excluded, at most `count`.
std::vector<std::size_t> spectral_peaks(std::span<const double> z,
                                        std::size_t count);

// Period round(N/k) of frequency bin k.
std::size_t bin_period(std::size_t n_fft, std::size_t k);

// Padded FFT length 2^ceil(log2 s).
std::size_t fft_length(std::size_t s);

// Top-L peaks of an already preprocessed window mapped through
// T(k) = round(N/k), range-filtered, deduplicated.
std::vector<std::size_t> spectral_candidates(std::span<const double> z,
                                             const DetectionConfig& config);

// Candidates for a raw window: preprocess, take the top-L peaks, and (when
// config.refine) replace round(N/k) by the period in the peak's bin with the
// smallest period_loss over the window.
std::vector<std::size_t> window_candidates(std::span<const double> z,
                                           const DetectionConfig& config);

// Mean adjacent cosine similarity of the first min(3, s/T) de-meaned length-T
// segments. nullopt when fewer than two segments fit.
std::optional<double> repeatability(std::span<const double> z, std::size_t period);

std::optional<WindowEstimate> best_window_candidate(
    std::span<const double> z, std::span<const std::size_t> candidates,
    const DetectionConfig& config);

std::optional<ScaleEstimate> scale_estimate(std::span<const double> x,
                                            std::size_t s,
                                            const DetectionConfig& config);

// Lower-middle element of the sorted values; values must be nonempty.
std::size_t lower_median(std::vector<std::size_t> values);

// Vote tolerance max(1, ceil(tau T)).
std::size_t vote_tolerance(double tau, std::size_t period);

std::size_t consensus_vote(std::span<const ScaleEstimate> estimates,
                           const DetectionConfig& config);

// Throws DetectionFailure when no scale yields an estimate.
std::size_t detect_period(const NormalizedSeries& x_priv,
                          const DetectionConfig& config);

}  // namespace cpr
