#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cpr/core_signal.hpp"
#include "cpr/ldp_mechanisms.hpp"
#include "cpr/period_detection.hpp"

namespace cpr {

// Privatized samples pooled by within-cycle phase over the mirror-padded
// stream. groups[i] holds M values for phase i (0-based).
struct PhaseGroups {
  std::size_t t_hat;
  std::size_t repeats;  // M
  std::vector<std::vector<double>> groups;
};

PhaseGroups phase_groups(const NormalizedSeries& x_priv, std::size_t t_hat);

// How an observation's likelihood under latent grid cell b is evaluated.
enum class EmLikelihood {
  // f_SW(y | v_b) at the cell centre.
  point,
  // f_SW(y | x) averaged over x in the cell [(b-1)/B, b/B]. Agrees with the
  // point form when b spans several cells, and still resolves observations
  // when the SW interval is narrower than a cell (large eps0).
  cell,
};

struct EmConfig {
  std::size_t grid_size = 256;  // B
  std::size_t max_iters = 200;
  double tol = 1e-6;
  EmLikelihood likelihood = EmLikelihood::cell;

  void validate() const;
};

// Grid point v_b = (b - 1/2)/B for b = 1..B.
std::vector<double> em_grid(std::size_t grid_size);

struct EmResult {
  std::vector<double> pmf;             // latent pi over the grid
  std::vector<double> pseudo_samples;  // posterior means, one per observation
  std::size_t iterations = 0;
  // Observed-data log-likelihood of the initial pmf and after every update.
  std::vector<double> log_likelihood;
  // Sum of pi after every update.
  std::vector<double> pmf_sums;
};

EmResult em_sw_decode(std::span<const double> observations, const SwParams& params,
                      const EmConfig& config);

// Gaussian kernel estimate (1/(m h)) sum exp(-(x - z_j)^2 / (2 h^2)).
double kde_density(std::span<const double> samples, double h, double x);

// 1.06 * sd * m^(-1/5), floored at h_min.
double silverman_bandwidth(std::span<const double> samples, double h_min);

struct KdeModeOptions {
  std::size_t grid_points = 512;  // G
  double h_min = 1.0 / 1024.0;    // 1/(4B) for B = 256
  double bandwidth = 0.0;         // > 0 overrides Silverman
};

// Argmax of the KDE over G equispaced points of [0,1], ties to smaller x.
double kde_mode(std::span<const double> samples, const KdeModeOptions& options = {});

// EM decode and KDE mode per group. The result is indexed by stream phase
// (phase 0 = t mod T_hat == 0), ready for tile_crop.
CycleTemplate reconstruct_template(const PhaseGroups& pg, const SwParams& params,
                                   const EmConfig& em);

// Server side of CPR: detection and template recovery from the privatized
// stream only.
struct Reconstruction {
  NormalizedSeries x_hat;
  std::size_t t_hat;
};

Reconstruction cpr_recover(const NormalizedSeries& x_priv, double eps0,
                           const DetectionConfig& det, const EmConfig& em);

// Full pipeline: normalize, split budget, SW-perturb once, then cpr_recover.
// Throws DetectionFailure when no period is found.
Reconstruction cpr_reconstruct(const RawSeries& x_raw, double epsilon, std::size_t w,
                               const DetectionConfig& det, const EmConfig& em,
                               Rng& rng);

}  // namespace cpr
