#pragma once

#include <cstdint>
#include <random>

#include "cpr/core_signal.hpp"

namespace cpr {

// Total window budget epsilon split evenly over the w releases of a window.
// eps0 is epsilon / w, lowered by a few ulp where needed so that w copies
// added in sequence never exceed epsilon.
struct BudgetSplit {
  double epsilon;
  std::size_t w;
  double eps0;
};

BudgetSplit split_budget(double epsilon, std::size_t w);

// Square Wave randomizer parameters for per-event budget eps0.
//
// p and q are the closed-form density levels. Confining the high interval to
// [0,1] leaves total mass 2bp + (1-2b)q < 1, so both levels are multiplied by
// norm_factor when evaluating or sampling. The ratio p/q = e^eps0 is unchanged.
struct SwParams {
  double eps0;
  double b;
  double p;
  double q;
  double norm_factor;

  double high() const noexcept { return norm_factor * p; }
  double low() const noexcept { return norm_factor * q; }
  // Probability that a sample lands in the high interval I_x.
  double high_mass() const noexcept { return 2.0 * b * high(); }
};

SwParams sw_params(double eps0);

struct Interval {
  double lo;
  double hi;
};

// The length-2b interval around x, shifted to stay inside [0,1].
Interval sw_interval(const SwParams& params, double x);

double sw_density(const SwParams& params, double y, double x);

struct RngSeed {
  std::uint64_t seed;
};

// Seeded 64-bit stream. Uniform draws use the top 53 bits of each word so
// output is bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(RngSeed seed) : engine_(seed.seed) {}

  // Uniform on [0,1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Laplace(0, scale) by inverse CDF.
  double laplace(double scale);

 private:
  std::mt19937_64 engine_;
};

double sw_perturb(const SwParams& params, double x, Rng& rng);

NormalizedSeries sw_perturb_series(const NormalizedSeries& x,
                                   const BudgetSplit& budget, Rng& rng);

// x_t + Lap(1/eps0), unclipped.
RawSeries laplace_perturb_series(const NormalizedSeries& x,
                                 const BudgetSplit& budget, Rng& rng);

}  // namespace cpr
