#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cpr {

// Finite real-valued series in arbitrary units, n >= 1.
class RawSeries {
 public:
  explicit RawSeries(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

// Series with every element in [0,1], n >= 1. Used for the normalized input,
// the privatized stream and the reconstruction alike.
class NormalizedSeries {
 public:
  explicit NormalizedSeries(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& vec() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

// One cycle of per-phase values in [0,1], length T >= 1.
class CycleTemplate {
 public:
  explicit CycleTemplate(std::vector<double> phases);

  std::span<const double> phases() const noexcept { return phases_; }
  std::size_t period() const noexcept { return phases_.size(); }

 private:
  std::vector<double> phases_;
};

// Min-max map onto [0,1]. A constant series maps to 0.5 everywhere.
NormalizedSeries normalize(const RawSeries& x);

// Mean squared shift discrepancy at lag T; requires 1 <= T < n.
double period_loss(std::span<const double> x, std::size_t lag);

// Reflect p samples at both ends without repeating the edge sample.
// Requires p <= n - 1.
std::vector<double> mirror_pad(std::span<const double> x, std::size_t p);

NormalizedSeries tile_crop(const CycleTemplate& r, std::size_t n);

// 1 - cos(a, b) on the vectors as given (no centering).
double cosine_distance(std::span<const double> a, std::span<const double> b);

// Linear interpolation at m equispaced positions spanning [0, n-1].
std::vector<double> resample_linear(std::span<const double> x, std::size_t m);

}  // namespace cpr
