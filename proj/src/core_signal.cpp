#include "cpr/core_signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpr/errors.hpp"

namespace cpr {

namespace {

void require_unit_interval(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw DomainError(std::string(what) + ": value outside [0,1]");
    }
  }
}

}  // namespace

RawSeries::RawSeries(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DomainError("RawSeries: empty series");
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("RawSeries: non-finite value");
  }
}

NormalizedSeries::NormalizedSeries(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) throw DomainError("NormalizedSeries: empty series");
  require_unit_interval(values_, "NormalizedSeries");
}

CycleTemplate::CycleTemplate(std::vector<double> phases)
    : phases_(std::move(phases)) {
  if (phases_.empty()) throw DomainError("CycleTemplate: empty template");
  require_unit_interval(phases_, "CycleTemplate");
}

NormalizedSeries normalize(const RawSeries& x) {
  const auto v = x.values();
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<double> out(v.size(), 0.5);
  if (hi > lo) {
    const double range = hi - lo;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[i] = std::clamp((v[i] - lo) / range, 0.0, 1.0);
    }
  }
  return NormalizedSeries(std::move(out));
}

double period_loss(std::span<const double> x, std::size_t lag) {
  const std::size_t n = x.size();
  if (lag < 1 || lag >= n) throw DomainError("period_loss: need 1 <= T < n");
  double acc = 0.0;
  for (std::size_t t = 0; t + lag < n; ++t) {
    const double d = x[t] - x[t + lag];
    acc += d * d;
  }
  return acc / static_cast<double>(n - lag);
}

std::vector<double> mirror_pad(std::span<const double> x, std::size_t p) {
  const std::size_t n = x.size();
  if (n == 0 || p > n - 1) throw DomainError("mirror_pad: need p <= n - 1");
  std::vector<double> out;
  out.reserve(n + 2 * p);
  for (std::size_t k = p; k >= 1; --k) out.push_back(x[k]);
  out.insert(out.end(), x.begin(), x.end());
  for (std::size_t k = 1; k <= p; ++k) out.push_back(x[n - 1 - k]);
  return out;
}

NormalizedSeries tile_crop(const CycleTemplate& r, std::size_t n) {
  if (n == 0) throw DomainError("tile_crop: n must be positive");
  const auto phases = r.phases();
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = phases[t % phases.size()];
  return NormalizedSeries(std::move(out));
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw DomainError("cosine_distance: length mismatch or empty input");
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw DomainError("cosine_distance: zero vector");
  const double cos = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(1.0 - cos, 0.0, 2.0);
}

std::vector<double> resample_linear(std::span<const double> x, std::size_t m) {
  const std::size_t n = x.size();
  if (n < 2 || m < 2) throw DomainError("resample_linear: lengths must be >= 2");
  std::vector<double> out(m);
  const double step = static_cast<double>(n - 1) / static_cast<double>(m - 1);
  for (std::size_t i = 0; i < m; ++i) {
    const double pos = static_cast<double>(i) * step;
    auto k = static_cast<std::size_t>(std::floor(pos));
    if (k >= n - 1) k = n - 2;
    const double frac = pos - static_cast<double>(k);
    out[i] = x[k] + frac * (x[k + 1] - x[k]);
  }
  out.front() = x.front();
  out.back() = x.back();
  return out;
}

}  // namespace cpr
