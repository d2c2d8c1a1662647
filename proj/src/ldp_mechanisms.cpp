#include "cpr/ldp_mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cpr/errors.hpp"

namespace cpr {

BudgetSplit split_budget(double epsilon, std::size_t w) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw DomainError("split_budget: epsilon must be positive");
  }
  if (w < 1) throw DomainError("split_budget: w must be >= 1");
  // epsilon / w summed w times can land a few ulp above epsilon; step down
  // until a window of releases, added in order, stays within budget.
  double eps0 = epsilon / static_cast<double>(w);
  const auto window_sum = [w](double share) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w; ++i) acc += share;
    return acc;
  };
  while (window_sum(eps0) > epsilon) eps0 = std::nextafter(eps0, 0.0);
  return BudgetSplit{epsilon, w, eps0};
}

SwParams sw_params(double eps0) {
  if (!(eps0 > 0.0) || !std::isfinite(eps0)) {
    throw DomainError("sw_params: eps0 must be positive");
  }
  // Closed forms rewritten with e^-eps0 and expm1 to avoid overflow at large
  // eps0 and cancellation at small eps0.
  const double e_neg = std::exp(-eps0);
  const double num = eps0 - 1.0 + e_neg;            // (eps0 e - e + 1) / e
  const double den = 2.0 * (std::expm1(eps0) - eps0);  // 2 (e - 1 - eps0)
  const double b = num / den;
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw DomainError("sw_params: eps0 outside the representable range");
  }
  const double p = 1.0 / (2.0 * b + e_neg);  // e / (2be + 1)
  const double q = e_neg / (2.0 * b + e_neg);  // 1 / (2be + 1)
  const double mass = 2.0 * b * p + (1.0 - 2.0 * b) * q;
  return SwParams{eps0, b, p, q, 1.0 / mass};
}

Interval sw_interval(const SwParams& params, double x) {
  const double b = params.b;
  if (x < b) return {0.0, 2.0 * b};
  if (x > 1.0 - b) return {1.0 - 2.0 * b, 1.0};
  return {x - b, x + b};
}

double sw_density(const SwParams& params, double y, double x) {
  if (!(y >= 0.0 && y <= 1.0) || !(x >= 0.0 && x <= 1.0)) {
    throw DomainError("sw_density: arguments must lie in [0,1]");
  }
  const Interval in = sw_interval(params, x);
  return (y >= in.lo && y <= in.hi) ? params.high() : params.low();
}

double Rng::laplace(double scale) {
  // u in (-1/2, 1/2); the endpoint -1/2 would give log(0).
  double u = uniform() - 0.5;
  while (u == -0.5) u = uniform() - 0.5;
  return -scale * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
}

double sw_perturb(const SwParams& params, double x, Rng& rng) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("sw_perturb: x outside [0,1]");
  const Interval in = sw_interval(params, x);
  const double width = 2.0 * params.b;
  const double choose = rng.uniform();
  const double u = rng.uniform();
  double y;
  if (choose < params.high_mass()) {
    y = in.lo + u * width;
  } else {
    const double pos = u * (1.0 - width);
    y = pos < in.lo ? pos : pos + width;
  }
  return std::clamp(y, 0.0, 1.0);
}

NormalizedSeries sw_perturb_series(const NormalizedSeries& x,
                                   const BudgetSplit& budget, Rng& rng) {
  const SwParams params = sw_params(budget.eps0);
  std::vector<double> out(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) out[t] = sw_perturb(params, x[t], rng);
  return NormalizedSeries(std::move(out));
}

RawSeries laplace_perturb_series(const NormalizedSeries& x,
                                 const BudgetSplit& budget, Rng& rng) {
  const double scale = 1.0 / budget.eps0;
  std::vector<double> out(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) out[t] = x[t] + rng.laplace(scale);
  return RawSeries(std::move(out));
}

}  // namespace cpr
