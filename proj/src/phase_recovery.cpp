#include "cpr/phase_recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cpr/errors.hpp"

namespace cpr {

namespace {

double overlap(double a_lo, double a_hi, double b_lo, double b_hi) {
  return std::max(0.0, std::min(a_hi, b_hi) - std::max(a_lo, b_lo));
}

// Measure of {x in [lo, hi] : y in I_x}, following the three branches of the
// shifted interval.
double covering_measure(const SwParams& params, double y, double lo, double hi) {
  const double b = params.b;
  double m = 0.0;
  if (y <= 2.0 * b) m += overlap(lo, hi, 0.0, b);
  // |x - y| <= b inside [b, 1-b]. Offsets are taken from y first: at large
  // eps0, b is below the spacing of doubles near y and y +- b rounds to y.
  const double left = std::max(lo, b) - y;
  const double right = std::min(hi, 1.0 - b) - y;
  if (left <= right) m += std::max(0.0, std::min(right, b) - std::max(left, -b));
  if (y >= 1.0 - 2.0 * b) m += overlap(lo, hi, std::max(b, 1.0 - b), 1.0);
  return m;
}

// Row-major m x B matrix of f(y_j | cell b).
std::vector<double> likelihood_matrix(std::span<const double> obs,
                                      const SwParams& params,
                                      const EmConfig& config) {
  const std::size_t B = config.grid_size;
  const auto grid = em_grid(B);
  const double width = 1.0 / static_cast<double>(B);
  std::vector<double> lik(obs.size() * B);
  for (std::size_t j = 0; j < obs.size(); ++j) {
    const double y = obs[j];
    for (std::size_t b = 0; b < B; ++b) {
      double value;
      if (config.likelihood == EmLikelihood::point) {
        value = sw_density(params, y, grid[b]);
      } else {
        const double lo = static_cast<double>(b) * width;
        const double frac = covering_measure(params, y, lo, lo + width) / width;
        value = params.low() + (params.high() - params.low()) * std::min(frac, 1.0);
      }
      lik[j * B + b] = value;
    }
  }
  return lik;
}

}  // namespace

PhaseGroups phase_groups(const NormalizedSeries& x_priv, std::size_t t_hat) {
  if (t_hat < 1 || t_hat > x_priv.size()) {
    throw DomainError("phase_groups: need 1 <= T_hat <= n");
  }
  const auto padded = mirror_pad(x_priv.values(), t_hat - 1);
  const std::size_t repeats = padded.size() / t_hat;
  PhaseGroups pg{t_hat, repeats, std::vector<std::vector<double>>(t_hat)};
  for (std::size_t i = 0; i < t_hat; ++i) {
    auto& g = pg.groups[i];
    g.reserve(repeats);
    for (std::size_t m = 0; m < repeats; ++m) g.push_back(padded[i + m * t_hat]);
  }
  return pg;
}

void EmConfig::validate() const {
  if (grid_size < 2) throw DomainError("EmConfig: B must be >= 2");
  if (max_iters < 1) throw DomainError("EmConfig: max_iters must be >= 1");
  if (!(tol > 0.0)) throw DomainError("EmConfig: tol must be positive");
}

std::vector<double> em_grid(std::size_t grid_size) {
  std::vector<double> v(grid_size);
  for (std::size_t b = 0; b < grid_size; ++b) {
    v[b] = (static_cast<double>(b) + 0.5) / static_cast<double>(grid_size);
  }
  return v;
}

EmResult em_sw_decode(std::span<const double> observations, const SwParams& params,
                      const EmConfig& config) {
  config.validate();
  if (observations.empty()) throw DomainError("em_sw_decode: no observations");
  const std::size_t m = observations.size();
  const std::size_t B = config.grid_size;
  const auto lik = likelihood_matrix(observations, params, config);

  EmResult res;
  res.pmf.assign(B, 1.0 / static_cast<double>(B));
  std::vector<double> denom(m);
  std::vector<double> next(B);

  // Mixture density of each observation under the current pmf; returns the
  // log-likelihood.
  const auto mixture = [&](const std::vector<double>& pmf) {
    double ll = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double* row = &lik[j * B];
      double d = 0.0;
      for (std::size_t b = 0; b < B; ++b) d += pmf[b] * row[b];
      denom[j] = d;
      ll += std::log(d);
    }
    return ll;
  };

  res.log_likelihood.push_back(mixture(res.pmf));
  for (std::size_t it = 0; it < config.max_iters; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const double* row = &lik[j * B];
      const double inv = 1.0 / denom[j];
      for (std::size_t b = 0; b < B; ++b) next[b] += res.pmf[b] * row[b] * inv;
    }
    double change = 0.0;
    double sum = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      next[b] /= static_cast<double>(m);
      change = std::max(change, std::abs(next[b] - res.pmf[b]));
      sum += next[b];
    }
    res.pmf.swap(next);
    res.pmf_sums.push_back(sum);
    res.log_likelihood.push_back(mixture(res.pmf));
    res.iterations = it + 1;
    if (change < config.tol) break;
  }

  const auto grid = em_grid(B);
  res.pseudo_samples.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double* row = &lik[j * B];
    double acc = 0.0;
    for (std::size_t b = 0; b < B; ++b) acc += res.pmf[b] * row[b] * grid[b];
    res.pseudo_samples[j] = std::clamp(acc / denom[j], grid.front(), grid.back());
  }
  return res;
}

double kde_density(std::span<const double> samples, double h, double x) {
  if (!(h > 0.0)) throw DomainError("kde_density: bandwidth must be positive");
  if (samples.empty()) throw DomainError("kde_density: no samples");
  const double inv2h2 = 1.0 / (2.0 * h * h);
  double acc = 0.0;
  for (double z : samples) {
    const double d = x - z;
    acc += std::exp(-d * d * inv2h2);
  }
  return acc / (static_cast<double>(samples.size()) * h);
}

double silverman_bandwidth(std::span<const double> samples, double h_min) {
  const std::size_t m = samples.size();
  if (m == 0) throw DomainError("silverman_bandwidth: no samples");
  double sd = 0.0;
  if (m > 1) {
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(m);
    double ss = 0.0;
    for (double z : samples) ss += (z - mean) * (z - mean);
    sd = std::sqrt(ss / static_cast<double>(m - 1));
  }
  const double h = 1.06 * sd * std::pow(static_cast<double>(m), -0.2);
  return std::max(h, h_min);
}

double kde_mode(std::span<const double> samples, const KdeModeOptions& options) {
  if (samples.empty()) throw DomainError("kde_mode: no samples");
  if (options.grid_points < 2) throw DomainError("kde_mode: need G >= 2");
  const double h = options.bandwidth > 0.0 ? options.bandwidth
                                           : silverman_bandwidth(samples, options.h_min);
  const double step = 1.0 / static_cast<double>(options.grid_points - 1);
  double best_x = 0.0;
  double best_f = -1.0;
  for (std::size_t g = 0; g < options.grid_points; ++g) {
    const double x = static_cast<double>(g) * step;
    const double f = kde_density(samples, h, x);
    if (f > best_f) {
      best_f = f;
      best_x = x;
    }
  }
  return best_x;
}

CycleTemplate reconstruct_template(const PhaseGroups& pg, const SwParams& params,
                                   const EmConfig& em) {
  KdeModeOptions kde;
  kde.h_min = 1.0 / (4.0 * static_cast<double>(em.grid_size));
  // Group g starts at padded position g, i.e. stream position g - (T - 1), so
  // it carries stream phase (g + 1) mod T. Index the template by stream phase.
  const std::size_t t = pg.t_hat;
  std::vector<double> phases(t);
  for (std::size_t g = 0; g < t; ++g) {
    const auto decoded = em_sw_decode(pg.groups[g], params, em);
    phases[(g + 1) % t] = kde_mode(decoded.pseudo_samples, kde);
  }
  return CycleTemplate(std::move(phases));
}

Reconstruction cpr_recover(const NormalizedSeries& x_priv, double eps0,
                           const DetectionConfig& det, const EmConfig& em) {
  const std::size_t t_hat = detect_period(x_priv, det);
  const auto groups = phase_groups(x_priv, t_hat);
  const auto templ = reconstruct_template(groups, sw_params(eps0), em);
  return Reconstruction{tile_crop(templ, x_priv.size()), t_hat};
}

Reconstruction cpr_reconstruct(const RawSeries& x_raw, double epsilon, std::size_t w,
                               const DetectionConfig& det, const EmConfig& em,
                               Rng& rng) {
  const NormalizedSeries x = normalize(x_raw);
  const BudgetSplit budget = split_budget(epsilon, w);
  const NormalizedSeries x_priv = sw_perturb_series(x, budget, rng);
  return cpr_recover(x_priv, budget.eps0, det, em);
}

}  // namespace cpr
