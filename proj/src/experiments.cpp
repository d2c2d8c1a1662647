#include "cpr/experiments.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <tuple>

#include "cpr/errors.hpp"

namespace cpr {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::vector<double> base_cycle(const StreamSpec& spec) {
  const std::size_t period = spec.t_true;
  std::vector<double> cycle(period);
  if (spec.waveform == Waveform::segment) {
    const auto column = load_csv_column(spec.csv_path, spec.column);
    if (column.size() < period) {
      throw IngestionError("segment source shorter than T_true (" +
                           std::to_string(column.size()) + " < " +
                           std::to_string(period) + ")");
    }
    std::copy_n(column.values().begin(), period, cycle.begin());
    return cycle;
  }
  for (std::size_t t = 0; t < period; ++t) {
    const double phase = static_cast<double>(t) / static_cast<double>(period);
    switch (spec.waveform) {
      case Waveform::sine:
        cycle[t] = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * phase);
        break;
      case Waveform::square:
        cycle[t] = 2 * t < period ? 1.0 : 0.0;
        break;
      case Waveform::sawtooth:
        cycle[t] = static_cast<double>(t) / static_cast<double>(period - 1);
        break;
      case Waveform::segment:
        break;
    }
  }
  return cycle;
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  const auto d = std::chrono::duration<double, std::milli>(Clock::now() - start);
  return std::max(d.count(), 1e-6);
}

bool correct(std::size_t t_hat, const std::optional<std::size_t>& t_true, std::size_t tol) {
  if (!t_true) return false;
  const std::size_t dev = t_hat > *t_true ? t_hat - *t_true : *t_true - t_hat;
  return dev <= tol;
}

void sort_reports(std::vector<TrialReport>& reports) {
  std::stable_sort(reports.begin(), reports.end(),
                   [](const TrialReport& a, const TrialReport& b) {
                     return std::tie(a.method, a.epsilon, a.w, a.trial) <
                            std::tie(b.method, b.epsilon, b.w, b.trial);
                   });
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RawSeries load_csv_column(const std::filesystem::path& path, std::string_view column) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IngestionError(path.string() + ": missing header row");
  const auto header = split_commas(line);
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) {
    throw IngestionError(path.string() + ": no column named '" + std::string(column) + "'");
  }
  const auto index = static_cast<std::size_t>(it - header.begin());
  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_commas(line);
    if (index >= cells.size()) {
      throw IngestionError(path.string() + ": row " + std::to_string(row) +
                               " has no value for '" + std::string(column) + "'",
                           row);
    }
    const std::string_view cell = cells[index];
    double v = 0.0;
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc() || end != cell.data() + cell.size() ||
        !std::isfinite(v)) {
      throw IngestionError(path.string() + ": cannot parse '" + std::string(cell) +
                               "' at row " + std::to_string(row),
                           row);
    }
    values.push_back(v);
  }
  if (values.empty()) throw IngestionError(path.string() + ": column has no rows");
  return RawSeries(std::move(values));
}

void StreamSpec::validate() const {
  if (source == StreamSource::csv_column) {
    if (csv_path.empty() || column.empty()) {
      throw DomainError("StreamSpec: csv source needs csv_path and column");
    }
    return;
  }
  if (t_true < 2) throw DomainError("StreamSpec: T_true must be >= 2");
  if (n < 3 * t_true) throw DomainError("StreamSpec: need n >= 3 T_true");
  if (!(jitter >= 0.0 && jitter < 0.5)) throw DomainError("StreamSpec: jitter outside [0, 0.5)");
  if (repeats != 0 && repeats * t_true < n) {
    throw DomainError("StreamSpec: K * T_true shorter than n");
  }
  if (waveform == Waveform::segment && (csv_path.empty() || column.empty())) {
    throw DomainError("StreamSpec: segment waveform needs csv_path and column");
  }
}

PreparedStream build_periodic_stream(const StreamSpec& spec, Rng& rng) {
  spec.validate();
  if (spec.source == StreamSource::csv_column) {
    auto column = load_csv_column(spec.csv_path, spec.column);
    std::optional<std::size_t> t_true;
    if (spec.t_true > 0) t_true = spec.t_true;
    if (spec.n == 0 || spec.n >= column.size()) return {std::move(column), t_true};
    const auto v = column.values();
    return {RawSeries({v.begin(), v.begin() + static_cast<std::ptrdiff_t>(spec.n)}), t_true};
  }
  const auto cycle = base_cycle(spec);
  const auto [lo, hi] = std::minmax_element(cycle.begin(), cycle.end());
  const std::size_t repeats =
      spec.repeats != 0 ? spec.repeats : (spec.n + spec.t_true - 1) / spec.t_true;
  const std::size_t length = std::min(spec.n, repeats * spec.t_true);
  std::vector<double> values(length);
  for (std::size_t t = 0; t < length; ++t) {
    double v = cycle[t % spec.t_true];
    if (spec.jitter > 0.0) {
      v += spec.jitter * (2.0 * rng.uniform() - 1.0);
      v = std::clamp(v, *lo, *hi);
    }
    values[t] = v;
  }
  return {RawSeries(std::move(values)), spec.t_true};
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::cpr: return "cpr";
    case Method::laplace: return "laplace";
    case Method::sw: return "sw";
    case Method::sw_moving: return "sw_moving";
    case Method::sw_filter: return "sw_filter";
    case Method::lbd: return "lbd";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::cpr, Method::laplace, Method::sw, Method::sw_moving,
                   Method::sw_filter, Method::lbd}) {
    if (method_name(m) == name) return m;
  }
  throw DomainError("unknown method '" + std::string(name) + "'");
}

DetectionConfig DetectionSettings::resolve(std::size_t n) const {
  DetectionConfig c = DetectionConfig::defaults_for(n);
  if (t_min) c.t_min = *t_min;
  if (t_max) c.t_max = *t_max;
  if (peaks) c.peaks = *peaks;
  if (tau) c.tau = *tau;
  if (hann) c.hann = *hann;
  if (refine) c.refine = *refine;
  if (scales) {
    c.scales = *scales;
  } else if (t_min) {
    // Re-derive the default scales under the overridden T_min floor.
    c.scales.clear();
    const std::size_t floor_scale = std::min<std::size_t>(4 * c.t_min, n);
    for (std::size_t s : {n / 8, n / 4, n / 2}) {
      s = std::min(std::max(s, floor_scale), n);
      if (std::find(c.scales.begin(), c.scales.end(), s) == c.scales.end()) {
        c.scales.push_back(s);
      }
    }
  }
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  stream.validate();
  if (epsilons.empty() || windows.empty() || methods.empty() || sweeps.empty()) {
    throw DomainError("ExperimentConfig: epsilons, windows, methods and sweeps must be nonempty");
  }
  if (trials < 1) throw DomainError("ExperimentConfig: trials must be >= 1");
  for (double e : epsilons) {
    if (!(e > 0.0) || !std::isfinite(e)) throw DomainError("ExperimentConfig: epsilon must be positive");
  }
  for (std::size_t w : windows) {
    if (w < 1) throw DomainError("ExperimentConfig: w must be >= 1");
  }
  em.validate();
  baseline.validate();
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::string_view method,
                         double epsilon, std::size_t w, std::size_t trial) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a(h, method.data(), method.size());
  const auto eps_bits = std::bit_cast<std::uint64_t>(epsilon);
  const auto w64 = static_cast<std::uint64_t>(w);
  const auto trial64 = static_cast<std::uint64_t>(trial);
  for (std::uint64_t word : {eps_bits, w64, trial64}) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(word >> (8 * i));
    h = fnv1a(h, bytes, sizeof bytes);
  }
  return base_seed ^ mix64(h);
}

PreparedStream prepare_stream(const ExperimentConfig& config) {
  Rng rng(RngSeed{trial_seed(config.base_seed, "stream", 0.0, 0, 0)});
  return build_periodic_stream(config.stream, rng);
}

MethodOutput run_method(Method method, const RawSeries& raw, double epsilon,
                        std::size_t w, const ExperimentConfig& config, Rng& rng) {
  const BudgetSplit budget = split_budget(epsilon, w);
  const std::vector<double> per_event(raw.size(), budget.eps0);
  switch (method) {
    case Method::cpr: {
      const NormalizedSeries x = normalize(raw);
      const NormalizedSeries priv = sw_perturb_series(x, budget, rng);
      const DetectionConfig det = config.detection.resolve(raw.size());
      try {
        auto rec = cpr_recover(priv, budget.eps0, det, config.em);
        return {std::move(rec.x_hat), rec.t_hat, false, per_event};
      } catch (const DetectionFailure&) {
        const auto groups = phase_groups(priv, 1);
        const auto templ = reconstruct_template(groups, sw_params(budget.eps0), config.em);
        return {tile_crop(templ, raw.size()), std::nullopt, true, per_event};
      }
    }
    case Method::sw:
      return {baseline_sw_direct(raw, epsilon, w, rng), std::nullopt, false, per_event};
    case Method::sw_moving:
      return {baseline_sw_moving(raw, epsilon, w, config.baseline, rng), std::nullopt, false,
              per_event};
    case Method::sw_filter:
      return {baseline_sw_filter(raw, epsilon, w, config.baseline, rng), std::nullopt, false,
              per_event};
    case Method::laplace:
      return {baseline_laplace_smooth(raw, epsilon, w, config.baseline, rng), std::nullopt,
              false, per_event};
    case Method::lbd: {
      auto res = baseline_lbd(raw, epsilon, w, config.baseline, rng);
      return {std::move(res.series), std::nullopt, false, std::move(res.spent)};
    }
  }
  throw DomainError("run_method: unknown method");
}

std::vector<TrialReport> run_detection_trials(const PreparedStream& stream,
                                              const ExperimentConfig& config) {
  config.validate();
  const NormalizedSeries x = normalize(stream.raw);
  const DetectionConfig det = config.detection.resolve(x.size());
  const std::string method(method_name(Method::cpr));
  std::vector<TrialReport> reports;
  for (double eps : config.epsilons) {
    for (std::size_t w : config.windows) {
      const BudgetSplit budget = split_budget(eps, w);
      for (std::size_t trial = 0; trial < config.trials; ++trial) {
        const auto start = Clock::now();
        Rng rng(RngSeed{trial_seed(config.base_seed, method, eps, w, trial)});
        const NormalizedSeries priv = sw_perturb_series(x, budget, rng);
        TrialReport r;
        r.method = method;
        r.epsilon = eps;
        r.w = w;
        r.trial = trial;
        try {
          r.t_hat = detect_period(priv, det);
          r.detected_correctly = correct(*r.t_hat, stream.t_true, config.tol_t);
        } catch (const DetectionFailure&) {
          r.detection_failed = true;
        }
        r.wall_time_ms = elapsed_ms(start);
        reports.push_back(std::move(r));
      }
    }
  }
  sort_reports(reports);
  return reports;
}

std::vector<TrialReport> run_detection_trials(const ExperimentConfig& config) {
  return run_detection_trials(prepare_stream(config), config);
}

std::vector<TrialReport> run_reconstruction_sweep(const PreparedStream& stream,
                                                  const ExperimentConfig& config) {
  config.validate();
  const std::vector<double> truth = normalize(stream.raw).vec();
  std::vector<TrialReport> reports;
  for (Method method : config.methods) {
    const std::string name(method_name(method));
    for (double eps : config.epsilons) {
      for (std::size_t w : config.windows) {
        for (std::size_t trial = 0; trial < config.trials; ++trial) {
          const auto start = Clock::now();
          Rng rng(RngSeed{trial_seed(config.base_seed, name, eps, w, trial)});
          const auto out = run_method(method, stream.raw, eps, w, config, rng);
          TrialReport r;
          r.method = name;
          r.epsilon = eps;
          r.w = w;
          r.trial = trial;
          r.t_hat = out.t_hat;
          r.detection_failed = out.detection_failed;
          if (out.t_hat) r.detected_correctly = correct(*out.t_hat, stream.t_true, config.tol_t);
          const auto aligned = out.x_hat.size() == truth.size()
                                   ? out.x_hat.vec()
                                   : resample_linear(out.x_hat.values(), truth.size());
          r.cosine_distance = cosine_distance(aligned, truth);
          r.wall_time_ms = elapsed_ms(start);
          reports.push_back(std::move(r));
        }
      }
    }
  }
  sort_reports(reports);
  return reports;
}

std::vector<TrialReport> run_reconstruction_sweep(const ExperimentConfig& config) {
  return run_reconstruction_sweep(prepare_stream(config), config);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_report(std::vector<TrialReport> reports, ReportMode mode,
                          std::string_view dataset) {
  if (reports.empty()) throw DomainError("emit_report: empty report set");
  sort_reports(reports);
  std::ostringstream out;
  switch (mode) {
    case ReportMode::raw: {
      out << "method,epsilon,w,trial,T_hat,detected_correctly,cosine_distance\n";
      for (const auto& r : reports) {
        out << r.method << ',' << format_double(r.epsilon) << ',' << r.w << ',' << r.trial
            << ',';
        if (r.detection_failed) {
          out << "fail";
        } else if (r.t_hat) {
          out << *r.t_hat;
        }
        out << ',' << (r.detected_correctly ? 1 : 0) << ',';
        if (r.cosine_distance) out << format_double(*r.cosine_distance);
        out << '\n';
      }
      break;
    }
    case ReportMode::timings: {
      out << "method,epsilon,w,trial,wall_time_ms\n";
      for (const auto& r : reports) {
        char ms[32];
        std::snprintf(ms, sizeof ms, "%.3f", r.wall_time_ms);
        out << r.method << ',' << format_double(r.epsilon) << ',' << r.w << ',' << r.trial
            << ',' << ms << '\n';
      }
      break;
    }
    case ReportMode::accuracy_table: {
      std::set<double> eps_cols;
      std::map<std::pair<std::size_t, double>, std::pair<std::size_t, std::size_t>> cells;
      for (const auto& r : reports) {
        if (!r.t_hat && !r.detection_failed) continue;
        eps_cols.insert(r.epsilon);
        auto& [hits, total] = cells[{r.w, r.epsilon}];
        hits += r.detected_correctly ? 1 : 0;
        ++total;
      }
      if (cells.empty()) throw DomainError("emit_report: no detection trials to tabulate");
      std::set<std::size_t> rows;
      for (const auto& [key, _] : cells) rows.insert(key.first);
      out << "dataset,w";
      for (double e : eps_cols) out << ',' << format_double(e);
      out << '\n';
      for (std::size_t w : rows) {
        out << dataset << ',' << w;
        for (double e : eps_cols) {
          out << ',';
          const auto it = cells.find({w, e});
          if (it == cells.end()) continue;
          const auto [hits, total] = it->second;
          out << std::llround(100.0 * static_cast<double>(hits) / static_cast<double>(total));
        }
        out << '\n';
      }
      break;
    }
    case ReportMode::distance_table: {
      std::set<double> eps_cols;
      std::map<std::tuple<std::string, std::size_t, double>, std::pair<double, std::size_t>>
          cells;
      for (const auto& r : reports) {
        if (!r.cosine_distance) continue;
        eps_cols.insert(r.epsilon);
        auto& [sum, count] = cells[{r.method, r.w, r.epsilon}];
        sum += *r.cosine_distance;
        ++count;
      }
      if (cells.empty()) throw DomainError("emit_report: no reconstruction trials to tabulate");
      std::set<std::pair<std::string, std::size_t>> rows;
      for (const auto& [key, _] : cells) rows.insert({std::get<0>(key), std::get<1>(key)});
      out << "method,w";
      for (double e : eps_cols) out << ',' << format_double(e);
      out << '\n';
      for (const auto& [method, w] : rows) {
        out << method << ',' << w;
        for (double e : eps_cols) {
          out << ',';
          const auto it = cells.find({method, w, e});
          if (it == cells.end()) continue;
          char cell[32];
          std::snprintf(cell, sizeof cell, "%.4f",
                        it->second.first / static_cast<double>(it->second.second));
          out << cell;
        }
        out << '\n';
      }
      break;
    }
  }
  return out.str();
}

void emit_report(std::vector<TrialReport> reports, const std::filesystem::path& out_path,
                 ReportMode mode, std::string_view dataset) {
  const std::string text = format_report(std::move(reports), mode, dataset);
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + out_path.string());
  out << text;
  if (!out) throw IoError("write failed for " + out_path.string());
}

}  // namespace cpr
