#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpr/baselines.hpp"
#include "cpr/core_signal.hpp"
#include "cpr/ldp_mechanisms.hpp"
#include "cpr/period_detection.hpp"
#include "cpr/phase_recovery.hpp"

namespace cpr {

RawSeries load_csv_column(const std::filesystem::path& path, std::string_view column);

enum class StreamSource { csv_column, synthetic_waveform };
enum class Waveform { sine, square, sawtooth, segment };

struct StreamSpec {
  StreamSource source = StreamSource::synthetic_waveform;
  std::filesystem::path csv_path;
  std::string column;
  Waveform waveform = Waveform::sine;
  std::size_t t_true = 0;   // 0: unknown (csv_column without a declared period)
  std::size_t n = 0;        // 0 with csv_column: use the whole column
  std::size_t repeats = 0;  // K; 0 means ceil(n / T_true)
  double jitter = 0.0;

  void validate() const;
};

struct PreparedStream {
  RawSeries raw;
  std::optional<std::size_t> t_true;
};

// One cycle of the waveform (or the first T_true csv values), repeated K
// times, cropped to n, plus Uniform(-j, j) jitter clamped to the cycle's range.
PreparedStream build_periodic_stream(const StreamSpec& spec, Rng& rng);

enum class Method { cpr, laplace, sw, sw_moving, sw_filter, lbd };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);

// Detection settings as written in a config file; unset fields take the
// length-dependent defaults of DetectionConfig::defaults_for.
struct DetectionSettings {
  std::optional<std::vector<std::size_t>> scales;
  std::optional<std::size_t> t_min;
  std::optional<std::size_t> t_max;
  std::optional<std::size_t> peaks;
  std::optional<double> tau;
  std::optional<bool> hann;
  std::optional<bool> refine;

  DetectionConfig resolve(std::size_t n) const;
};

enum class Sweep { detection, reconstruction };

struct ExperimentConfig {
  std::string name = "synthetic";
  StreamSpec stream;
  std::vector<double> epsilons;
  std::vector<std::size_t> windows;
  std::size_t trials = 1;
  std::vector<Method> methods{Method::cpr};
  std::uint64_t base_seed = 0;
  std::vector<Sweep> sweeps{Sweep::detection, Sweep::reconstruction};
  DetectionSettings detection;
  EmConfig em;
  BaselineConfig baseline;
  std::size_t tol_t = 0;

  void validate() const;
};

// Parse a JSON config; throws IngestionError on malformed input.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(std::string_view json_text);

struct TrialReport {
  std::string method;
  double epsilon = 0.0;
  std::size_t w = 0;
  std::size_t trial = 0;
  std::optional<std::size_t> t_hat;  // empty for methods without detection
  bool detection_failed = false;
  bool detected_correctly = false;
  std::optional<double> cosine_distance;
  double wall_time_ms = 0.0;
};

// base_seed XOR a stable 64-bit hash of (method, epsilon bits, w, trial).
std::uint64_t trial_seed(std::uint64_t base_seed, std::string_view method,
                         double epsilon, std::size_t w, std::size_t trial);

// The stream shared by every trial of a config, seeded from base_seed.
PreparedStream prepare_stream(const ExperimentConfig& config);

std::vector<TrialReport> run_detection_trials(const PreparedStream& stream,
                                              const ExperimentConfig& config);
std::vector<TrialReport> run_detection_trials(const ExperimentConfig& config);

std::vector<TrialReport> run_reconstruction_sweep(const PreparedStream& stream,
                                                  const ExperimentConfig& config);
std::vector<TrialReport> run_reconstruction_sweep(const ExperimentConfig& config);

// One end-to-end run of a method; CPR falls back to a single-phase template
// when detection fails (reported through `t_hat`/`detection_failed`).
struct MethodOutput {
  NormalizedSeries x_hat;
  std::optional<std::size_t> t_hat;
  bool detection_failed = false;
  std::vector<double> spent;  // per-step budget ledger
};

MethodOutput run_method(Method method, const RawSeries& raw, double epsilon,
                        std::size_t w, const ExperimentConfig& config, Rng& rng);

enum class ReportMode { raw, accuracy_table, distance_table, timings };

// Sorts by (method, epsilon, w, trial) before writing. Throws DomainError on
// an empty report set and IoError when the path cannot be written.
void emit_report(std::vector<TrialReport> reports, const std::filesystem::path& out_path,
                 ReportMode mode, std::string_view dataset = "synthetic");

std::string format_report(std::vector<TrialReport> reports, ReportMode mode,
                          std::string_view dataset = "synthetic");

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace cpr
