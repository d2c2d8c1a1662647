// Command-line front end. Stage boundaries follow the device/server split:
// `perturb` is the only subcommand that sees raw values unless `reconstruct
// --raw` is requested explicitly.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cpr/baselines.hpp"
#include "cpr/errors.hpp"
#include "cpr/experiments.hpp"
#include "cpr/ldp_mechanisms.hpp"
#include "cpr/period_detection.hpp"
#include "cpr/phase_recovery.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIngestion = 2;
constexpr int kExitRuntime = 3;

constexpr const char* kExitHelp =
    "Exit codes: 0 success, 1 usage error, 2 ingestion error, 3 runtime or detection failure.\n"
    "Config keys: cpr experiment --help";

constexpr const char* kConfigHelp = R"(Experiment config (JSON). Keys and defaults:
  name                 dataset label in tables            "synthetic"
  stream.source        synthetic_waveform | csv_column    synthetic_waveform
  stream.waveform      sine | square | sawtooth | segment sine
  stream.T_true        true period (>= 2)                 required for synthetic
  stream.n             stream length (>= 3 T_true)        required for synthetic
  stream.K             cycle repeats                      ceil(n / T_true)
  stream.jitter        Uniform(-j, j) amplitude, [0,0.5)  0
  stream.csv_path      CSV file (relative to config)      required for csv/segment
  stream.column        CSV column name                    required for csv/segment
  epsilons             list of window budgets             required
  windows              list of w values                   required
  trials               trials per cell                    1
  methods              cpr laplace sw sw_moving sw_filter lbd   [cpr]
  base_seed            64-bit seed                        0
  sweeps               detection | reconstruction         both
  tol_T                |T_hat - T_true| counted correct   0
  detection.scales     probing window lengths             {n/8, n/4, n/2}, each >= 4 T_min
  detection.T_min      smallest period                    2
  detection.T_max      largest period                     n/3
  detection.L          spectral peaks per window          5
  detection.tau        vote tolerance                     0.1
  detection.hann       Hann window before FFT             true
  detection.refine     sharpen periods below FFT bin size true
  em.B                 EM grid size                       256
  em.max_iters         EM iteration cap                   200
  em.tol               max pmf change to stop             1e-6
  em.likelihood        cell | point                       cell
  baseline.moving_window          SW_moving width (odd)   9
  baseline.filter_sigma           SW_filter Gaussian sd   2.0
  baseline.laplace_smooth_window  Laplace smoothing width 9
  baseline.lbd_threshold_frac     LBD publish threshold   0.5

Exit codes: 0 success, 1 usage error, 2 ingestion error, 3 runtime or detection failure.)";

void write_series(const std::filesystem::path& path, std::span<const double> values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw cpr::IoError("cannot write " + path.string());
  out << "value\n";
  for (double v : values) out << cpr::format_double(v) << '\n';
  if (!out) throw cpr::IoError("write failed for " + path.string());
}

cpr::NormalizedSeries load_privatized(const std::string& path, const std::string& column) {
  const auto raw = cpr::load_csv_column(path, column);
  try {
    return cpr::NormalizedSeries({raw.values().begin(), raw.values().end()});
  } catch (const cpr::DomainError&) {
    throw cpr::IngestionError(path + ": privatized values must lie in [0,1]");
  }
}

struct DetectionFlags {
  std::vector<std::size_t> scales;
  std::optional<std::size_t> t_min;
  std::optional<std::size_t> t_max;
  std::optional<std::size_t> peaks;
  std::optional<double> tau;
  bool no_hann = false;
  bool no_refine = false;

  void attach(CLI::App* app) {
    app->add_option("--scales", scales, "Probing window lengths (default n/8 n/4 n/2)");
    app->add_option("--t-min", t_min, "Smallest admissible period (default 2)");
    app->add_option("--t-max", t_max, "Largest admissible period (default n/3)");
    app->add_option("--peaks", peaks, "Spectral peaks per window L (default 5)");
    app->add_option("--tau", tau, "Relative vote tolerance (default 0.1)");
    app->add_flag("--no-hann", no_hann, "Skip the Hann window before the FFT");
    app->add_flag("--no-refine", no_refine, "Only try round(N/k) per spectral peak; keep the voted period as is");
  }

  cpr::DetectionConfig resolve(std::size_t n) const {
    cpr::DetectionSettings s;
    if (!scales.empty()) s.scales = scales;
    s.t_min = t_min;
    s.t_max = t_max;
    s.peaks = peaks;
    s.tau = tau;
    if (no_hann) s.hann = false;
    if (no_refine) s.refine = false;
    return s.resolve(n);
  }
};

struct EmFlags {
  std::size_t grid = 256;
  std::size_t max_iters = 200;
  double tol = 1e-6;
  std::string likelihood = "cell";

  void attach(CLI::App* app) {
    app->add_option("--em-grid", grid, "EM grid size B")->capture_default_str();
    app->add_option("--em-iters", max_iters, "EM iteration cap")->capture_default_str();
    app->add_option("--em-tol", tol, "EM convergence tolerance")->capture_default_str();
    app->add_option("--em-likelihood", likelihood, "cell | point")
        ->check(CLI::IsMember({"cell", "point"}))
        ->capture_default_str();
  }

  cpr::EmConfig resolve() const {
    cpr::EmConfig em;
    em.grid_size = grid;
    em.max_iters = max_iters;
    em.tol = tol;
    em.likelihood = likelihood == "point" ? cpr::EmLikelihood::point : cpr::EmLikelihood::cell;
    em.validate();
    return em;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cycle and phase recovery for periodic streams under w-event LDP"};
  app.footer(kExitHelp);
  app.require_subcommand(1);

  std::string input;
  std::string column = "value";
  std::string output;
  double epsilon = 0.0;
  std::size_t w = 1;
  std::uint64_t seed = 0;

  auto* perturb = app.add_subcommand("perturb", "Privatize a series (device side)");
  std::string mechanism = "sw";
  perturb->add_option("-i,--input", input, "Input CSV")->required();
  perturb->add_option("-c,--column", column, "Column name")->capture_default_str();
  perturb->add_option("-o,--output", output, "Output CSV (column 'value')")->required();
  perturb->add_option("-e,--epsilon", epsilon, "Window budget epsilon")->required();
  perturb->add_option("-w,--window", w, "Event window w")->capture_default_str();
  perturb->add_option("-s,--seed", seed, "RNG seed")->capture_default_str();
  perturb->add_option("-m,--mechanism", mechanism, "sw | laplace")
      ->check(CLI::IsMember({"sw", "laplace"}))
      ->capture_default_str();

  auto* detect = app.add_subcommand("detect", "Estimate the dominant period of a privatized series");
  DetectionFlags detect_flags;
  detect->add_option("-i,--input", input, "Privatized CSV")->required();
  detect->add_option("-c,--column", column, "Column name")->capture_default_str();
  detect_flags.attach(detect);

  auto* reconstruct =
      app.add_subcommand("reconstruct", "Recover the periodic stream from a privatized series");
  DetectionFlags rec_flags;
  EmFlags em_flags;
  bool from_raw = false;
  reconstruct->add_option("-i,--input", input, "Input CSV (privatized unless --raw)")->required();
  reconstruct->add_option("-c,--column", column, "Column name")->capture_default_str();
  reconstruct->add_option("-o,--output", output, "Output CSV of the reconstruction")->required();
  reconstruct->add_option("-e,--epsilon", epsilon, "Window budget epsilon")->required();
  reconstruct->add_option("-w,--window", w, "Event window w")->capture_default_str();
  reconstruct->add_flag("--raw", from_raw,
                        "Input is raw: normalize and SW-perturb it first (full pipeline)");
  reconstruct->add_option("-s,--seed", seed, "RNG seed for --raw")->capture_default_str();
  rec_flags.attach(reconstruct);
  em_flags.attach(reconstruct);

  auto* experiment = app.add_subcommand("experiment", "Run a configured sweep and write CSV reports");
  std::string config_path;
  std::string out_dir = ".";
  experiment->add_option("-C,--config", config_path, "Experiment config (JSON)")->required();
  experiment->add_option("-o,--out", out_dir, "Output directory")->capture_default_str();
  experiment->footer(kConfigHelp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*perturb) {
      const auto raw = cpr::load_csv_column(input, column);
      const auto x = cpr::normalize(raw);
      const auto budget = cpr::split_budget(epsilon, w);
      cpr::Rng rng(cpr::RngSeed{seed});
      if (mechanism == "sw") {
        write_series(output, cpr::sw_perturb_series(x, budget, rng).values());
      } else {
        write_series(output, cpr::laplace_perturb_series(x, budget, rng).values());
      }
    } else if (*detect) {
      const auto priv = load_privatized(input, column);
      std::cout << cpr::detect_period(priv, detect_flags.resolve(priv.size())) << '\n';
    } else if (*reconstruct) {
      const auto budget = cpr::split_budget(epsilon, w);
      std::optional<cpr::NormalizedSeries> priv;
      if (from_raw) {
        cpr::Rng rng(cpr::RngSeed{seed});
        priv = cpr::sw_perturb_series(cpr::normalize(cpr::load_csv_column(input, column)),
                                      budget, rng);
      } else {
        priv = load_privatized(input, column);
      }
      const auto rec = cpr::cpr_recover(*priv, budget.eps0, rec_flags.resolve(priv->size()),
                                        em_flags.resolve());
      write_series(output, rec.x_hat.values());
      std::cout << rec.t_hat << '\n';
    } else if (*experiment) {
      const auto config = cpr::load_experiment_config(config_path);
      const std::filesystem::path dir(out_dir);
      std::filesystem::create_directories(dir);
      const auto stream = cpr::prepare_stream(config);
      std::size_t rows = 0;
      for (cpr::Sweep sweep : config.sweeps) {
        const bool detection = sweep == cpr::Sweep::detection;
        const auto reports = detection ? cpr::run_detection_trials(stream, config)
                                       : cpr::run_reconstruction_sweep(stream, config);
        const std::string tag = detection ? "detection" : "reconstruction";
        cpr::emit_report(reports, dir / ("raw_" + tag + ".csv"), cpr::ReportMode::raw,
                         config.name);
        cpr::emit_report(reports, dir / ("timings_" + tag + ".csv"), cpr::ReportMode::timings,
                         config.name);
        cpr::emit_report(reports, dir / (detection ? "accuracy.csv" : "distance.csv"),
                         detection ? cpr::ReportMode::accuracy_table
                                   : cpr::ReportMode::distance_table,
                         config.name);
        rows += reports.size();
      }
      std::cout << "wrote " << rows << " trial rows to " << dir.string() << '\n';
    }
  } catch (const cpr::DetectionFailure& e) {
    std::cerr << "detection failed: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const cpr::IngestionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIngestion;
  } catch (const cpr::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
