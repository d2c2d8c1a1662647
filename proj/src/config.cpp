#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "cpr/errors.hpp"
#include "cpr/experiments.hpp"
#include "json.hpp"

namespace cpr {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::string_view where,
                    std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw IngestionError(std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw IngestionError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

template <class T>
void read(const json& obj, const char* key, std::optional<T>& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

StreamSpec parse_stream(const json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j, "stream",
                 {"source", "csv_path", "column", "waveform", "T_true", "n", "K", "jitter"});
  StreamSpec s;
  const std::string source = j.value("source", std::string("synthetic_waveform"));
  if (source == "csv_column") {
    s.source = StreamSource::csv_column;
  } else if (source != "synthetic_waveform") {
    throw IngestionError("stream.source must be csv_column or synthetic_waveform");
  }
  const std::string wave = j.value("waveform", std::string("sine"));
  if (wave == "sine") {
    s.waveform = Waveform::sine;
  } else if (wave == "square") {
    s.waveform = Waveform::square;
  } else if (wave == "sawtooth") {
    s.waveform = Waveform::sawtooth;
  } else if (wave == "segment") {
    s.waveform = Waveform::segment;
  } else {
    throw IngestionError("unknown stream.waveform '" + wave + "'");
  }
  if (j.contains("csv_path")) {
    std::filesystem::path p = j.at("csv_path").get<std::string>();
    s.csv_path = p.is_relative() ? base_dir / p : p;
  }
  read(j, "column", s.column);
  read(j, "T_true", s.t_true);
  read(j, "n", s.n);
  read(j, "K", s.repeats);
  read(j, "jitter", s.jitter);
  return s;
}

DetectionSettings parse_detection(const json& j) {
  reject_unknown(j, "detection", {"scales", "T_min", "T_max", "L", "tau", "hann", "refine"});
  DetectionSettings d;
  read(j, "scales", d.scales);
  read(j, "T_min", d.t_min);
  read(j, "T_max", d.t_max);
  read(j, "L", d.peaks);
  read(j, "tau", d.tau);
  read(j, "hann", d.hann);
  read(j, "refine", d.refine);
  return d;
}

EmConfig parse_em(const json& j) {
  reject_unknown(j, "em", {"B", "max_iters", "tol", "likelihood"});
  EmConfig em;
  read(j, "B", em.grid_size);
  read(j, "max_iters", em.max_iters);
  read(j, "tol", em.tol);
  const std::string lik = j.value("likelihood", std::string("cell"));
  if (lik == "cell") {
    em.likelihood = EmLikelihood::cell;
  } else if (lik == "point") {
    em.likelihood = EmLikelihood::point;
  } else {
    throw IngestionError("em.likelihood must be cell or point");
  }
  return em;
}

BaselineConfig parse_baseline(const json& j) {
  reject_unknown(j, "baseline",
                 {"moving_window", "filter_sigma", "laplace_smooth_window",
                  "lbd_threshold_frac"});
  BaselineConfig b;
  read(j, "moving_window", b.moving_window);
  read(j, "filter_sigma", b.filter_sigma);
  read(j, "laplace_smooth_window", b.laplace_smooth_window);
  read(j, "lbd_threshold_frac", b.lbd_threshold_frac);
  return b;
}

ExperimentConfig parse(std::string_view text, const std::filesystem::path& base_dir) {
  try {
    const json j = json::parse(text);
    reject_unknown(j, "config",
                   {"name", "stream", "epsilons", "windows", "trials", "methods",
                    "base_seed", "sweeps", "detection", "em", "baseline", "tol_T"});
    if (!j.contains("stream")) throw IngestionError("config: missing 'stream' section");
    ExperimentConfig c;
    read(j, "name", c.name);
    c.stream = parse_stream(j.at("stream"), base_dir);
    read(j, "epsilons", c.epsilons);
    read(j, "windows", c.windows);
    read(j, "trials", c.trials);
    read(j, "base_seed", c.base_seed);
    read(j, "tol_T", c.tol_t);
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("sweeps")) {
      c.sweeps.clear();
      for (const auto& s : j.at("sweeps")) {
        const auto name = s.get<std::string>();
        if (name == "detection") {
          c.sweeps.push_back(Sweep::detection);
        } else if (name == "reconstruction") {
          c.sweeps.push_back(Sweep::reconstruction);
        } else {
          throw IngestionError("unknown sweep '" + name + "'");
        }
      }
    }
    if (j.contains("detection")) c.detection = parse_detection(j.at("detection"));
    if (j.contains("em")) c.em = parse_em(j.at("em"));
    if (j.contains("baseline")) c.baseline = parse_baseline(j.at("baseline"));
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw IngestionError(std::string("config: ") + e.what());
  } catch (const DomainError& e) {
    throw IngestionError(std::string("config: ") + e.what());
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  return parse(json_text, std::filesystem::current_path());
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.parent_path());
}

}  // namespace cpr
