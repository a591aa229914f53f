#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "lognet/classifiers.hpp"
#include "lognet/core_data.hpp"
#include "lognet/csv_io.hpp"
#include "lognet/error.hpp"
#include "lognet/eval.hpp"
#include "lognet/gates.hpp"
#include "lognet/models.hpp"
#include "lognet/noise_sim.hpp"
#include "lognet/serialize.hpp"

namespace lognet {

enum class ModelFamily { LogNet, Dnn };

inline ModelFamily parse_family(std::string_view s) {
  if (s == "lognet") return ModelFamily::LogNet;
  if (s == "dnn") return ModelFamily::Dnn;
  throw ConfigError("unknown model family '" + std::string(s) + "' (expected lognet|dnn)");
}

constexpr std::string_view to_string(ModelFamily f) noexcept { return f == ModelFamily::LogNet ? "lognet" : "dnn"; }

inline constexpr int kLogNetDefaultEpochs = 150;
inline constexpr int kDnnDefaultEpochs = 500;

struct DataPaths {
  std::filesystem::path fingerprints;
  std::filesystem::path rp_map;
};

struct ModelSpec {
  ModelFamily family = ModelFamily::LogNet;
  LogicEncoderConfig encoder;  // threshold and gate are used by LogNet only
  int hidden_layers = 1;       // logic layers (LogNet) or hidden dense layers (DNN)

  std::string display_name() const {
    std::string gate(to_string(encoder.gate));
    for (auto& c : gate) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return family == ModelFamily::LogNet ? "LogNet-" + gate + "-" + std::to_string(hidden_layers) + "H"
                                         : "DNN-" + std::to_string(hidden_layers) + "H";
  }
};

enum class DeltaSource { Explicit, File, SubThreshold };

struct NoiseConfig {
  NoiseMode mode = NoiseMode::NonEuclidean;
  DeltaSource source = DeltaSource::SubThreshold;
  std::vector<double> deltas;  // explicit values (one for ED)
  std::filesystem::path deltas_file;
  double margin_db = 1.0;      // sub-threshold derivation only
  double max_shift_db = 30.0;  // sub-threshold derivation only
  DeltaDraw draw = DeltaDraw::Edge;  // sub-threshold derivation only
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::string name = "run";
  std::optional<DataPaths> data;
  std::optional<SynthSpec> synth;
  ModelSpec model;
  TrainConfig train;
  std::size_t per_rp_holdout = 1;
  std::uint64_t split_seed = 0;
  NormalizationRange range;
  std::optional<NoiseConfig> noise;
  std::optional<TemporalSchedule> schedule;
  int latency_repetitions = 5;
  std::filesystem::path out_dir = "lognet_out";

  void validate() const {
    if (data.has_value() == synth.has_value())
      throw ConfigError("exactly one of 'data' (fingerprint + RP-map paths) or 'synth' must be given");
    if (data) {
      for (const auto& p : {data->fingerprints, data->rp_map})
        if (!std::filesystem::exists(p)) throw ConfigError("referenced file '" + p.string() + "' does not exist");
    }
    if (synth) synth->validate();
    if (noise && noise->source == DeltaSource::File && !std::filesystem::exists(noise->deltas_file))
      throw ConfigError("referenced file '" + noise->deltas_file.string() + "' does not exist");
    if (noise && !schedule) throw ConfigError("noise needs a temporal schedule");
    if (schedule) schedule->validate();
    if (model.family == ModelFamily::LogNet) model.encoder.validate();
    if (model.hidden_layers < 1) throw ConfigError("hidden layers must be >= 1");
    train.validate();
    range.validate();
    if (latency_repetitions < 3) throw ConfigError("latency_repetitions must be >= 3");
  }
};

namespace detail {

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline SynthSpec synth_from_json(const nlohmann::json& j) {
  SynthSpec s;
  read_opt(j, "num_rps", s.num_rps);
  read_opt(j, "num_aps", s.num_aps);
  read_opt(j, "fingerprints_per_rp", s.fingerprints_per_rp);
  read_opt(j, "active_pair_fraction", s.active_pair_fraction);
  read_opt(j, "walk_toggles", s.walk_toggles);
  read_opt(j, "rp_variation_db", s.rp_variation_db);
  read_opt(j, "strong_lo_dbm", s.strong_lo_dbm);
  read_opt(j, "strong_hi_dbm", s.strong_hi_dbm);
  read_opt(j, "weak_lo_dbm", s.weak_lo_dbm);
  read_opt(j, "weak_hi_dbm", s.weak_hi_dbm);
  read_opt(j, "missing_fraction", s.missing_fraction);
  read_opt(j, "jitter_db", s.jitter_db);
  read_opt(j, "grid_columns", s.grid_columns);
  read_opt(j, "spacing_m", s.spacing_m);
  read_opt(j, "seed", s.seed);
  if (j.contains("layout")) {
    const auto layout = j.at("layout").get<std::string>();
    if (layout == "path")
      s.layout = RpLayout::Path;
    else if (layout == "grid")
      s.layout = RpLayout::Grid;
    else
      throw ConfigError("synth layout must be path|grid");
  }
  return s;
}

inline nlohmann::json synth_to_json(const SynthSpec& s) {
  return {{"num_rps", s.num_rps},
          {"num_aps", s.num_aps},
          {"fingerprints_per_rp", s.fingerprints_per_rp},
          {"active_pair_fraction", s.active_pair_fraction},
          {"walk_toggles", s.walk_toggles},
          {"rp_variation_db", s.rp_variation_db},
          {"strong_lo_dbm", s.strong_lo_dbm},
          {"strong_hi_dbm", s.strong_hi_dbm},
          {"weak_lo_dbm", s.weak_lo_dbm},
          {"weak_hi_dbm", s.weak_hi_dbm},
          {"missing_fraction", s.missing_fraction},
          {"jitter_db", s.jitter_db},
          {"layout", s.layout == RpLayout::Path ? "path" : "grid"},
          {"grid_columns", s.grid_columns},
          {"spacing_m", s.spacing_m},
          {"seed", s.seed}};
}

inline nlohmann::json schedule_to_json(const TemporalSchedule& s) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : s.entries) out.push_back({{"ci", e.ci}, {"multiplier", e.multiplier}});
  return out;
}

}  // namespace detail

// Relative paths inside the document resolve against `base_dir`.
inline ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  using detail::read_opt;
  ExperimentConfig cfg;
  try {
    read_opt(j, "name", cfg.name);
    if (j.contains("data")) {
      const auto& d = j.at("data");
      cfg.data = DataPaths{detail::resolve(base_dir, d.at("fingerprints").get<std::string>()),
                           detail::resolve(base_dir, d.at("rp_map").get<std::string>())};
    }
    if (j.contains("synth")) cfg.synth = detail::synth_from_json(j.at("synth"));

    bool epochs_given = false;
    if (j.contains("model")) {
      const auto& m = j.at("model");
      if (m.contains("family")) cfg.model.family = parse_family(m.at("family").get<std::string>());
      if (m.contains("gate")) cfg.model.encoder.gate = parse_gate(m.at("gate").get<std::string>());
      read_opt(m, "threshold", cfg.model.encoder.threshold);
      read_opt(m, "hidden", cfg.model.hidden_layers);
    }
    cfg.model.encoder.hidden_layers = cfg.model.hidden_layers;
    if (j.contains("train")) {
      const auto& t = j.at("train");
      read_opt(t, "learning_rate", cfg.train.learning_rate);
      epochs_given = t.contains("epochs");
      read_opt(t, "epochs", cfg.train.epochs);
      read_opt(t, "seed", cfg.train.seed);
      read_opt(t, "batch_size", cfg.train.batch_size);
      read_opt(t, "adam_beta1", cfg.train.adam.beta1);
      read_opt(t, "adam_beta2", cfg.train.adam.beta2);
      read_opt(t, "adam_epsilon", cfg.train.adam.epsilon);
    }
    if (!epochs_given) cfg.train.epochs = cfg.model.family == ModelFamily::LogNet ? kLogNetDefaultEpochs : kDnnDefaultEpochs;
    if (j.contains("split")) {
      read_opt(j.at("split"), "per_rp_holdout", cfg.per_rp_holdout);
      read_opt(j.at("split"), "seed", cfg.split_seed);
    }
    if (j.contains("normalization")) {
      read_opt(j.at("normalization"), "lo_dbm", cfg.range.lo);
      read_opt(j.at("normalization"), "hi_dbm", cfg.range.hi);
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      NoiseConfig noise;
      if (n.contains("mode")) noise.mode = parse_noise_mode(n.at("mode").get<std::string>());
      read_opt(n, "margin_db", noise.margin_db);
      read_opt(n, "max_shift_db", noise.max_shift_db);
      if (n.contains("draw")) noise.draw = parse_delta_draw(n.at("draw").get<std::string>());
      read_opt(n, "sigma", noise.sigma);
      read_opt(n, "seed", noise.seed);
      if (n.contains("deltas_file")) {
        noise.source = DeltaSource::File;
        noise.deltas_file = detail::resolve(base_dir, n.at("deltas_file").get<std::string>());
      } else if (n.contains("delta") && !(n.at("delta").is_string() && n.at("delta").get<std::string>() == "sub-threshold")) {
        noise.source = DeltaSource::Explicit;
        const auto& d = n.at("delta");
        noise.deltas = d.is_array() ? d.get<std::vector<double>>() : std::vector<double>{d.get<double>()};
      } else if (noise.mode == NoiseMode::Euclidean) {
        throw ConfigError("ED noise needs an explicit 'delta'");
      }
      cfg.noise = noise;
    }
    if (j.contains("schedule")) {
      const auto& s = j.at("schedule");
      if (s.is_string() && s.get<std::string>() == "default") {
        cfg.schedule = default_schedule();
      } else if (s.is_object() && s.contains("file")) {
        cfg.schedule = load_schedule(detail::resolve(base_dir, s.at("file").get<std::string>()));
      } else {
        TemporalSchedule sched;
        for (const auto& e : s) sched.entries.push_back({e.at("ci").get<int>(), e.at("multiplier").get<double>()});
        cfg.schedule = sched;
      }
    }
    read_opt(j, "latency_repetitions", cfg.latency_repetitions);
    if (j.contains("out")) cfg.out_dir = detail::resolve(base_dir, j.at("out").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed experiment configuration: ") + e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

// Fully resolved configuration; `deltas` is the per-AP vector actually applied.
inline nlohmann::json config_echo(const ExperimentConfig& cfg, const std::vector<double>& deltas = {}) {
  nlohmann::json j;
  j["name"] = cfg.name;
  if (cfg.data) j["data"] = {{"fingerprints", cfg.data->fingerprints.generic_string()}, {"rp_map", cfg.data->rp_map.generic_string()}};
  if (cfg.synth) j["synth"] = detail::synth_to_json(*cfg.synth);
  j["model"] = {{"family", to_string(cfg.model.family)}, {"hidden", cfg.model.hidden_layers}};
  if (cfg.model.family == ModelFamily::LogNet) {
    j["model"]["gate"] = to_string(cfg.model.encoder.gate);
    j["model"]["threshold"] = cfg.model.encoder.threshold;
  }
  j["train"] = {{"learning_rate", cfg.train.learning_rate},
                {"epochs", cfg.train.epochs},
                {"seed", cfg.train.seed},
                {"batch_size", cfg.train.batch_size},
                {"adam_beta1", cfg.train.adam.beta1},
                {"adam_beta2", cfg.train.adam.beta2},
                {"adam_epsilon", cfg.train.adam.epsilon},
                {"init", "uniform(+-sqrt(6/fan_in)) hidden, uniform(+-1/sqrt(fan_in)) output, first-layer biases centered on the input cube, other biases zero"},
                {"loss", "mean sparse categorical cross-entropy"}};
  j["split"] = {{"per_rp_holdout", cfg.per_rp_holdout}, {"seed", cfg.split_seed}};
  j["normalization"] = {{"lo_dbm", cfg.range.lo}, {"hi_dbm", cfg.range.hi}};
  if (cfg.noise) {
    const auto& n = *cfg.noise;
    j["noise"] = {{"mode", to_string(n.mode)}, {"sigma", n.sigma}, {"seed", n.seed}};
    if (n.source == DeltaSource::SubThreshold) {
      j["noise"]["derivation"] = "sub-threshold";
      j["noise"]["margin_db"] = n.margin_db;
      j["noise"]["max_shift_db"] = n.max_shift_db;
      j["noise"]["draw"] = to_string(n.draw);
    } else if (n.source == DeltaSource::File) {
      j["noise"]["deltas_file"] = n.deltas_file.generic_string();
    }
    j["noise"]["delta"] = deltas.empty() ? nlohmann::json(n.deltas) : nlohmann::json(deltas);
  }
  if (cfg.schedule) j["schedule"] = detail::schedule_to_json(*cfg.schedule);
  j["latency_repetitions"] = cfg.latency_repetitions;
  return j;
}

struct RunResult {
  EvalReport report;
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> artifacts;
};

namespace detail {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

inline std::vector<double> resolve_deltas(const NoiseConfig& n, const Dataset& clean, const ExperimentConfig& cfg) {
  switch (n.source) {
    case DeltaSource::Explicit: return n.deltas;
    case DeltaSource::File: return load_deltas(n.deltas_file);
    case DeltaSource::SubThreshold:
      return sub_threshold_deltas(clean, cfg.model.encoder.threshold, cfg.range, n.margin_db, n.seed, n.max_shift_db, n.draw);
  }
  return {};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// Writes the per-family interpretability artifacts for the CI:0 training set.
inline void write_lognet_artifacts(const LogNetModel& model, const Dataset& train0, const std::filesystem::path& dir,
                                   std::vector<std::filesystem::path>& written) {
  const auto latents = encode_dataset(train0, model.encoder, model.range);
  const auto labels = labels_of(train0);
  {
    const auto path = dir / "latents.csv";
    auto out = csv::open_out(path);
    write_latents(out, labels, latents);
    csv::finish(out, path);
    written.push_back(path);
  }
  const auto majority = majority_latents(latents, labels);
  export_latent_bitmap(majority, dir / "latent_bitmap.pgm");
  written.push_back(dir / "latent_bitmap.pgm");

  // Adjacent-RP diffs in rp_id order.
  std::string trace;
  std::map<RpId, std::vector<LatentCode>> by_rp;
  for (std::size_t i = 0; i < latents.size(); ++i) by_rp[labels[i]].push_back(latents[i]);
  for (auto it = by_rp.begin(); it != by_rp.end(); ++it) {
    auto next = std::next(it);
    if (next == by_rp.end()) break;
    trace += format_latent_diff(latent_diff(it->second, next->second, it->first, next->first)) + "\n";
  }
  write_text(dir / "trace.txt", trace);
  written.push_back(dir / "trace.txt");
}

inline void write_dnn_artifacts(const DnnClassifier& model, const Dataset& train0, const std::filesystem::path& dir,
                                std::vector<std::filesystem::path>& written) {
  std::map<RpId, std::pair<std::vector<double>, std::size_t>> sums;
  for (const auto& fp : train0) {
    const auto h = model.latent(fp.rss);
    auto& [acc, n] = sums[fp.rp_id];
    if (acc.empty()) acc.assign(h.size(), 0.0);
    for (std::size_t k = 0; k < h.size(); ++k) acc[k] += h[k];
    ++n;
  }
  std::vector<std::vector<double>> rows;
  for (auto& [rp, entry] : sums) {
    for (auto& v : entry.first) v /= static_cast<double>(entry.second);
    rows.push_back(entry.first);
  }
  write_pgm(dir / "dnn_latent.pgm", grayscale_bitmap(rows));
  written.push_back(dir / "dnn_latent.pgm");
}

}  // namespace detail

// synth-or-ingest -> temporal noise -> split -> train on CI:0 -> evaluate
// every CI -> artifacts. Artifacts are staged and moved into out_dir on
// success; on failure the partial set is left in out_dir/quarantine.
inline RunResult run_experiment(const ExperimentConfig& cfg) {
  detail::stage("config", [&] { cfg.validate(); });
  const auto out_dir = cfg.out_dir;
  const auto staging = out_dir / ".staging";
  ensure_dir(out_dir);
  std::filesystem::remove_all(staging);
  ensure_dir(staging);

  RunResult result;
  result.out_dir = out_dir;
  std::vector<std::filesystem::path> staged;
  try {
    auto [clean, map] = detail::stage("load", [&] {
      if (cfg.synth) return synth_dataset(*cfg.synth);
      return std::pair<Dataset, RpMap>{ingest_fingerprints(cfg.data->fingerprints), load_rp_map(cfg.data->rp_map)};
    });
    detail::stage("load", [&] { map.require_covers(clean); });

    std::vector<double> deltas;
    Dataset all = detail::stage("noise", [&] {
      if (!cfg.schedule) return clean;
      NoiseSpec spec = NoiseSpec::euclidean(0.0, 0.0, 0);
      if (cfg.noise) {
        deltas = detail::resolve_deltas(*cfg.noise, clean, cfg);
        spec = NoiseSpec{cfg.noise->mode, deltas, {cfg.noise->sigma}, cfg.noise->seed};
      }
      return simulate_cis(clean, spec, *cfg.schedule);
    });

    auto [train, test] = detail::stage("split", [&] { return split_train_test(all, cfg.per_rp_holdout, cfg.split_seed); });
    const Dataset train0 = train.only_ci(0);

    const auto dump = [&](const char* file, const std::string& text) {
      detail::write_text(staging / file, text);
      staged.push_back(staging / file);
    };

    auto finish = [&](const auto& model) {
      EvalReport report = detail::stage("evaluate", [&] {
        auto r = evaluate(model, test, map);
        if (cfg.schedule) {
          for (int ci : cfg.schedule->cis())
            if (!test.cis().count(ci)) throw ValidationError("no test fingerprints for ci " + std::to_string(ci));
        }
        r.model_meta.latency_ms = measure_latency(model, test, cfg.latency_repetitions);
        r.model_meta.environment = environment_descriptor();
        r.config = config_echo(cfg, deltas);
        r.validate();
        return r;
      });
      detail::stage("artifacts", [&] {
        dump("report.json", to_json(report).dump(2) + "\n");
        dump("model.json", to_json(model).dump(2) + "\n");
        dump("config.json", config_echo(cfg, deltas).dump(2) + "\n");
        if constexpr (std::is_same_v<std::decay_t<decltype(model)>, LogNetModel>)
          detail::write_lognet_artifacts(model, train0, staging, staged);
        else
          detail::write_dnn_artifacts(model, train0, staging, staged);
      });
      return report;
    };

    if (cfg.model.family == ModelFamily::LogNet) {
      LogicEncoderConfig enc = cfg.model.encoder;
      enc.hidden_layers = cfg.model.hidden_layers;
      auto trained = detail::stage("train", [&] { return train_lognet(train0, enc, cfg.train, cfg.range); });
      result.report = finish(trained.model);
    } else {
      auto trained = detail::stage("train", [&] { return train_dnn_classifier(train0, cfg.model.hidden_layers, cfg.train, cfg.range); });
      result.report = finish(trained.model);
    }
  } catch (...) {
    const auto quarantine = out_dir / "quarantine";
    std::error_code ec;
    std::filesystem::remove_all(quarantine, ec);
    std::filesystem::rename(staging, quarantine, ec);
    throw;
  }

  for (const auto& src : staged) {
    const auto dst = out_dir / src.filename();
    std::filesystem::rename(src, dst);
    result.artifacts.push_back(dst);
  }
  std::filesystem::remove_all(staging);
  std::filesystem::remove_all(out_dir / "quarantine");
  return result;
}

struct ComparisonRow {
  std::string model;
  std::string family;
  std::string gate;  // "-" for DNN
  int depth = 0;
  std::vector<int> cis;
  std::vector<double> mean_error_m;  // parallel to cis
  std::size_t params = 0;
  std::size_t size_bytes = 0;
  double latency_ms = 0.0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;

  std::string to_csv() const {
    std::ostringstream os;
    os << "model,family,gate,depth,params,size_bytes,latency_ms";
    if (!rows.empty())
      for (int ci : rows.front().cis) os << ",err_ci" << ci;
    os << '\n';
    for (const auto& r : rows) {
      os << r.model << ',' << r.family << ',' << r.gate << ',' << r.depth << ',' << r.params << ',' << r.size_bytes << ','
         << csv::format_double(r.latency_ms);
      for (double e : r.mean_error_m) os << ',' << csv::format_double(e);
      os << '\n';
    }
    return os.str();
  }

  std::string to_text() const {
    std::ostringstream os;
    os << std::left << std::setw(18) << "model" << std::setw(6) << "gate" << std::setw(7) << "depth" << std::right
       << std::setw(10) << "params" << std::setw(12) << "size_bytes" << std::setw(12) << "latency_ms";
    if (!rows.empty())
      for (int ci : rows.front().cis) os << std::setw(9) << ("ci" + std::to_string(ci));
    os << '\n';
    for (const auto& r : rows) {
      os << std::left << std::setw(18) << r.model << std::setw(6) << r.gate << std::setw(7) << r.depth << std::right
         << std::setw(10) << r.params << std::setw(12) << r.size_bytes << std::setw(12) << std::fixed
         << std::setprecision(3) << r.latency_ms;
      for (double e : r.mean_error_m) os << std::setw(9) << std::fixed << std::setprecision(3) << e;
      os << '\n';
    }
    return os.str();
  }
};

namespace detail {

inline nlohmann::json shared_settings(const ExperimentConfig& c) {
  auto echo = config_echo(c);
  nlohmann::json shared;
  for (const char* key : {"data", "synth", "split", "normalization", "noise", "schedule"})
    if (echo.contains(key)) shared[key] = echo[key];
  shared["train_seed"] = c.train.seed;
  return shared;
}

}  // namespace detail

// Each config runs into out_dir/<model name>; all must share data, split,
// noise and seeds.
inline ComparisonTable compare_models(std::vector<ExperimentConfig> cfgs, const std::filesystem::path& out_dir) {
  if (cfgs.empty()) throw ValidationError("compare_models needs at least one configuration");
  const auto reference = detail::shared_settings(cfgs.front());
  for (std::size_t k = 1; k < cfgs.size(); ++k) {
    if (detail::shared_settings(cfgs[k]) != reference)
      throw ValidationError("configuration " + std::to_string(k) + " ('" + cfgs[k].name +
                            "') does not share the dataset, split, noise and seed settings of the first");
  }
  ComparisonTable table;
  for (auto& cfg : cfgs) {
    const std::string name = cfg.model.display_name();
    cfg.out_dir = out_dir / name;
    const auto run = run_experiment(cfg);
    ComparisonRow row;
    row.model = name;
    row.family = std::string(to_string(cfg.model.family));
    row.gate = cfg.model.family == ModelFamily::LogNet ? std::string(to_string(cfg.model.encoder.gate)) : "-";
    row.depth = cfg.model.hidden_layers;
    for (const auto& m : run.report.per_ci) {
      row.cis.push_back(m.ci);
      row.mean_error_m.push_back(m.mean_error_m);
    }
    row.params = run.report.model_meta.params;
    row.size_bytes = run.report.model_meta.size_bytes;
    row.latency_ms = run.report.model_meta.latency_ms;
    table.rows.push_back(std::move(row));
  }
  ensure_dir(out_dir);
  detail::write_text(out_dir / "comparison.csv", table.to_csv());
  detail::write_text(out_dir / "comparison.txt", table.to_text());
  return table;
}

}  // namespace lognet
