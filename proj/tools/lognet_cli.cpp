// lognet: command-line front end for the LogNet toolkit.
//
// Settings come from an optional JSON config (--config) with individual
// flags layered on top: flag > config file > built-in default. Outputs land
// in --out, else the config's "out", else $LOGNET_OUT_ROOT/<command>, else
// ./lognet_out/<command>.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "lognet/lognet.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct Overrides {
  std::string config;
  std::string data;
  std::string rp_map;
  std::string model;
  std::string gate;
  std::optional<int> hidden;
  std::optional<double> threshold;
  std::optional<double> lr;
  std::optional<int> epochs;
  std::optional<std::uint64_t> seed;
  std::string noise_mode;
  std::optional<double> delta;
  std::string deltas_file;
  std::string schedule;
  std::string out;
};

void add_model_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--model", o.model, "Model family")->check(CLI::IsMember({"lognet", "dnn"}));
  cmd->add_option("--gate", o.gate, "Logic gate")->check(CLI::IsMember({"and", "or", "nand", "nor", "xor", "xnor"}));
  cmd->add_option("--hidden", o.hidden, "Logic layers (LogNet) or hidden layers (DNN)")->check(CLI::PositiveNumber);
  cmd->add_option("--threshold", o.threshold, "Binarization threshold in (0, 1)");
}

void add_train_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--lr", o.lr, "Adam learning rate");
  cmd->add_option("--epochs", o.epochs, "Training epochs");
  cmd->add_option("--seed", o.seed, "Seed for training, split and noise");
}

void add_data_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON experiment configuration")->check(CLI::ExistingFile);
  cmd->add_option("--data", o.data, "Fingerprint CSV (replaces any synth section)");
  cmd->add_option("--rp-map", o.rp_map, "RP map CSV");
  cmd->add_option("--out", o.out, "Output directory");
}

void add_noise_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--noise-mode", o.noise_mode, "Temporal noise structure")->check(CLI::IsMember({"ed", "non-ed"}));
  cmd->add_option("--delta", o.delta, "Explicit ED delta in dB");
  cmd->add_option("--deltas-file", o.deltas_file, "Per-AP deltas CSV (ap_index,delta_db)");
  cmd->add_option("--schedule", o.schedule, "Temporal schedule CSV (ci,multiplier)");
}

json load_json(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw lognet::IoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw lognet::ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

fs::path default_out(const std::string& command) {
  const char* root = std::getenv("LOGNET_OUT_ROOT");
  return fs::path(root && *root ? root : "lognet_out") / command;
}

std::string absolute(const std::string& p) { return fs::absolute(p).string(); }

// Applies flags on top of the config document. Paths given on the command
// line are made absolute so they do not resolve against the config's folder.
lognet::ExperimentConfig build_config(const Overrides& o, const std::string& command) {
  json j = load_json(o.config);
  if (!o.data.empty()) {
    j.erase("synth");
    j["data"]["fingerprints"] = absolute(o.data);
  }
  if (!o.rp_map.empty()) j["data"]["rp_map"] = absolute(o.rp_map);
  if (!o.model.empty()) j["model"]["family"] = o.model;
  if (!o.gate.empty()) j["model"]["gate"] = o.gate;
  if (o.hidden) j["model"]["hidden"] = *o.hidden;
  if (o.threshold) j["model"]["threshold"] = *o.threshold;
  if (o.lr) j["train"]["learning_rate"] = *o.lr;
  if (o.epochs) j["train"]["epochs"] = *o.epochs;
  if (o.seed) {
    j["train"]["seed"] = *o.seed;
    j["split"]["seed"] = *o.seed;
    if (j.contains("noise")) j["noise"]["seed"] = *o.seed;
    if (j.contains("synth")) j["synth"]["seed"] = *o.seed;
  }
  if (!o.noise_mode.empty()) j["noise"]["mode"] = o.noise_mode;
  if (o.delta) j["noise"]["delta"] = *o.delta;
  if (!o.deltas_file.empty()) j["noise"]["deltas_file"] = absolute(o.deltas_file);
  if (!o.schedule.empty()) j["schedule"] = {{"file", absolute(o.schedule)}};
  if (j.contains("noise") && !j.contains("schedule")) j["schedule"] = "default";
  if (!o.out.empty()) j["out"] = absolute(o.out);

  const fs::path base = o.config.empty() ? fs::path{} : fs::path(o.config).parent_path();
  auto cfg = lognet::config_from_json(j, base);
  if (!j.contains("out")) cfg.out_dir = default_out(command);
  return cfg;
}

void print_report(const lognet::EvalReport& r) {
  std::cout << "ci  samples  mean_err_m  min_m   max_m   accuracy\n";
  for (const auto& m : r.per_ci) {
    std::printf("%-3d %-8zu %-11.4f %-7.3f %-7.3f %.4f\n", m.ci, m.samples, m.mean_error_m, m.min_error_m, m.max_error_m,
                m.accuracy);
  }
  std::printf("family=%s params=%zu size_bytes=%zu latency_ms=%.4f\n", r.model_meta.family.c_str(), r.model_meta.params,
              r.model_meta.size_bytes, r.model_meta.latency_ms);
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw lognet::IoError("cannot open '" + path.string() + "' for writing");
  out << text;
}

// CI:0 dataset plus its RP map, either ingested or synthesized.
std::pair<lognet::Dataset, lognet::RpMap> load_data(const lognet::ExperimentConfig& cfg, bool need_map) {
  if (cfg.synth) return lognet::synth_dataset(*cfg.synth);
  if (!cfg.data) throw lognet::ConfigError("give --data or a config with a data/synth section");
  lognet::Dataset ds = lognet::ingest_fingerprints(cfg.data->fingerprints);
  lognet::RpMap map;
  if (need_map) map = lognet::load_rp_map(cfg.data->rp_map);
  return {std::move(ds), std::move(map)};
}

lognet::ExperimentConfig data_only_config(const Overrides& o, const std::string& command) {
  json j = load_json(o.config);
  if (!o.data.empty()) {
    j.erase("synth");
    j["data"]["fingerprints"] = absolute(o.data);
    if (!j["data"].contains("rp_map")) j["data"]["rp_map"] = "";
  }
  if (!o.rp_map.empty()) j["data"]["rp_map"] = absolute(o.rp_map);
  if (!o.gate.empty()) j["model"]["gate"] = o.gate;
  if (o.hidden) j["model"]["hidden"] = *o.hidden;
  if (o.threshold) j["model"]["threshold"] = *o.threshold;
  if (o.seed) j["split"]["seed"] = *o.seed;
  if (!o.out.empty()) j["out"] = absolute(o.out);
  const fs::path base = o.config.empty() ? fs::path{} : fs::path(o.config).parent_path();
  auto cfg = lognet::config_from_json(j, base);
  if (!j.contains("out")) cfg.out_dir = default_out(command);
  return cfg;
}

lognet::LogicEncoderConfig encoder_of(const lognet::ExperimentConfig& cfg) {
  auto enc = cfg.model.encoder;
  enc.hidden_layers = cfg.model.hidden_layers;
  enc.validate();
  return enc;
}

int cmd_synth(const Overrides& o, int rps, int aps, int per_rp) {
  json j = load_json(o.config);
  lognet::SynthSpec spec = j.contains("synth") ? lognet::config_from_json(j).synth.value() : lognet::SynthSpec{};
  if (rps > 0) spec.num_rps = rps;
  if (aps > 0) spec.num_aps = aps;
  if (per_rp > 0) spec.fingerprints_per_rp = per_rp;
  if (o.seed) spec.seed = *o.seed;
  const fs::path out = o.out.empty() ? (j.contains("out") ? fs::path(j["out"].get<std::string>()) : default_out("synth")) : fs::path(o.out);

  auto [clean, map] = lognet::synth_dataset(spec);
  lognet::Dataset ds = clean;
  fs::create_directories(out);
  if (!o.noise_mode.empty() || !o.schedule.empty() || j.contains("noise")) {
    Overrides noise_only = o;
    noise_only.out = out.string();
    auto cfg = build_config(noise_only, "synth");
    const auto n = cfg.noise.value_or(lognet::NoiseConfig{});
    const auto deltas = lognet::detail::resolve_deltas(n, clean, cfg);
    ds = lognet::simulate_cis(clean, lognet::NoiseSpec{n.mode, deltas, {n.sigma}, n.seed},
                              cfg.schedule.value_or(lognet::default_schedule()));
    std::ofstream d(out / "deltas.csv");
    lognet::write_deltas(d, deltas);
  }
  lognet::write_dataset(out / "fingerprints.csv", ds);
  lognet::save_rp_map(out / "rp_map.csv", map);
  std::cout << "wrote " << ds.size() << " fingerprints (" << ds.ap_count() << " APs, " << ds.rp_ids().size() << " RPs, "
            << ds.cis().size() << " CIs) to " << out << "\n";
  return 0;
}

int cmd_train(const Overrides& o, std::size_t holdout) {
  auto cfg = build_config(o, "train");
  cfg.per_rp_holdout = holdout;
  auto [ds, map] = load_data(cfg, false);
  auto [train, test] = lognet::split_train_test(ds, holdout, cfg.split_seed);
  const auto train0 = train.only_ci(0);
  std::vector<double> history;
  fs::create_directories(cfg.out_dir);
  if (cfg.model.family == lognet::ModelFamily::LogNet) {
    auto r = lognet::train_lognet(train0, encoder_of(cfg), cfg.train, cfg.range);
    lognet::save_model(cfg.out_dir / "model.json", r.model);
    history = std::move(r.loss_history);
  } else {
    auto r = lognet::train_dnn_classifier(train0, cfg.model.hidden_layers, cfg.train, cfg.range);
    lognet::save_model(cfg.out_dir / "model.json", r.model);
    history = std::move(r.loss_history);
  }
  std::string csv = "epoch,loss\n";
  for (std::size_t e = 0; e < history.size(); ++e) csv += std::to_string(e) + "," + lognet::csv::format_double(history[e]) + "\n";
  write_file(cfg.out_dir / "loss_history.csv", csv);
  write_file(cfg.out_dir / "config.json", lognet::config_echo(cfg).dump(2) + "\n");
  std::cout << "trained " << cfg.model.display_name() << " on " << train0.size() << " CI:0 fingerprints";
  if (!history.empty()) std::cout << ", final loss " << history.back();
  std::cout << "\nmodel written to " << (cfg.out_dir / "model.json") << "\n";
  return 0;
}

int cmd_eval(const Overrides& o, const std::string& model_file, std::size_t holdout, bool all, int reps) {
  auto cfg = data_only_config(o, "eval");
  auto [ds, map] = load_data(cfg, true);
  const lognet::Dataset test = all ? ds : lognet::split_train_test(ds, holdout, cfg.split_seed).second;
  const auto model = lognet::load_model(model_file);
  auto report = std::visit(
      [&](const auto& m) {
        auto r = lognet::evaluate(m, test, map);
        r.model_meta.latency_ms = lognet::measure_latency(m, test, reps);
        r.model_meta.environment = lognet::environment_descriptor();
        return r;
      },
      model);
  report.config = {{"model_file", model_file},
                   {"data", cfg.data ? cfg.data->fingerprints.generic_string() : "synth"},
                   {"holdout", all ? json("all") : json(holdout)},
                   {"split_seed", cfg.split_seed}};
  write_file(cfg.out_dir / "report.json", lognet::to_json(report).dump(2) + "\n");
  print_report(report);
  return 0;
}

int cmd_encode(const Overrides& o) {
  auto cfg = data_only_config(o, "encode");
  auto [ds, map] = load_data(cfg, false);
  const auto latents = lognet::encode_dataset(ds, encoder_of(cfg), cfg.range);
  fs::create_directories(cfg.out_dir);
  std::ofstream out(cfg.out_dir / "latents.csv");
  lognet::write_latents(out, lognet::labels_of(ds), latents);
  std::cout << "encoded " << latents.size() << " fingerprints into " << (latents.empty() ? 0 : latents.front().size())
            << "-bit latents -> " << (cfg.out_dir / "latents.csv") << "\n";
  return 0;
}

int cmd_bitmap(const Overrides& o, int ci) {
  auto cfg = data_only_config(o, "bitmap");
  auto [ds, map] = load_data(cfg, false);
  const auto snapshot = ds.only_ci(ci);
  const auto latents = lognet::encode_dataset(snapshot, encoder_of(cfg), cfg.range);
  const auto majority = lognet::majority_latents(latents, lognet::labels_of(snapshot));
  const auto path = cfg.out_dir / "latent_bitmap.pgm";
  lognet::export_latent_bitmap(majority, path);
  std::cout << "wrote " << majority.size() << " x " << (majority.empty() ? 0 : majority.begin()->second.size())
            << " latent bitmap (rows = RPs, columns = bits) to " << path << "\n";
  return 0;
}

int cmd_trace(const Overrides& o, std::optional<std::size_t> bit, std::optional<std::size_t> aps,
              std::optional<int> rp_a, std::optional<int> rp_b, int ci) {
  if (bit) {
    if (!aps || !o.hidden) throw lognet::ConfigError("--bit needs --aps and --hidden");
    const auto w = lognet::trace_bit_to_aps(*bit, *o.hidden, *aps);
    std::cout << "latent bit " << *bit << " at depth " << *o.hidden << " over " << *aps << " APs <- APs [" << w.begin
              << ", " << w.end << ")\n";
    return 0;
  }
  if (!rp_a || !rp_b) throw lognet::ConfigError("trace needs either --bit or both --rp-a and --rp-b");
  auto cfg = data_only_config(o, "trace");
  auto [ds, map] = load_data(cfg, false);
  const auto enc = encoder_of(cfg);
  std::vector<lognet::LatentCode> a, b;
  for (const auto& fp : ds.only_ci(ci)) {
    if (fp.rp_id != *rp_a && fp.rp_id != *rp_b) continue;
    auto code = lognet::encode(lognet::binarize(lognet::normalize_rss(fp.rss, cfg.range), enc.threshold), enc);
    (fp.rp_id == *rp_a ? a : b).push_back(std::move(code));
  }
  if (a.empty() || b.empty()) throw lognet::LookupError("no CI:" + std::to_string(ci) + " fingerprints for one of the RPs");
  std::cout << lognet::format_latent_diff(lognet::latent_diff(a, b, *rp_a, *rp_b));
  return 0;
}

// Either a JSON array of configs, or {"base": {...}, "variants": [{...}, ...]}
// where each variant is merged over the base.
int cmd_compare(const Overrides& o) {
  json doc = load_json(o.config);
  std::vector<json> docs;
  if (doc.is_array()) {
    for (auto& d : doc) docs.push_back(d);
  } else if (doc.contains("variants")) {
    for (const auto& v : doc.at("variants")) {
      json merged = doc.value("base", json::object());
      merged.merge_patch(v);
      docs.push_back(merged);
    }
  } else {
    throw lognet::ConfigError("compare config must be an array or have a 'variants' list");
  }
  std::vector<lognet::ExperimentConfig> cfgs;
  const fs::path base = fs::path(o.config).parent_path();
  for (const auto& d : docs) {
    auto cfg = lognet::config_from_json(d, base);
    if (o.lr) cfg.train.learning_rate = *o.lr;
    if (o.epochs) cfg.train.epochs = *o.epochs;
    if (o.seed) {
      cfg.train.seed = cfg.split_seed = *o.seed;
      if (cfg.synth) cfg.synth->seed = *o.seed;
      if (cfg.noise) cfg.noise->seed = *o.seed;
    }
    cfgs.push_back(std::move(cfg));
  }
  fs::path out = default_out("compare");
  if (!o.out.empty())
    out = o.out;
  else if (doc.is_object() && doc.contains("out"))
    out = base / doc["out"].get<std::string>();
  const auto table = lognet::compare_models(cfgs, out);
  std::cout << table.to_text();
  std::cout << "comparison written to " << (out / "comparison.csv") << "\n";
  return 0;
}

int cmd_run(const Overrides& o) {
  auto cfg = build_config(o, "run");
  const auto result = lognet::run_experiment(cfg);
  print_report(result.report);
  std::cout << "artifacts in " << result.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LogNet logic-gate fingerprint localization toolkit"};
  app.require_subcommand(1);
  Overrides o;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic building (optionally with temporal CIs)");
  int rps = 0, aps = 0, per_rp = 0;
  synth->add_option("--config", o.config, "JSON config with a synth section")->check(CLI::ExistingFile);
  synth->add_option("--rps", rps, "Number of reference points");
  synth->add_option("--aps", aps, "Number of access points");
  synth->add_option("--per-rp", per_rp, "Fingerprints per RP and CI");
  synth->add_option("--seed", o.seed, "Generator seed");
  synth->add_option("--out", o.out, "Output directory");
  add_noise_flags(synth, o);

  std::size_t holdout = 1;
  auto* train = app.add_subcommand("train", "Train a model on the CI:0 training split");
  add_data_flags(train, o);
  add_model_flags(train, o);
  add_train_flags(train, o);
  train->add_option("--holdout", holdout, "Fingerprints held out per (RP, CI)");

  auto* eval = app.add_subcommand("eval", "Evaluate a saved model per CI");
  std::string model_file;
  bool all = false;
  int reps = 5;
  add_data_flags(eval, o);
  eval->add_option("--model-file", model_file, "Saved model JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--holdout", holdout, "Fingerprints held out per (RP, CI); must match training");
  eval->add_option("--seed", o.seed, "Split seed used at training time");
  eval->add_flag("--all", all, "Evaluate every fingerprint instead of the held-out split");
  eval->add_option("--repetitions", reps, "Latency repetitions")->check(CLI::Range(3, 1000));

  auto* encode = app.add_subcommand("encode", "Write LogNet latent codes as CSV");
  add_data_flags(encode, o);
  add_model_flags(encode, o);

  int ci = 0;
  auto* bitmap = app.add_subcommand("bitmap", "Write per-RP majority latents as a PGM bitmap");
  add_data_flags(bitmap, o);
  add_model_flags(bitmap, o);
  bitmap->add_option("--ci", ci, "Collection instance to render");

  std::optional<std::size_t> bit, ap_count;
  std::optional<int> rp_a, rp_b;
  auto* trace = app.add_subcommand("trace", "Map latent bits back to AP windows, or diff two RPs");
  add_data_flags(trace, o);
  add_model_flags(trace, o);
  trace->add_option("--bit", bit, "Latent bit index");
  trace->add_option("--aps", ap_count, "Input AP count (with --bit)");
  trace->add_option("--rp-a", rp_a, "First RP");
  trace->add_option("--rp-b", rp_b, "Second RP");
  trace->add_option("--ci", ci, "Collection instance to compare");

  auto* compare = app.add_subcommand("compare", "Run several configurations and tabulate them");
  compare->add_option("--config", o.config, "JSON list of configs, or base + variants")->required()->check(CLI::ExistingFile);
  compare->add_option("--out", o.out, "Output directory");
  add_train_flags(compare, o);

  auto* run = app.add_subcommand("run", "Full pipeline: data, noise, split, train, evaluate, artifacts");
  add_data_flags(run, o);
  add_model_flags(run, o);
  add_train_flags(run, o);
  add_noise_flags(run, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*synth) return cmd_synth(o, rps, aps, per_rp);
    if (*train) return cmd_train(o, holdout);
    if (*eval) return cmd_eval(o, model_file, holdout, all, reps);
    if (*encode) return cmd_encode(o);
    if (*bitmap) return cmd_bitmap(o, ci);
    if (*trace) return cmd_trace(o, bit, ap_count, rp_a, rp_b, ci);
    if (*compare) return cmd_compare(o);
    if (*run) return cmd_run(o);
  } catch (const lognet::ConfigError& e) {
    std::cerr << "lognet: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "lognet: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
