#include <gtest/gtest.h>

#include "support.hpp"

using namespace lognet;
using nlohmann::json;
using testing_support::fixture;
using testing_support::slurp;
using testing_support::TempDir;

namespace {

ExperimentConfig smoke_config(const std::filesystem::path& out) {
  ExperimentConfig cfg;
  SynthSpec s;
  s.num_rps = 8;
  s.num_aps = 16;
  s.fingerprints_per_rp = 4;
  s.seed = 4;
  cfg.synth = s;
  cfg.model.family = ModelFamily::LogNet;
  cfg.model.encoder.gate = GateType::Nor;
  cfg.noise = NoiseConfig{};
  cfg.noise->seed = 4;
  cfg.schedule = default_schedule();
  cfg.latency_repetitions = 3;
  cfg.out_dir = out;
  return cfg;
}

json without_timing(json report) {
  report["model_meta"].erase("latency_ms");
  report["model_meta"].erase("environment");
  return report;
}

}  // namespace

TEST(RunExperiment, SyntheticSmokeRunHasTenCis) {
  TempDir dir("smoke");
  const auto result = run_experiment(smoke_config(dir.path()));
  ASSERT_EQ(result.report.per_ci.size(), 10u);
  for (int ci = 0; ci < 10; ++ci) EXPECT_EQ(result.report.per_ci[ci].ci, ci);
  for (const char* f : {"report.json", "model.json", "config.json", "latents.csv", "latent_bitmap.pgm", "trace.txt"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  EXPECT_FALSE(std::filesystem::exists(dir / ".staging"));
  const auto on_disk = report_from_json(json::parse(slurp(dir / "report.json")));
  EXPECT_EQ(on_disk.per_ci, result.report.per_ci);
}

TEST(RunExperiment, SameConfigGivesIdenticalReports) {
  TempDir a("det_a"), b("det_b");
  auto ca = smoke_config(a.path()), cb = smoke_config(b.path());
  run_experiment(ca);
  run_experiment(cb);
  auto ra = json::parse(slurp(a / "report.json")), rb = json::parse(slurp(b / "report.json"));
  EXPECT_EQ(without_timing(ra).dump(), without_timing(rb).dump());
  EXPECT_EQ(slurp(a / "model.json"), slurp(b / "model.json"));
  EXPECT_EQ(slurp(a / "latents.csv"), slurp(b / "latents.csv"));
}

TEST(RunExperiment, DnnWritesGrayscaleLatent) {
  TempDir dir("dnn");
  auto cfg = smoke_config(dir.path());
  cfg.model.family = ModelFamily::Dnn;
  cfg.train.epochs = 50;
  const auto result = run_experiment(cfg);
  EXPECT_EQ(result.report.model_meta.family, "dnn");
  EXPECT_TRUE(std::filesystem::exists(dir / "dnn_latent.pgm"));
}

TEST(RunExperiment, FixtureConfig) {
  TempDir dir("fixture");
  auto cfg = load_config(fixture("tiny_run.json"));
  cfg.out_dir = dir.path();
  const auto result = run_experiment(cfg);
  EXPECT_EQ(result.report.per_ci.size(), 10u);
  for (const auto& m : result.report.per_ci) EXPECT_EQ(m.samples, 2u);
}

TEST(RunExperiment, StageFailureIsNamedAndQuarantined) {
  TempDir dir("fail");
  auto cfg = smoke_config(dir.path());
  cfg.per_rp_holdout = 4;  // every group has only 4 fingerprints
  try {
    run_experiment(cfg);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "split");
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "quarantine"));
  EXPECT_FALSE(std::filesystem::exists(dir / "report.json"));
}

TEST(Config, DataAndSynthTogetherIsConfigError) {
  const auto cfg = load_config(fixture("data_and_synth.json"));
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(run_experiment(cfg), StageError);
}

TEST(Config, NeitherDataNorSynth) { EXPECT_THROW(ExperimentConfig{}.validate(), ConfigError); }

TEST(Config, ParsesFixtureAndResolvesPaths) {
  const auto cfg = load_config(fixture("tiny_run.json"));
  ASSERT_TRUE(cfg.data.has_value());
  EXPECT_EQ(cfg.data->fingerprints, fixture("tiny_fingerprints.csv"));
  EXPECT_EQ(cfg.model.encoder.gate, GateType::Nor);
  EXPECT_EQ(cfg.train.epochs, 150);
  ASSERT_TRUE(cfg.schedule.has_value());
  EXPECT_EQ(cfg.schedule->entries.size(), 10u);
  EXPECT_EQ(cfg.noise->source, DeltaSource::SubThreshold);
}

TEST(Config, FamilyDefaultEpochs) {
  EXPECT_EQ(config_from_json({{"model", {{"family", "dnn"}}}}).train.epochs, kDnnDefaultEpochs);
  EXPECT_EQ(config_from_json(json::object()).train.epochs, kLogNetDefaultEpochs);
}

TEST(Config, MalformedValues) {
  EXPECT_THROW(config_from_json({{"model", {{"gate", "nandor"}}}}), ConfigError);
  EXPECT_THROW(config_from_json({{"model", {{"hidden", "two"}}}}), ConfigError);
  EXPECT_THROW(config_from_json({{"noise", {{"mode", "ed"}}}}), ConfigError);
}

TEST(Config, EchoRecordsSeedsAndSchedule) {
  const auto echo = config_echo(smoke_config("x"), {1.0, 2.0});
  EXPECT_EQ(echo["synth"]["seed"], 4);
  EXPECT_EQ(echo["noise"]["delta"], json({1.0, 2.0}));
  EXPECT_EQ(echo["schedule"].size(), 10u);
  EXPECT_EQ(echo["train"]["adam_beta2"], 0.999);
}

TEST(Serialize, LogNetRoundTrip) {
  TempDir dir("ser");
  const auto [ds, map] = synth_dataset(SynthSpec{});
  const auto model = train_lognet(ds, {GateType::Xnor, 0.4, 2}, {}).model;
  save_model(dir / "m.json", model);
  const auto back = std::get<LogNetModel>(load_model(dir / "m.json"));
  EXPECT_EQ(back.head, model.head);
  EXPECT_EQ(back.encoder.gate, GateType::Xnor);
  EXPECT_EQ(back.encoder.threshold, 0.4);
  EXPECT_EQ(back.encoder.hidden_layers, 2);
  EXPECT_EQ(predict_all(back, ds), predict_all(model, ds));
}

TEST(Serialize, DnnRoundTrip) {
  TempDir dir("ser");
  const auto [ds, map] = synth_dataset(SynthSpec{});
  TrainConfig cfg;
  cfg.epochs = 20;
  const auto model = train_dnn_classifier(ds, 3, cfg).model;
  save_model(dir / "m.json", model);
  const auto back = std::get<DnnClassifier>(load_model(dir / "m.json"));
  EXPECT_EQ(back.net, model.net);
}

TEST(Serialize, RejectsTamperedShapes) {
  const auto [ds, map] = synth_dataset(SynthSpec{});
  TrainConfig cfg;
  cfg.epochs = 1;
  auto j = to_json(train_dnn_classifier(ds, 1, cfg).model);
  j["layers"][0]["weights"].erase(0);
  EXPECT_ANY_THROW(model_from_json(j));
  auto k = to_json(train_lognet(ds, {}, cfg).model);
  k["schema_version"] = 99;
  EXPECT_ANY_THROW(model_from_json(k));
}

TEST(Compare, SixGatesPlusDnnGiveSevenRows) {
  TempDir dir("cmp");
  std::vector<ExperimentConfig> cfgs;
  for (auto g : kAllGates) {
    auto c = smoke_config("unused");
    c.model.encoder.gate = g;
    c.train.epochs = 40;
    cfgs.push_back(c);
  }
  auto dnn = smoke_config("unused");
  dnn.model.family = ModelFamily::Dnn;
  dnn.train.epochs = 40;
  cfgs.push_back(dnn);
  const auto table = compare_models(cfgs, dir.path());
  ASSERT_EQ(table.rows.size(), 7u);
  EXPECT_EQ(table.rows.back().model, "DNN-1H");
  EXPECT_EQ(table.rows.front().model, "LogNet-AND-1H");
  for (const auto& r : table.rows) EXPECT_EQ(r.mean_error_m.size(), 10u);
  const auto csv = slurp(dir / "comparison.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "model,family,gate,depth,params,size_bytes,latency_ms,err_ci0,err_ci1,err_ci2,err_ci3,err_ci4,err_ci5,err_ci6,"
            "err_ci7,err_ci8,err_ci9");
  EXPECT_TRUE(std::filesystem::exists(dir / "comparison.txt"));
}

TEST(Compare, LogNetParamsDecreaseWithDepth) {
  TempDir dir("depth");
  std::vector<ExperimentConfig> cfgs;
  for (int h = 1; h <= 4; ++h) {
    auto c = smoke_config("unused");
    c.model.hidden_layers = h;
    c.train.epochs = 20;
    cfgs.push_back(c);
  }
  const auto table = compare_models(cfgs, dir.path());
  for (std::size_t k = 1; k < table.rows.size(); ++k) EXPECT_LT(table.rows[k].params, table.rows[k - 1].params);
}

TEST(Compare, EmptyListAndMismatchedSettings) {
  EXPECT_THROW(compare_models({}, "unused"), ValidationError);
  auto a = smoke_config("unused"), b = smoke_config("unused");
  b.split_seed = 99;
  EXPECT_THROW(compare_models({a, b}, "unused"), ValidationError);
}
