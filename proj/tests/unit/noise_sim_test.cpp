#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "support.hpp"

using namespace lognet;
using testing_support::Gen;

namespace {

Dataset clean_set() {
  return Dataset({{0, "d", 0, {-40.0, -70.0, kMissingRss}}, {1, "d", 0, {-80.0, -35.0, -60.0}}});
}

double mean_abs_deviation(const Dataset& all, int ci, const Dataset& clean) {
  double total = 0.0;
  std::size_t n = 0, row = 0;
  for (const auto& fp : all) {
    if (fp.ci != ci) continue;
    const auto& ref = clean[row++];
    for (std::size_t i = 0; i < fp.rss.size(); ++i, ++n) total += std::abs(fp.rss[i] - ref.rss[i]);
  }
  return total / static_cast<double>(n);
}

LatentCode latent_of(const Fingerprint& fp, const LogicEncoderConfig& cfg) {
  return encode(binarize(normalize_rss(fp.rss, {}), cfg.threshold), cfg);
}

}  // namespace

TEST(InjectNoise, ZeroEuclideanIsIdentity) {
  const auto ds = clean_set();
  EXPECT_EQ(inject_noise(ds, NoiseSpec::euclidean(0.0)), ds);
}

TEST(InjectNoise, EuclideanShiftsDetectedValuesOnly) {
  const auto ds = clean_set();
  const auto out = inject_noise(ds, NoiseSpec::euclidean(-5.0));
  for (std::size_t f = 0; f < ds.size(); ++f)
    for (std::size_t i = 0; i < ds.ap_count(); ++i)
      EXPECT_EQ(out[f].rss[i], ds[f].rss[i] == kMissingRss ? kMissingRss : ds[f].rss[i] - 5.0);
}

TEST(InjectNoise, NonEuclideanShiftsOnlyChosenAp) {
  const auto ds = clean_set();
  const auto out = inject_noise(ds, NoiseSpec::non_euclidean({-5.0, 0.0, 0.0}));
  for (std::size_t f = 0; f < ds.size(); ++f) {
    EXPECT_EQ(out[f].rss[0], ds[f].rss[0] - 5.0);
    EXPECT_EQ(out[f].rss[1], ds[f].rss[1]);
    EXPECT_EQ(out[f].rss[2], ds[f].rss[2]);
  }
}

TEST(InjectNoise, DeltaLengthMismatchIsValidationError) {
  EXPECT_THROW(inject_noise(clean_set(), NoiseSpec::non_euclidean({1.0, 2.0})), ValidationError);
}

TEST(InjectNoise, JitterIsSeededAndNeverResurrectsMissing) {
  Gen g(1);
  const auto ds = g.dataset(5, 4, 12);
  const auto spec = NoiseSpec::euclidean(2.0, 3.0, 42);
  const auto a = inject_noise(ds, spec);
  EXPECT_EQ(a, inject_noise(ds, spec));
  EXPECT_NE(a, inject_noise(ds, NoiseSpec::euclidean(2.0, 3.0, 43)));
  for (std::size_t f = 0; f < ds.size(); ++f)
    for (std::size_t i = 0; i < ds.ap_count(); ++i) {
      EXPECT_TRUE(std::isfinite(a[f].rss[i]));
      EXPECT_EQ(a[f].rss[i] == kMissingRss, ds[f].rss[i] == kMissingRss);
    }
}

TEST(SimulateCis, IdentitySchedule) {
  const auto ds = clean_set();
  EXPECT_EQ(simulate_cis(ds, NoiseSpec::euclidean(-7.0, 1.0, 3), TemporalSchedule{{{0, 0.0}}}), ds);
}

TEST(SimulateCis, DefaultScheduleHasTenCisAndGrowingDeviation) {
  Gen g(2);
  const auto clean = g.dataset(4, 3, 8);
  std::vector<double> deltas(8);
  for (auto& d : deltas) d = g.real(-8.0, 8.0);
  const auto all = simulate_cis(clean, NoiseSpec::non_euclidean(deltas, 0.0, 5), default_schedule());
  EXPECT_EQ(all.cis(), (std::set<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
  EXPECT_EQ(all.only_ci(0).size(), clean.size());
  double prev = -1.0;
  for (int ci = 0; ci < 10; ++ci) {
    const double dev = mean_abs_deviation(all, ci, clean);
    EXPECT_GE(dev, prev);
    prev = dev;
  }
  EXPECT_EQ(mean_abs_deviation(all, 0, clean), 0.0);
}

TEST(SimulateCis, RequiresCleanCiZeroInput) {
  const Dataset ds({{0, "d", 3, {-40.0}}});
  EXPECT_THROW(simulate_cis(ds, NoiseSpec::euclidean(1.0), default_schedule()), ValidationError);
}

TEST(Schedule, Validation) {
  EXPECT_THROW((TemporalSchedule{{}}.validate()), ConfigError);
  EXPECT_THROW((TemporalSchedule{{{1, 0.0}}}.validate()), ConfigError);
  EXPECT_THROW((TemporalSchedule{{{0, 0.0}, {0, 0.5}}}.validate()), ConfigError);
  EXPECT_THROW((TemporalSchedule{{{0, 0.0}, {1, -0.5}}}.validate()), ConfigError);
}

TEST(Synth, MinimalTwoByTwo) {
  SynthSpec s;
  s.num_rps = 2;
  s.num_aps = 2;
  s.fingerprints_per_rp = 3;
  const auto [ds, map] = synth_dataset(s);
  EXPECT_EQ(ds.size(), 6u);
  EXPECT_EQ(ds.ap_count(), 2u);
  std::set<BitVector> codes[2];
  for (const auto& fp : ds) codes[fp.rp_id].insert(binarize(normalize_rss(fp.rss, {})).bits);
  for (const auto& a : codes[0])
    for (const auto& b : codes[1]) EXPECT_NE(a, b);
  EXPECT_DOUBLE_EQ(distance(map.at(0), map.at(1)), 1.0);
}

TEST(Synth, BuildingOneShapes) {
  SynthSpec s;
  s.num_rps = 61;
  s.num_aps = 164;
  s.fingerprints_per_rp = 6;
  const auto [ds, map] = synth_dataset(s);
  EXPECT_EQ(ds.size(), 366u);
  EXPECT_EQ(ds.ap_count(), 164u);
  EXPECT_EQ(ds.rp_ids().size(), 61u);
  EXPECT_EQ(map.size(), 61u);
  EXPECT_EQ(ds.cis(), (std::set<int>{0}));
}

TEST(Synth, DeterministicPerSeed) {
  SynthSpec s;
  s.seed = 9;
  EXPECT_EQ(synth_dataset(s).first, synth_dataset(s).first);
  SynthSpec t = s;
  t.seed = 10;
  EXPECT_NE(synth_dataset(s).first, synth_dataset(t).first);
}

TEST(Synth, CapacityError) {
  SynthSpec s;
  s.num_rps = 5;
  s.num_aps = 2;
  EXPECT_THROW(synth_dataset(s), CapacityError);
}

TEST(Synth, RpsHaveDistinctBinaryPatterns) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthSpec s;
    s.seed = seed;
    const auto [ds, map] = synth_dataset(s);
    std::map<RpId, std::set<BitVector>> per_rp;
    for (const auto& fp : ds) per_rp[fp.rp_id].insert(binarize(normalize_rss(fp.rss, {})).bits);
    for (const auto& [rp, codes] : per_rp) {
      EXPECT_EQ(codes.size(), 1u) << "rp " << rp;  // jitter never crosses the threshold
      for (const auto& [other, oc] : per_rp)
        if (other != rp) {
          EXPECT_NE(*codes.begin(), *oc.begin());
        }
    }
  }
}

TEST(Synth, GridLayout) {
  SynthSpec s;
  s.layout = RpLayout::Grid;
  s.grid_columns = 4;
  s.spacing_m = 2.0;
  const auto [ds, map] = synth_dataset(s);
  EXPECT_EQ(map.at(5), (Point{2.0, 2.0}));
}

TEST(SubThreshold, DeltasKeepEveryLatentAcrossSchedule) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthSpec s;
    s.seed = seed;
    const auto clean = synth_dataset(s).first;
    for (auto draw : {DeltaDraw::Uniform, DeltaDraw::Edge}) {
      const auto deltas = sub_threshold_deltas(clean, 0.5, {}, 1.0, seed, 30.0, draw);
      const auto all = simulate_cis(clean, NoiseSpec::non_euclidean(deltas, 0.0, seed), default_schedule());
      const LogicEncoderConfig cfg{GateType::Nor, 0.5, 1};
      for (std::size_t f = 0; f < all.size(); ++f)
        EXPECT_EQ(latent_of(all[f], cfg).bits, latent_of(clean[f % clean.size()], cfg).bits);
    }
  }
}

TEST(SubThreshold, WindowContainsZeroAndRespectsCap) {
  Gen g(3);
  const auto ds = g.dataset(6, 3, 20);
  const auto deltas = sub_threshold_deltas(ds, 0.5, {}, 0.5, 1, 12.0, DeltaDraw::Uniform);
  for (double d : deltas) EXPECT_LE(std::abs(d), 12.0);
}
