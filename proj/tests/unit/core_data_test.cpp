#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "support.hpp"

using namespace lognet;
using testing_support::Gen;

namespace {

Dataset one_rp(std::vector<std::vector<double>> rows, int rp = 0, int ci = 0) {
  std::vector<Fingerprint> fps;
  for (auto& r : rows) fps.push_back({rp, "d", ci, std::move(r)});
  return Dataset(std::move(fps));
}

}  // namespace

TEST(Normalize, MapsFixedRangeToUnitInterval) {
  const auto ds = normalize(one_rp({{-100.0, -50.0, 0.0}}), -100.0, 0.0);
  EXPECT_EQ(ds[0].rss, (std::vector<double>{0.0, 0.5, 1.0}));
}

TEST(Normalize, ClampsOutOfRangeValues) {
  const auto ds = normalize(one_rp({{-120.0, 10.0}}), -100.0, 0.0);
  EXPECT_EQ(ds[0].rss, (std::vector<double>{0.0, 1.0}));
}

TEST(Normalize, RejectsEmptyRange) {
  EXPECT_THROW(normalize(one_rp({{-40.0}}), 0.0, 0.0), ConfigError);
  EXPECT_THROW(normalize(one_rp({{-40.0}}), 0.0, -100.0), ConfigError);
}

TEST(Normalize, MonotoneAndBoundedOnRandomInputs) {
  Gen g(11);
  const NormalizationRange range;
  for (int t = 0; t < 500; ++t) {
    const double a = g.real(-150.0, 30.0), b = g.real(-150.0, 30.0);
    const double na = range.apply(a), nb = range.apply(b);
    EXPECT_GE(na, 0.0);
    EXPECT_LE(na, 1.0);
    if (a <= b) {
      EXPECT_LE(na, nb);
    }
  }
}

TEST(Normalize, MissingSentinelMapsToZero) { EXPECT_EQ(NormalizationRange{}.apply(kMissingRss), 0.0); }

TEST(Binarize, ThresholdIsInclusive) {
  EXPECT_EQ(binarize(std::vector<double>{0.49, 0.5, 0.51}, 0.5).bits, (BitVector{0, 1, 1}));
}

TEST(Binarize, AllZeroInputGivesAllZeroBits) {
  EXPECT_EQ(binarize(std::vector<double>(4, 0.0), 0.5).bits, BitVector(4, 0));
}

TEST(Binarize, RejectsThresholdOutsideOpenInterval) {
  const std::vector<double> v{0.3};
  EXPECT_THROW(binarize(v, 0.0), ConfigError);
  EXPECT_THROW(binarize(v, 1.0), ConfigError);
  EXPECT_THROW(binarize(v, -0.2), ConfigError);
}

TEST(Binarize, RejectsUnnormalizedInput) {
  EXPECT_THROW(binarize(std::vector<double>{-55.0}), ValidationError);
  EXPECT_THROW(binarize(std::vector<double>{1.2}), ValidationError);
}

TEST(Binarize, MatchesComparisonOracle) {
  Gen g(5);
  for (int t = 0; t < 200; ++t) {
    const double th = g.real(0.01, 0.99);
    std::vector<double> v(g.size(1, 40));
    for (auto& x : v) x = g.real(0.0, 1.0);
    const auto bf = binarize(v, th);
    ASSERT_EQ(bf.bits.size(), v.size());
    EXPECT_EQ(bf.source_ap_count, v.size());
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(bf.bits[i], v[i] >= th ? 1 : 0);
  }
}

TEST(Dataset, RejectsMismatchedApCounts) {
  EXPECT_THROW(Dataset({{0, "d", 0, {-50.0, -60.0}}, {1, "d", 0, {-50.0}}}), ValidationError);
}

TEST(Dataset, RejectsNegativeIdsAndNonFinite) {
  EXPECT_THROW(Dataset({{-1, "d", 0, {-50.0}}}), ValidationError);
  EXPECT_THROW(Dataset({{0, "d", -2, {-50.0}}}), ValidationError);
  EXPECT_THROW(Dataset({{0, "d", 0, {std::nan("")}}}), ValidationError);
}

TEST(Dataset, TracksRpsAndCis) {
  const Dataset ds({{3, "a", 0, {-40.0}}, {1, "a", 2, {-40.0}}, {3, "b", 2, {-40.0}}});
  EXPECT_EQ(ds.rp_ids(), (std::set<RpId>{1, 3}));
  EXPECT_EQ(ds.cis(), (std::set<int>{0, 2}));
  EXPECT_EQ(ds.only_ci(2).size(), 2u);
}

TEST(Split, FourPerRpHoldOneGivesThreeAndOne) {
  std::vector<Fingerprint> fps;
  for (int rp = 0; rp < 3; ++rp)
    for (int k = 0; k < 4; ++k) fps.push_back({rp, "d", 0, {-40.0 - k}});
  const auto [train, test] = split_train_test(Dataset(fps), 1, 9);
  for (int rp = 0; rp < 3; ++rp) {
    EXPECT_EQ(std::count_if(train.begin(), train.end(), [&](const auto& f) { return f.rp_id == rp; }), 3);
    EXPECT_EQ(std::count_if(test.begin(), test.end(), [&](const auto& f) { return f.rp_id == rp; }), 1);
  }
}

TEST(Split, SameSeedSameSplit) {
  Gen g(3);
  const auto ds = g.dataset(5, 6, 4, 3);
  EXPECT_EQ(split_train_test(ds, 2, 17), split_train_test(ds, 2, 17));
}

TEST(Split, TooFewFingerprintsNamesTheGroup) {
  const Dataset ds({{7, "d", 0, {-40.0}}, {8, "d", 0, {-40.0}}, {8, "d", 0, {-41.0}}});
  try {
    split_train_test(ds, 1, 0);
    FAIL() << "expected SplitError";
  } catch (const SplitError& e) {
    EXPECT_NE(std::string(e.what()).find("rp_id=7"), std::string::npos);
  }
}

TEST(Split, PartitionsEveryGroupProperty) {
  Gen g(21);
  for (int t = 0; t < 40; ++t) {
    const std::size_t per = g.size(2, 6), hold = g.size(1, per - 1);
    const auto ds = g.dataset(g.size(1, 6), per, g.size(1, 5), static_cast<int>(g.size(1, 3)));
    const auto [train, test] = split_train_test(ds, hold, t);
    EXPECT_EQ(train.size() + test.size(), ds.size());
    std::map<std::pair<int, int>, int> held;
    for (const auto& f : test) ++held[{f.rp_id, f.ci}];
    for (const auto& [key, n] : held) EXPECT_EQ(n, static_cast<int>(hold));
    EXPECT_EQ(held.size(), ds.rp_ids().size() * ds.cis().size());
    // Disjoint and complete: the multiset union equals the input.
    std::vector<Fingerprint> merged(train.begin(), train.end());
    merged.insert(merged.end(), test.begin(), test.end());
    auto key = [](const Fingerprint& f) { return std::tie(f.rp_id, f.ci, f.device_id, f.rss); };
    auto less = [&](const Fingerprint& a, const Fingerprint& b) { return key(a) < key(b); };
    std::vector<Fingerprint> orig(ds.begin(), ds.end());
    std::sort(merged.begin(), merged.end(), less);
    std::sort(orig.begin(), orig.end(), less);
    EXPECT_EQ(merged, orig);
  }
}

TEST(RpMap, LookupAndCoverage) {
  const RpMap map({{0, {0.0, 0.0}}, {1, {3.0, 4.0}}});
  EXPECT_DOUBLE_EQ(distance(map.at(0), map.at(1)), 5.0);
  EXPECT_THROW(map.at(2), LookupError);
  EXPECT_THROW(map.require_covers(Dataset({{2, "d", 0, {-50.0}}})), LookupError);
}

TEST(Binarize, BoundaryExamples) {
  EXPECT_EQ(binarize(std::vector<double>{0.5, 0.5}, 0.5).bits, (BitVector{1, 1}));
  EXPECT_EQ(binarize(std::vector<double>{0.49999, 0.50001}, 0.5).bits, (BitVector{0, 1}));
}

TEST(Split, SixPerRpHoldOneGivesFiveToOne) {
  Gen g(8);
  const auto [train, test] = split_train_test(g.dataset(4, 6, 3), 1, 0);
  EXPECT_EQ(train.size(), 20u);
  EXPECT_EQ(test.size(), 4u);
}

TEST(Split, ZeroHoldoutKeepsEverythingForTraining) {
  Gen g(8);
  const auto ds = g.dataset(3, 2, 3);
  const auto [train, test] = split_train_test(ds, 0, 4);
  EXPECT_TRUE(test.empty());
  EXPECT_EQ(train, ds);
}
