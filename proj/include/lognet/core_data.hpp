#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "lognet/error.hpp"
#include "lognet/rng.hpp"

namespace lognet {

using RpId = int;
using Bit = std::uint8_t;
using BitVector = std::vector<Bit>;

// A non-detected AP is recorded as exactly this value.
inline constexpr double kMissingRss = -100.0;
inline constexpr double kDefaultThreshold = 0.5;

struct Fingerprint {
  RpId rp_id = 0;
  std::string device_id;
  int ci = 0;
  std::vector<double> rss;  // dBm, one per AP

  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

// Immutable collection of fingerprints sharing one AP count.
class Dataset {
 public:
  Dataset() = default;

  explicit Dataset(std::vector<Fingerprint> fingerprints)
      : Dataset(std::move(fingerprints), 0) {}

  // ap_count is only consulted when fingerprints is empty.
  Dataset(std::vector<Fingerprint> fingerprints, std::size_t ap_count)
      : fingerprints_(std::move(fingerprints)), ap_count_(ap_count) {
    if (!fingerprints_.empty()) ap_count_ = fingerprints_.front().rss.size();
    for (std::size_t i = 0; i < fingerprints_.size(); ++i) {
      const auto& fp = fingerprints_[i];
      if (fp.rss.size() != ap_count_) {
        throw ValidationError("fingerprint " + std::to_string(i) + " has " + std::to_string(fp.rss.size()) +
                              " APs, expected " + std::to_string(ap_count_));
      }
      if (fp.rp_id < 0) throw ValidationError("fingerprint " + std::to_string(i) + " has negative rp_id");
      if (fp.ci < 0) throw ValidationError("fingerprint " + std::to_string(i) + " has negative ci");
      for (double v : fp.rss) {
        if (!std::isfinite(v)) throw ValidationError("fingerprint " + std::to_string(i) + " has a non-finite RSS");
      }
      rp_ids_.insert(fp.rp_id);
      cis_.insert(fp.ci);
    }
  }

  const std::vector<Fingerprint>& fingerprints() const noexcept { return fingerprints_; }
  std::size_t size() const noexcept { return fingerprints_.size(); }
  bool empty() const noexcept { return fingerprints_.empty(); }
  std::size_t ap_count() const noexcept { return ap_count_; }
  const std::set<RpId>& rp_ids() const noexcept { return rp_ids_; }
  const std::set<int>& cis() const noexcept { return cis_; }

  const Fingerprint& operator[](std::size_t i) const { return fingerprints_[i]; }
  auto begin() const noexcept { return fingerprints_.begin(); }
  auto end() const noexcept { return fingerprints_.end(); }

  Dataset only_ci(int ci) const {
    std::vector<Fingerprint> out;
    for (const auto& fp : fingerprints_)
      if (fp.ci == ci) out.push_back(fp);
    return Dataset(std::move(out), ap_count_);
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.ap_count_ == b.ap_count_ && a.fingerprints_ == b.fingerprints_;
  }

 private:
  std::vector<Fingerprint> fingerprints_;
  std::size_t ap_count_ = 0;
  std::set<RpId> rp_ids_;
  std::set<int> cis_;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Planar coordinates (meters) of every reference point.
class RpMap {
 public:
  RpMap() = default;

  explicit RpMap(std::map<RpId, Point> entries) : entries_(std::move(entries)) {
    for (const auto& [rp, p] : entries_) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw ValidationError("RP " + std::to_string(rp) + " has non-finite coordinates");
    }
  }

  const Point& at(RpId rp) const {
    auto it = entries_.find(rp);
    if (it == entries_.end()) throw LookupError("RP " + std::to_string(rp) + " is not in the RP map");
    return it->second;
  }

  bool contains(RpId rp) const { return entries_.count(rp) != 0; }
  const std::map<RpId, Point>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  void require_covers(const Dataset& ds) const {
    for (RpId rp : ds.rp_ids())
      if (!contains(rp)) throw LookupError("RP " + std::to_string(rp) + " has no entry in the RP map");
  }

  friend bool operator==(const RpMap&, const RpMap&) = default;

 private:
  std::map<RpId, Point> entries_;
};

// Fixed dBm window used for min-max scaling. It is global rather than
// per-dataset so later collection instances scale exactly like CI:0.
struct NormalizationRange {
  double lo = kMissingRss;
  double hi = 0.0;

  void validate() const {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
      throw ConfigError("normalization range requires lo < hi (got lo=" + std::to_string(lo) +
                        ", hi=" + std::to_string(hi) + ")");
  }

  double apply(double dbm) const { return (std::clamp(dbm, lo, hi) - lo) / (hi - lo); }

  // Inverse of apply on [0, 1].
  double to_dbm(double normalized) const { return lo + normalized * (hi - lo); }

  friend bool operator==(const NormalizationRange&, const NormalizationRange&) = default;
};

inline std::vector<double> normalize_rss(std::span<const double> rss, const NormalizationRange& range) {
  range.validate();
  std::vector<double> out(rss.size());
  std::transform(rss.begin(), rss.end(), out.begin(), [&](double v) { return range.apply(v); });
  return out;
}

// Values of the returned dataset are in [0, 1], not dBm.
inline Dataset normalize(const Dataset& ds, double lo, double hi) {
  const NormalizationRange range{lo, hi};
  range.validate();
  std::vector<Fingerprint> out;
  out.reserve(ds.size());
  for (const auto& fp : ds) {
    Fingerprint n = fp;
    n.rss = normalize_rss(fp.rss, range);
    out.push_back(std::move(n));
  }
  return Dataset(std::move(out), ds.ap_count());
}

inline Dataset normalize(const Dataset& ds, const NormalizationRange& range = {}) {
  return normalize(ds, range.lo, range.hi);
}

struct BinaryFingerprint {
  BitVector bits;
  std::size_t source_ap_count = 0;

  friend bool operator==(const BinaryFingerprint&, const BinaryFingerprint&) = default;
};

inline void validate_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ConfigError("binarization threshold must lie in (0, 1), got " + std::to_string(threshold));
}

// bits[i] = 1 iff normalized[i] >= threshold.
inline BinaryFingerprint binarize(std::span<const double> normalized, double threshold = kDefaultThreshold) {
  validate_threshold(threshold);
  BinaryFingerprint out;
  out.source_ap_count = normalized.size();
  out.bits.reserve(normalized.size());
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    const double v = normalized[i];
    if (!(v >= 0.0 && v <= 1.0))
      throw ValidationError("value " + std::to_string(v) + " at AP " + std::to_string(i) +
                            " is outside [0, 1]; normalize before binarizing");
    out.bits.push_back(v >= threshold ? Bit{1} : Bit{0});
  }
  return out;
}

inline BinaryFingerprint binarize(const Fingerprint& normalized, double threshold = kDefaultThreshold) {
  return binarize(std::span<const double>(normalized.rss), threshold);
}

// Holds out per_rp_holdout fingerprints from every (rp_id, ci) group, chosen
// by a seeded shuffle. Both outputs keep the input order.
inline std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, std::size_t per_rp_holdout,
                                                    std::uint64_t seed) {
  std::map<std::pair<RpId, int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ds.size(); ++i) groups[{ds[i].rp_id, ds[i].ci}].push_back(i);

  std::vector<bool> is_test(ds.size(), false);
  for (auto& [key, members] : groups) {
    const auto [rp, ci] = key;
    if (members.size() < per_rp_holdout + 1) {
      throw SplitError("group rp_id=" + std::to_string(rp) + " ci=" + std::to_string(ci) + " has " +
                       std::to_string(members.size()) + " fingerprints; holding out " +
                       std::to_string(per_rp_holdout) + " needs at least " + std::to_string(per_rp_holdout + 1));
    }
    Rng rng(derive_seed(seed, (static_cast<std::uint64_t>(static_cast<std::uint32_t>(rp)) << 32) |
                                  static_cast<std::uint32_t>(ci)));
    rng.shuffle(members.begin(), members.end());
    for (std::size_t k = 0; k < per_rp_holdout; ++k) is_test[members[k]] = true;
  }

  std::vector<Fingerprint> train, test;
  for (std::size_t i = 0; i < ds.size(); ++i) (is_test[i] ? test : train).push_back(ds[i]);
  return {Dataset(std::move(train), ds.ap_count()), Dataset(std::move(test), ds.ap_count())};
}

}  // namespace lognet
