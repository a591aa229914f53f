#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lognet/core_data.hpp"
#include "lognet/error.hpp"
#include "lognet/rng.hpp"

namespace lognet {

enum class NoiseMode { Euclidean, NonEuclidean };

constexpr std::string_view to_string(NoiseMode m) noexcept {
  return m == NoiseMode::Euclidean ? "ed" : "non-ed";
}

inline NoiseMode parse_noise_mode(std::string_view s) {
  if (s == "ed") return NoiseMode::Euclidean;
  if (s == "non-ed" || s == "noned" || s == "non_ed") return NoiseMode::NonEuclidean;
  throw ConfigError("unknown noise mode '" + std::string(s) + "' (expected ed|non-ed)");
}

// Additive dB perturbation: one shared offset (ED) or one offset per AP
// (non-ED), plus optional zero-mean Gaussian jitter.
struct NoiseSpec {
  NoiseMode mode = NoiseMode::Euclidean;
  std::vector<double> delta{0.0};
  std::vector<double> sigma;  // empty = no jitter, size 1 = shared, size N = per AP
  std::uint64_t seed = 0;

  static NoiseSpec euclidean(double delta, double sigma = 0.0, std::uint64_t seed = 0) {
    return {NoiseMode::Euclidean, {delta}, {sigma}, seed};
  }

  static NoiseSpec non_euclidean(std::vector<double> deltas, double sigma = 0.0, std::uint64_t seed = 0) {
    return {NoiseMode::NonEuclidean, std::move(deltas), {sigma}, seed};
  }

  double delta_at(std::size_t ap) const { return mode == NoiseMode::Euclidean ? delta.front() : delta[ap]; }

  double sigma_at(std::size_t ap) const {
    if (sigma.empty()) return 0.0;
    return sigma.size() == 1 ? sigma.front() : sigma[ap];
  }

  void validate(std::size_t ap_count) const {
    if (mode == NoiseMode::Euclidean && delta.size() != 1)
      throw ValidationError("ED noise carries exactly one delta, got " + std::to_string(delta.size()));
    if (mode == NoiseMode::NonEuclidean && delta.size() != ap_count)
      throw ValidationError("non-ED noise needs one delta per AP: got " + std::to_string(delta.size()) +
                            " deltas for " + std::to_string(ap_count) + " APs");
    if (sigma.size() > 1 && sigma.size() != ap_count)
      throw ValidationError("per-AP sigma has " + std::to_string(sigma.size()) + " entries for " +
                            std::to_string(ap_count) + " APs");
    for (double d : delta)
      if (!std::isfinite(d)) throw ValidationError("noise delta must be finite");
    for (double s : sigma)
      if (!std::isfinite(s) || s < 0.0) throw ValidationError("noise sigma must be finite and >= 0");
  }

  NoiseSpec scaled(double multiplier) const {
    NoiseSpec out = *this;
    for (auto& d : out.delta) d *= multiplier;
    for (auto& s : out.sigma) s *= multiplier;
    return out;
  }

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

// Missing APs (the sentinel) are left untouched.
inline Dataset inject_noise(const Dataset& ds, const NoiseSpec& spec) {
  spec.validate(ds.ap_count());
  std::vector<Fingerprint> out;
  out.reserve(ds.size());
  for (std::size_t f = 0; f < ds.size(); ++f) {
    Fingerprint fp = ds[f];
    Rng rng(derive_seed(spec.seed, f));
    for (std::size_t i = 0; i < fp.rss.size(); ++i) {
      const double s = spec.sigma_at(i);
      const double jitter = s > 0.0 ? rng.normal(0.0, s) : 0.0;
      if (fp.rss[i] == kMissingRss) continue;
      fp.rss[i] += spec.delta_at(i) + jitter;
    }
    out.push_back(std::move(fp));
  }
  return Dataset(std::move(out), ds.ap_count());
}

struct ScheduleEntry {
  int ci = 0;
  double multiplier = 0.0;

  friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

struct TemporalSchedule {
  std::vector<ScheduleEntry> entries;

  void validate() const {
    if (entries.empty()) throw ConfigError("temporal schedule is empty");
    if (entries.front().ci != 0) throw ConfigError("temporal schedule must start at ci 0");
    if (entries.front().multiplier != 0.0) throw ConfigError("ci 0 is the clean reference; its multiplier must be 0");
    for (std::size_t k = 0; k < entries.size(); ++k) {
      if (k > 0 && entries[k].ci <= entries[k - 1].ci)
        throw ConfigError("schedule ci indices must be strictly increasing");
      if (!std::isfinite(entries[k].multiplier) || entries[k].multiplier < 0.0)
        throw ConfigError("schedule multipliers must be finite and >= 0");
    }
  }

  std::vector<int> cis() const {
    std::vector<int> out;
    for (const auto& e : entries) out.push_back(e.ci);
    return out;
  }

  friend bool operator==(const TemporalSchedule&, const TemporalSchedule&) = default;
};

// Ten snapshots: same-day morning/afternoon/night, then 24 h, 1 week,
// 1 month, 3 months, 6 months, 1 year and 2 years. The multipliers are a
// modeling choice; only their monotone growth matters.
inline TemporalSchedule default_schedule() {
  return {{{0, 0.0},
           {1, 0.05},
           {2, 0.1},
           {3, 0.2},
           {4, 0.3},
           {5, 0.45},
           {6, 0.6},
           {7, 0.75},
           {8, 0.9},
           {9, 1.0}}};
}

// One copy of the clean CI:0 dataset per schedule entry, relabelled with the
// entry's ci and perturbed by `base` scaled by the entry's multiplier.
inline Dataset simulate_cis(const Dataset& clean, const NoiseSpec& base, const TemporalSchedule& sched) {
  sched.validate();
  base.validate(clean.ap_count());
  for (const auto& fp : clean)
    if (fp.ci != 0) throw ValidationError("simulate_cis expects a clean CI:0 dataset, found ci " + std::to_string(fp.ci));

  std::vector<Fingerprint> out;
  out.reserve(clean.size() * sched.entries.size());
  for (const auto& entry : sched.entries) {
    NoiseSpec spec = base.scaled(entry.multiplier);
    spec.seed = derive_seed(base.seed, static_cast<std::uint64_t>(entry.ci));
    const Dataset noisy = entry.multiplier == 0.0 ? clean : inject_noise(clean, spec);
    for (Fingerprint fp : noisy) {
      fp.ci = entry.ci;
      out.push_back(std::move(fp));
    }
  }
  return Dataset(std::move(out), clean.ap_count());
}

enum class RpLayout { Path, Grid };

struct SynthSpec {
  int num_rps = 16;
  int num_aps = 32;
  int fingerprints_per_rp = 6;
  // Chance that an adjacent AP pair is strong at the first RP.
  double active_pair_fraction = 0.2;
  // Pairs toggled between consecutive RPs; 0 draws every RP independently.
  int walk_toggles = 1;
  double strong_lo_dbm = -40.0;
  double strong_hi_dbm = -30.0;
  double weak_lo_dbm = -90.0;
  double weak_hi_dbm = -70.0;
  double missing_fraction = 0.1;  // weak APs that are not detected at all
  double rp_variation_db = 2.0;   // bounded per-RP offset around each AP's level
  double jitter_db = 2.0;         // bounded per-fingerprint variation
  RpLayout layout = RpLayout::Path;
  int grid_columns = 8;
  double spacing_m = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (num_rps < 2) throw ConfigError("synthetic building needs at least 2 RPs");
    if (num_aps < 2) throw ConfigError("synthetic building needs at least 2 APs");
    if (fingerprints_per_rp < 1) throw ConfigError("fingerprints_per_rp must be >= 1");
    if (!(active_pair_fraction > 0.0 && active_pair_fraction < 1.0))
      throw ConfigError("active_pair_fraction must lie in (0, 1)");
    if (walk_toggles < 0) throw ConfigError("walk_toggles must be >= 0");
    if (!(jitter_db >= 0.0 && rp_variation_db >= 0.0)) throw ConfigError("jitter_db and rp_variation_db must be >= 0");
    const double spread = jitter_db + rp_variation_db;
    if (!(strong_lo_dbm <= strong_hi_dbm && weak_lo_dbm <= weak_hi_dbm && weak_hi_dbm + spread < strong_lo_dbm - spread))
      throw ConfigError("weak and strong RSS bands (plus variation and jitter) must not overlap");
    if (!(missing_fraction >= 0.0 && missing_fraction <= 1.0)) throw ConfigError("missing_fraction must lie in [0, 1]");
    if (weak_lo_dbm - spread <= kMissingRss) throw ConfigError("weak band plus variation must stay above the missing sentinel");
    if (layout == RpLayout::Grid && grid_columns < 1) throw ConfigError("grid_columns must be >= 1");
    if (!(spacing_m > 0.0)) throw ConfigError("spacing_m must be > 0");
  }

  friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

namespace detail {

using PairMask = std::vector<bool>;

inline PairMask next_unused_mask(PairMask mask, std::uint64_t start, const std::set<PairMask>& used) {
  const std::size_t pairs = mask.size();
  std::uint64_t code = start;
  do {
    for (std::size_t p = 0; p < pairs; ++p) mask[p] = p < 64 && ((code >> p) & 1u);
    ++code;
  } while (used.count(mask));
  return mask;
}

// Distinct per-RP masks over AP pairs; bit p set means pair p is strong at
// that RP. With toggles > 0, consecutive RPs differ in `toggles` pairs where
// an unused mask allows it, so neighbours share most of their strong APs.
inline std::vector<PairMask> distinct_pair_masks(std::size_t rps, std::size_t pairs, double density, int toggles, Rng& rng) {
  if (pairs < 63 && rps > (std::uint64_t{1} << pairs))
    throw CapacityError(std::to_string(rps) + " RPs cannot have distinct patterns over " + std::to_string(pairs) +
                        " AP pairs (at most " + std::to_string(std::uint64_t{1} << pairs) + ")");
  const std::uint64_t code_space = std::uint64_t{1} << std::min<std::size_t>(pairs, 62);
  std::set<PairMask> used;
  std::vector<PairMask> masks;
  constexpr int kAttempts = 64;
  while (masks.size() < rps) {
    PairMask mask(pairs);
    bool placed = false;
    for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
      if (masks.empty() || toggles == 0) {
        for (std::size_t p = 0; p < pairs; ++p) mask[p] = rng.uniform() < density;
      } else {
        mask = masks.back();
        const int flips = toggles + attempt / 16;  // widen the step if the neighbourhood is exhausted
        for (int f = 0; f < flips; ++f) {
          const auto p = static_cast<std::size_t>(rng.below(pairs));
          mask[p] = !mask[p];
        }
      }
      placed = !used.count(mask);
    }
    if (!placed) mask = next_unused_mask(mask, rng.below(code_space), used);
    used.insert(mask);
    masks.push_back(mask);
  }
  return masks;
}

}  // namespace detail

// Clean CI:0 building. Every AP has one strong and one weak level; each RP
// has a distinct set of strong adjacent AP pairs (a strong pair shows both
// APs strong or just one of them) and neighbouring RPs differ in few pairs.
// Weak APs may be missing. RP k sits at k * spacing along a path (or
// row-major on a grid).
inline std::pair<Dataset, RpMap> synth_dataset(const SynthSpec& spec) {
  spec.validate();
  const auto rps = static_cast<std::size_t>(spec.num_rps);
  const auto aps = static_cast<std::size_t>(spec.num_aps);
  const std::size_t pairs = (aps + 1) / 2;
  Rng rng(derive_seed(spec.seed, 0x5157));
  const auto masks = detail::distinct_pair_masks(rps, pairs, spec.active_pair_fraction, spec.walk_toggles, rng);

  std::vector<double> strong_level(aps), weak_level(aps);
  for (std::size_t ap = 0; ap < aps; ++ap) {
    strong_level[ap] = rng.uniform(spec.strong_lo_dbm, spec.strong_hi_dbm);
    weak_level[ap] = rng.uniform(spec.weak_lo_dbm, spec.weak_hi_dbm);
  }
  // 0: both APs strong, 1: first only, 2: second only. Kept while a pair stays strong.
  std::vector<int> form(pairs, 0);
  std::vector<bool> previously(pairs, false);

  std::vector<Fingerprint> fps;
  std::map<RpId, Point> coords;
  for (std::size_t r = 0; r < rps; ++r) {
    std::vector<double> base(aps);
    for (std::size_t ap = 0; ap < aps; ++ap) {
      const bool missing = rng.uniform() < spec.missing_fraction;
      const double var = rng.uniform(-spec.rp_variation_db, spec.rp_variation_db);
      base[ap] = missing ? kMissingRss : weak_level[ap] + var;
    }
    for (std::size_t p = 0; p < pairs; ++p) {
      if (masks[r][p] && !previously[p]) {
        const double u = rng.uniform();
        form[p] = u < 0.5 ? 0 : (u < 0.75 ? 1 : 2);
      }
      previously[p] = masks[r][p];
      if (!masks[r][p]) continue;
      const std::size_t a = 2 * p;
      const std::size_t b = 2 * p + 1;
      const bool first = form[p] != 2 || b >= aps;
      const bool second = b < aps && form[p] != 1;
      if (first) base[a] = strong_level[a] + rng.uniform(-spec.rp_variation_db, spec.rp_variation_db);
      if (second) base[b] = strong_level[b] + rng.uniform(-spec.rp_variation_db, spec.rp_variation_db);
    }
    const auto rp = static_cast<RpId>(r);
    for (int k = 0; k < spec.fingerprints_per_rp; ++k) {
      Fingerprint fp{rp, "synth", 0, base};
      for (auto& v : fp.rss)
        if (v != kMissingRss) v += rng.uniform(-spec.jitter_db, spec.jitter_db);
      fps.push_back(std::move(fp));
    }
    if (spec.layout == RpLayout::Path) {
      coords[rp] = {static_cast<double>(r) * spec.spacing_m, 0.0};
    } else {
      const auto cols = static_cast<std::size_t>(spec.grid_columns);
      coords[rp] = {static_cast<double>(r % cols) * spec.spacing_m, static_cast<double>(r / cols) * spec.spacing_m};
    }
  }
  return {Dataset(std::move(fps), aps), RpMap(std::move(coords))};
}

enum class DeltaDraw {
  Uniform,  // anywhere inside the admissible window
  Edge,     // at one end of the window, direction chosen per AP
};

inline DeltaDraw parse_delta_draw(std::string_view s) {
  if (s == "uniform") return DeltaDraw::Uniform;
  if (s == "edge") return DeltaDraw::Edge;
  throw ConfigError("unknown delta draw '" + std::string(s) + "' (expected uniform|edge)");
}

constexpr std::string_view to_string(DeltaDraw d) noexcept { return d == DeltaDraw::Uniform ? "uniform" : "edge"; }

// Per-AP offsets that keep every detected value of `clean` on its side of
// the threshold: the admissible window for AP i is
//   [cut - lowest active value + margin, cut - highest inactive value - margin]
// (cut = threshold in dBm), capped at +/- max_shift_db where a side is
// unconstrained and always containing 0. Scaling by any multiplier in [0, 1]
// stays inside the window.
inline std::vector<double> sub_threshold_deltas(const Dataset& clean, double threshold, const NormalizationRange& range,
                                                double margin_db, std::uint64_t seed, double max_shift_db = 30.0,
                                                DeltaDraw draw = DeltaDraw::Edge) {
  validate_threshold(threshold);
  range.validate();
  if (!(margin_db >= 0.0) || !(max_shift_db >= 0.0)) throw ConfigError("margin_db and max_shift_db must be >= 0");
  const double cut = range.to_dbm(threshold);
  const std::size_t aps = clean.ap_count();
  std::vector<double> lowest_active(aps, std::numeric_limits<double>::infinity());
  std::vector<double> highest_inactive(aps, -std::numeric_limits<double>::infinity());
  for (const auto& fp : clean) {
    for (std::size_t i = 0; i < aps; ++i) {
      const double v = fp.rss[i];
      if (v == kMissingRss) continue;
      if (range.apply(v) >= threshold)
        lowest_active[i] = std::min(lowest_active[i], v);
      else
        highest_inactive[i] = std::max(highest_inactive[i], v);
    }
  }
  Rng rng(derive_seed(seed, 0xde17a));
  std::vector<double> out(aps);
  for (std::size_t i = 0; i < aps; ++i) {
    double lo = std::isfinite(lowest_active[i]) ? cut - lowest_active[i] + margin_db : -max_shift_db;
    double hi = std::isfinite(highest_inactive[i]) ? cut - highest_inactive[i] - margin_db : max_shift_db;
    lo = std::min(std::max(lo, -max_shift_db), 0.0);
    hi = std::max(std::min(hi, max_shift_db), 0.0);
    const double u = rng.uniform();
    out[i] = draw == DeltaDraw::Uniform ? lo + (hi - lo) * u : (u < 0.5 ? lo : hi);
  }
  return out;
}

}  // namespace lognet
