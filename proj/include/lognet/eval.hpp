#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "lognet/classifiers.hpp"
#include "lognet/core_data.hpp"
#include "lognet/error.hpp"
#include "lognet/gates.hpp"

namespace lognet {

inline double mean_localization_error(std::span<const RpId> preds, std::span<const RpId> truth, const RpMap& map) {
  if (preds.size() != truth.size())
    throw ShapeError(std::to_string(preds.size()) + " predictions for " + std::to_string(truth.size()) + " samples");
  if (preds.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) total += distance(map.at(preds[i]), map.at(truth[i]));
  return total / static_cast<double>(preds.size());
}

struct CiMetrics {
  int ci = 0;
  std::size_t samples = 0;
  double mean_error_m = 0.0;
  double min_error_m = 0.0;
  double max_error_m = 0.0;
  double accuracy = 0.0;

  friend bool operator==(const CiMetrics&, const CiMetrics&) = default;
};

struct ModelMeta {
  std::string family;
  std::size_t params = 0;
  std::size_t size_bytes = 0;
  double latency_ms = 0.0;
  nlohmann::json environment = nlohmann::json::object();
};

struct EvalReport {
  std::vector<CiMetrics> per_ci;  // ascending ci
  ModelMeta model_meta;
  nlohmann::json config = nlohmann::json::object();

  const CiMetrics& at_ci(int ci) const {
    for (const auto& m : per_ci)
      if (m.ci == ci) return m;
    throw LookupError("report has no entry for ci " + std::to_string(ci));
  }

  void validate() const {
    for (std::size_t k = 0; k < per_ci.size(); ++k) {
      const auto& m = per_ci[k];
      if (k > 0 && m.ci <= per_ci[k - 1].ci) throw ValidationError("per_ci entries must be in ascending ci order");
      if (!(m.mean_error_m >= 0.0 && m.min_error_m <= m.mean_error_m && m.mean_error_m <= m.max_error_m))
        throw ValidationError("ci " + std::to_string(m.ci) + " violates 0 <= min <= mean <= max");
      if (!(m.accuracy >= 0.0 && m.accuracy <= 1.0)) throw ValidationError("accuracy outside [0, 1]");
    }
  }
};

inline nlohmann::json environment_descriptor() {
  nlohmann::json env;
#if defined(__clang__)
  env["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  env["compiler"] = std::string("gcc ") + __VERSION__;
#else
  env["compiler"] = "unknown";
#endif
#ifdef NDEBUG
  env["build"] = "release";
#else
  env["build"] = "debug";
#endif
#if defined(__linux__)
  env["os"] = "linux";
#elif defined(__APPLE__)
  env["os"] = "darwin";
#elif defined(_WIN32)
  env["os"] = "windows";
#else
  env["os"] = "unknown";
#endif
  env["hardware_threads"] = std::thread::hardware_concurrency();
  env["clock"] = "steady_clock";
  return env;
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json per_ci = nlohmann::json::array();
  for (const auto& m : r.per_ci) {
    per_ci.push_back({{"ci", m.ci},
                      {"samples", m.samples},
                      {"mean_error_m", m.mean_error_m},
                      {"min_error_m", m.min_error_m},
                      {"max_error_m", m.max_error_m},
                      {"accuracy", m.accuracy}});
  }
  return {{"per_ci", std::move(per_ci)},
          {"model_meta",
           {{"family", r.model_meta.family},
            {"params", r.model_meta.params},
            {"size_bytes", r.model_meta.size_bytes},
            {"latency_ms", r.model_meta.latency_ms},
            {"environment", r.model_meta.environment}}},
          {"config", r.config}};
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  for (const auto& m : j.at("per_ci")) {
    r.per_ci.push_back({m.at("ci").get<int>(), m.at("samples").get<std::size_t>(), m.at("mean_error_m").get<double>(),
                        m.at("min_error_m").get<double>(), m.at("max_error_m").get<double>(),
                        m.at("accuracy").get<double>()});
  }
  const auto& meta = j.at("model_meta");
  r.model_meta.family = meta.at("family").get<std::string>();
  r.model_meta.params = meta.at("params").get<std::size_t>();
  r.model_meta.size_bytes = meta.at("size_bytes").get<std::size_t>();
  r.model_meta.latency_ms = meta.at("latency_ms").get<double>();
  r.model_meta.environment = meta.value("environment", nlohmann::json::object());
  r.config = j.value("config", nlohmann::json::object());
  r.validate();
  return r;
}

// Per-ci error statistics of `model` on `test`; latency is left at 0.
template <Localizer M>
EvalReport evaluate(const M& model, const Dataset& test, const RpMap& map) {
  if (test.ap_count() != model.ap_count())
    throw ShapeError("model expects " + std::to_string(model.ap_count()) + " APs, test set has " +
                     std::to_string(test.ap_count()));
  map.require_covers(test);
  EvalReport report;
  report.model_meta.family = std::string(M::family());
  report.model_meta.params = count_params(model);
  report.model_meta.size_bytes = report.model_meta.params * kBytesPerParam;

  for (int ci : test.cis()) {
    CiMetrics m;
    m.ci = ci;
    m.min_error_m = std::numeric_limits<double>::infinity();
    double total = 0.0;
    std::size_t hits = 0;
    for (const auto& fp : test) {
      if (fp.ci != ci) continue;
      const RpId pred = model.predict(fp.rss);
      const double err = distance(map.at(pred), map.at(fp.rp_id));
      total += err;
      m.min_error_m = std::min(m.min_error_m, err);
      m.max_error_m = std::max(m.max_error_m, err);
      hits += pred == fp.rp_id ? 1 : 0;
      ++m.samples;
    }
    m.mean_error_m = total / static_cast<double>(m.samples);
    m.accuracy = static_cast<double>(hits) / static_cast<double>(m.samples);
    report.per_ci.push_back(m);
  }
  return report;
}

// Median wall-clock time (ms) of predicting every fingerprint in `test`,
// including each family's preprocessing.
template <Localizer M>
double measure_latency(const M& model, const Dataset& test, int repetitions) {
  if (repetitions < 3) throw ConfigError("latency needs at least 3 repetitions");
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(repetitions));
  volatile std::size_t sink = 0;
  for (int r = 0; r < repetitions; ++r) {
    const auto start = std::chrono::steady_clock::now();
    const auto preds = predict_all(model, test);
    const auto stop = std::chrono::steady_clock::now();
    sink = sink + preds.size();
    samples.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  std::sort(samples.begin(), samples.end());
  const std::size_t mid = samples.size() / 2;
  const double median = samples.size() % 2 ? samples[mid] : 0.5 * (samples[mid - 1] + samples[mid]);
  // Keep the value strictly positive on coarse clocks.
  return std::max(median, std::numeric_limits<double>::min());
}

// Bitwise majority per position, ties resolved to 1.
inline BitVector majority_bits(std::span<const LatentCode> codes) {
  if (codes.empty()) throw ValidationError("majority of an empty latent list");
  const std::size_t len = codes.front().size();
  std::vector<std::size_t> ones(len, 0);
  for (const auto& c : codes) {
    if (c.size() != len) throw ShapeError("latent codes have differing lengths");
    for (std::size_t j = 0; j < len; ++j) ones[j] += c.bits[j];
  }
  BitVector out(len);
  for (std::size_t j = 0; j < len; ++j) out[j] = 2 * ones[j] >= codes.size() ? Bit{1} : Bit{0};
  return out;
}

// One representative latent per RP, keyed (and so ordered) by rp_id.
inline std::map<RpId, LatentCode> majority_latents(std::span<const LatentCode> latents, std::span<const RpId> labels) {
  if (latents.size() != labels.size()) throw ShapeError("one label per latent code is required");
  std::map<RpId, std::vector<LatentCode>> grouped;
  for (std::size_t i = 0; i < latents.size(); ++i) grouped[labels[i]].push_back(latents[i]);
  std::map<RpId, LatentCode> out;
  for (const auto& [rp, codes] : grouped)
    out[rp] = LatentCode{majority_bits(codes), codes.front().depth, codes.front().input_len};
  return out;
}

struct LatentDiff {
  RpId rp_a = 0;
  RpId rp_b = 0;
  std::vector<std::size_t> differing_bits;
  std::vector<ApWindow> ap_windows;  // parallel to differing_bits
  BitVector majority_a;
  BitVector majority_b;
};

inline LatentDiff latent_diff(std::span<const LatentCode> latents_a, std::span<const LatentCode> latents_b, RpId rp_a = 0,
                              RpId rp_b = 1) {
  if (latents_a.empty() || latents_b.empty()) throw ValidationError("latent_diff needs non-empty classes");
  const auto& ref = latents_a.front();
  for (const auto& c : latents_b)
    if (c.size() != ref.size() || c.depth != ref.depth || c.input_len != ref.input_len)
      throw ShapeError("latent codes from different encoders cannot be compared");
  LatentDiff d;
  d.rp_a = rp_a;
  d.rp_b = rp_b;
  d.majority_a = majority_bits(latents_a);
  d.majority_b = majority_bits(latents_b);
  for (std::size_t j = 0; j < d.majority_a.size(); ++j) {
    if (d.majority_a[j] == d.majority_b[j]) continue;
    d.differing_bits.push_back(j);
    d.ap_windows.push_back(trace_bit_to_aps(j, ref.depth, ref.input_len));
  }
  return d;
}

inline std::string format_latent_diff(const LatentDiff& d) {
  std::ostringstream os;
  os << "latent diff: RP " << d.rp_a << " vs RP " << d.rp_b << " (" << d.differing_bits.size() << " differing bits)\n";
  os << std::left << std::setw(6) << "bit" << std::setw(16) << "ap_window" << std::setw(8) << ("rp " + std::to_string(d.rp_a))
     << ("rp " + std::to_string(d.rp_b)) << '\n';
  for (std::size_t k = 0; k < d.differing_bits.size(); ++k) {
    const std::size_t j = d.differing_bits[k];
    const auto& w = d.ap_windows[k];
    std::string window = "[" + std::to_string(w.begin) + ", " + std::to_string(w.end) + ")";
    os << std::left << std::setw(6) << j << std::setw(16) << window << std::setw(8) << static_cast<int>(d.majority_a[j])
       << static_cast<int>(d.majority_b[j]) << '\n';
  }
  return os.str();
}

// 8-bit binary PGM (P5).
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

inline void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  if (img.pixels.size() != img.width * img.height) throw ShapeError("pixel buffer does not match image size");
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  auto token = [&]() {
    std::string t;
    char c;
    while (in.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!t.empty()) break;
        continue;
      }
      t += c;
    }
    return t;
  };
  if (token() != "P5") throw IoError("'" + path.string() + "' is not a binary PGM");
  GrayImage img;
  std::size_t maxval = 0;
  try {
    img.width = std::stoul(token());
    img.height = std::stoul(token());
    maxval = std::stoul(token());
  } catch (const std::exception&) {
    throw IoError("'" + path.string() + "' has a malformed PGM header");
  }
  if (maxval == 0 || maxval > 255) throw IoError("'" + path.string() + "' must be an 8-bit PGM");
  img.pixels.resize(img.width * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) throw IoError("'" + path.string() + "' is truncated");
  return img;
}

// Rows are RPs in ascending rp_id, columns are latent bits; 1 -> 255, 0 -> 0.
inline GrayImage latent_bitmap(const std::map<RpId, LatentCode>& latents) {
  GrayImage img;
  img.height = latents.size();
  img.width = latents.empty() ? 0 : latents.begin()->second.size();
  img.pixels.reserve(img.width * img.height);
  for (const auto& [rp, code] : latents) {
    if (code.size() != img.width) throw ShapeError("all latent codes in a bitmap must have equal length");
    for (Bit b : code.bits) img.pixels.push_back(b ? 255 : 0);
  }
  return img;
}

inline void export_latent_bitmap(const std::map<RpId, LatentCode>& latents, const std::filesystem::path& path) {
  write_pgm(path, latent_bitmap(latents));
}

inline std::vector<BitVector> bitmap_bits(const GrayImage& img) {
  std::vector<BitVector> rows(img.height, BitVector(img.width));
  for (std::size_t r = 0; r < img.height; ++r)
    for (std::size_t c = 0; c < img.width; ++c) rows[r][c] = img.pixels[r * img.width + c] >= 128 ? 1 : 0;
  return rows;
}

// Continuous rows (e.g. DNN hidden activations) scaled linearly to 0..255.
inline GrayImage grayscale_bitmap(const std::vector<std::vector<double>>& rows) {
  GrayImage img;
  img.height = rows.size();
  img.width = rows.empty() ? 0 : rows.front().size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& row : rows) {
    if (row.size() != img.width) throw ShapeError("grayscale rows must have equal length");
    for (double v : row) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double span = hi > lo ? hi - lo : 1.0;
  for (const auto& row : rows)
    for (double v : row) img.pixels.push_back(static_cast<std::uint8_t>(std::lround(255.0 * (v - lo) / span)));
  return img;
}

}  // namespace lognet
