#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "lognet/core_data.hpp"
#include "lognet/error.hpp"
#include "lognet/gates.hpp"
#include "lognet/noise_sim.hpp"

namespace lognet {

namespace csv {

// Shortest round-trip decimal form; integral values keep a trailing ".0".
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && !s.empty();
}

// Line-oriented reader that tracks 1-based line numbers and skips blank lines.
class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  bool next(std::vector<std::string_view>& fields) {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (line_no_ == 1 && line_.size() >= 3 && line_.compare(0, 3, "\xEF\xBB\xBF") == 0) line_.erase(0, 3);
      if (trim(line_).empty()) continue;
      fields = split(line_);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_no_, what); }

  template <typename T>
  T number(std::string_view field, std::string_view column) const {
    T v{};
    if (!parse_number(field, v)) fail("column '" + std::string(column) + "': '" + std::string(field) + "' is not a valid number");
    if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(v)) fail("column '" + std::string(column) + "': value must be finite");
    }
    return v;
  }

  std::size_t line() const noexcept { return line_no_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  std::string line_;
  std::size_t line_no_ = 0;
};

inline std::string column_name(std::string_view prefix, std::size_t index, std::size_t count) {
  std::size_t width = 3;
  for (std::size_t n = count > 0 ? count - 1 : 0; n >= 1000; n /= 10) ++width;
  std::string digits = std::to_string(index);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return std::string(prefix) + digits;
}

inline bool is_indexed_column(std::string_view name, std::string_view prefix, std::size_t index) {
  if (name.substr(0, prefix.size()) != prefix) return false;
  std::size_t v = 0;
  return parse_number(name.substr(prefix.size()), v) && v == index;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace csv

// Header: rp_id,device_id,ci,ap_000,...,ap_{N-1}
inline void write_fingerprints(std::ostream& out, const Dataset& ds) {
  out << "rp_id,device_id,ci";
  for (std::size_t i = 0; i < ds.ap_count(); ++i) out << ',' << csv::column_name("ap_", i, ds.ap_count());
  out << '\n';
  for (const auto& fp : ds) {
    if (fp.device_id.find_first_of(",\n\r") != std::string::npos)
      throw ValidationError("device_id '" + fp.device_id + "' contains a separator");
    out << fp.rp_id << ',' << fp.device_id << ',' << fp.ci;
    for (double v : fp.rss) out << ',' << csv::format_double(v);
    out << '\n';
  }
}

inline Dataset read_fingerprints(std::istream& in, const std::string& source = "<stream>") {
  csv::Reader reader(in, source);
  std::vector<std::string_view> fields;
  if (!reader.next(fields)) reader.fail("missing header");
  if (fields.size() < 4 || fields[0] != "rp_id" || fields[1] != "device_id" || fields[2] != "ci")
    reader.fail("header must start with rp_id,device_id,ci followed by at least one ap_ column");
  const std::size_t aps = fields.size() - 3;
  for (std::size_t i = 0; i < aps; ++i)
    if (!csv::is_indexed_column(fields[3 + i], "ap_", i))
      reader.fail("header column " + std::to_string(3 + i) + " should be ap_" + std::to_string(i) + ", got '" +
                  std::string(fields[3 + i]) + "'");

  std::vector<Fingerprint> fps;
  while (reader.next(fields)) {
    if (fields.size() != aps + 3)
      reader.fail("row has " + std::to_string(fields.size() - std::min<std::size_t>(fields.size(), 3)) +
                  " RSS values, expected " + std::to_string(aps));
    Fingerprint fp;
    fp.rp_id = reader.number<RpId>(fields[0], "rp_id");
    fp.device_id = std::string(fields[1]);
    fp.ci = reader.number<int>(fields[2], "ci");
    if (fp.rp_id < 0) reader.fail("rp_id must be non-negative");
    if (fp.ci < 0) reader.fail("ci must be non-negative");
    fp.rss.reserve(aps);
    for (std::size_t i = 0; i < aps; ++i) fp.rss.push_back(reader.number<double>(fields[3 + i], "ap_" + std::to_string(i)));
    fps.push_back(std::move(fp));
  }
  return Dataset(std::move(fps), aps);
}

inline Dataset ingest_fingerprints(const std::filesystem::path& path) {
  auto in = csv::open_in(path);
  return read_fingerprints(in, path.string());
}

inline void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  auto out = csv::open_out(path);
  write_fingerprints(out, ds);
  csv::finish(out, path);
}

// Header: rp_id,x_m,y_m
inline void write_rp_map(std::ostream& out, const RpMap& map) {
  out << "rp_id,x_m,y_m\n";
  for (const auto& [rp, p] : map.entries()) out << rp << ',' << csv::format_double(p.x) << ',' << csv::format_double(p.y) << '\n';
}

inline RpMap read_rp_map(std::istream& in, const std::string& source = "<stream>") {
  csv::Reader reader(in, source);
  std::vector<std::string_view> fields;
  if (!reader.next(fields)) reader.fail("missing header");
  if (fields.size() != 3 || fields[0] != "rp_id" || fields[1] != "x_m" || fields[2] != "y_m")
    reader.fail("header must be rp_id,x_m,y_m");
  std::map<RpId, Point> entries;
  while (reader.next(fields)) {
    if (fields.size() != 3) reader.fail("expected 3 columns, got " + std::to_string(fields.size()));
    const auto rp = reader.number<RpId>(fields[0], "rp_id");
    const Point p{reader.number<double>(fields[1], "x_m"), reader.number<double>(fields[2], "y_m")};
    if (!entries.emplace(rp, p).second) reader.fail("duplicate rp_id " + std::to_string(rp));
  }
  return RpMap(std::move(entries));
}

inline RpMap load_rp_map(const std::filesystem::path& path) {
  auto in = csv::open_in(path);
  return read_rp_map(in, path.string());
}

inline void save_rp_map(const std::filesystem::path& path, const RpMap& map) {
  auto out = csv::open_out(path);
  write_rp_map(out, map);
  csv::finish(out, path);
}

// Header: ap_index,delta_db. Every index 0..N-1 must appear exactly once.
inline std::vector<double> read_deltas(std::istream& in, const std::string& source = "<stream>") {
  csv::Reader reader(in, source);
  std::vector<std::string_view> fields;
  if (!reader.next(fields)) reader.fail("missing header");
  if (fields.size() != 2 || fields[0] != "ap_index" || fields[1] != "delta_db") reader.fail("header must be ap_index,delta_db");
  std::map<std::size_t, double> by_index;
  while (reader.next(fields)) {
    if (fields.size() != 2) reader.fail("expected 2 columns");
    const auto idx = reader.number<std::size_t>(fields[0], "ap_index");
    if (!by_index.emplace(idx, reader.number<double>(fields[1], "delta_db")).second)
      reader.fail("duplicate ap_index " + std::to_string(idx));
  }
  std::vector<double> out;
  for (const auto& [idx, d] : by_index) {
    if (idx != out.size()) throw ParseError(source, reader.line(), "ap_index " + std::to_string(out.size()) + " is missing");
    out.push_back(d);
  }
  return out;
}

inline std::vector<double> load_deltas(const std::filesystem::path& path) {
  auto in = csv::open_in(path);
  return read_deltas(in, path.string());
}

inline void write_deltas(std::ostream& out, const std::vector<double>& deltas) {
  out << "ap_index,delta_db\n";
  for (std::size_t i = 0; i < deltas.size(); ++i) out << i << ',' << csv::format_double(deltas[i]) << '\n';
}

// Header: ci,multiplier
inline TemporalSchedule read_schedule(std::istream& in, const std::string& source = "<stream>") {
  csv::Reader reader(in, source);
  std::vector<std::string_view> fields;
  if (!reader.next(fields)) reader.fail("missing header");
  if (fields.size() != 2 || fields[0] != "ci" || fields[1] != "multiplier") reader.fail("header must be ci,multiplier");
  TemporalSchedule sched;
  while (reader.next(fields)) {
    if (fields.size() != 2) reader.fail("expected 2 columns");
    sched.entries.push_back({reader.number<int>(fields[0], "ci"), reader.number<double>(fields[1], "multiplier")});
  }
  try {
    sched.validate();
  } catch (const ConfigError& e) {
    reader.fail(e.what());
  }
  return sched;
}

inline TemporalSchedule load_schedule(const std::filesystem::path& path) {
  auto in = csv::open_in(path);
  return read_schedule(in, path.string());
}

inline void write_schedule(std::ostream& out, const TemporalSchedule& sched) {
  out << "ci,multiplier\n";
  for (const auto& e : sched.entries) out << e.ci << ',' << csv::format_double(e.multiplier) << '\n';
}

// Header: rp_id,bit_000,...
inline void write_latents(std::ostream& out, const std::vector<RpId>& labels, const std::vector<LatentCode>& latents) {
  if (labels.size() != latents.size()) throw ShapeError("latent CSV needs one label per latent code");
  const std::size_t len = latents.empty() ? 0 : latents.front().size();
  out << "rp_id";
  for (std::size_t j = 0; j < len; ++j) out << ',' << csv::column_name("bit_", j, len);
  out << '\n';
  for (std::size_t r = 0; r < latents.size(); ++r) {
    if (latents[r].size() != len) throw ShapeError("latent codes have differing lengths");
    out << labels[r];
    for (Bit b : latents[r].bits) out << ',' << static_cast<int>(b);
    out << '\n';
  }
}

struct LabelledBits {
  std::vector<RpId> labels;
  std::vector<BitVector> rows;
};

inline LabelledBits read_latents(std::istream& in, const std::string& source = "<stream>") {
  csv::Reader reader(in, source);
  std::vector<std::string_view> fields;
  if (!reader.next(fields)) reader.fail("missing header");
  if (fields.empty() || fields[0] != "rp_id") reader.fail("header must start with rp_id");
  const std::size_t len = fields.size() - 1;
  for (std::size_t j = 0; j < len; ++j)
    if (!csv::is_indexed_column(fields[1 + j], "bit_", j)) reader.fail("bad latent column '" + std::string(fields[1 + j]) + "'");
  LabelledBits out;
  while (reader.next(fields)) {
    if (fields.size() != len + 1) reader.fail("ragged latent row");
    out.labels.push_back(reader.number<RpId>(fields[0], "rp_id"));
    BitVector bits;
    for (std::size_t j = 0; j < len; ++j) {
      const int b = reader.number<int>(fields[1 + j], "bit");
      if (b != 0 && b != 1) reader.fail("latent bits must be 0 or 1");
      bits.push_back(static_cast<Bit>(b));
    }
    out.rows.push_back(std::move(bits));
  }
  return out;
}

}  // namespace lognet
