#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "lognet/lognet.hpp"

namespace testing_support {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(LOGNET_FIXTURES) / name; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("lognet_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Hand-rolled generators for property tests.
struct Gen {
  std::mt19937_64 eng;
  explicit Gen(std::uint64_t seed) : eng(seed) {}

  std::size_t size(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(eng); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(eng); }

  lognet::BitVector bits(std::size_t n) {
    lognet::BitVector b(n);
    for (auto& x : b) x = coin() ? 1 : 0;
    return b;
  }

  // dBm vector with some missing-sentinel entries.
  std::vector<double> rss(std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = coin(0.15) ? lognet::kMissingRss : real(-99.0, -20.0);
    return v;
  }

  lognet::Dataset dataset(std::size_t rps, std::size_t per_rp, std::size_t aps, int cis = 1) {
    std::vector<lognet::Fingerprint> fps;
    for (int ci = 0; ci < cis; ++ci)
      for (std::size_t r = 0; r < rps; ++r)
        for (std::size_t k = 0; k < per_rp; ++k) fps.push_back({static_cast<int>(r), "dev" + std::to_string(k % 2), ci, rss(aps)});
    return lognet::Dataset(std::move(fps));
  }

  lognet::GateType gate() { return lognet::kAllGates[size(0, lognet::kAllGates.size() - 1)]; }
};

}  // namespace testing_support
