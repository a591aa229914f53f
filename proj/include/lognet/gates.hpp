#pragma once

#include <array>
#include <cctype>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "lognet/core_data.hpp"

namespace lognet {

enum class GateType { And, Or, Nand, Nor, Xor, Xnor };

inline constexpr std::array<GateType, 6> kAllGates = {GateType::And, GateType::Or,  GateType::Nand,
                                                      GateType::Nor, GateType::Xor, GateType::Xnor};

constexpr std::string_view to_string(GateType g) noexcept {
  switch (g) {
    case GateType::And: return "and";
    case GateType::Or: return "or";
    case GateType::Nand: return "nand";
    case GateType::Nor: return "nor";
    case GateType::Xor: return "xor";
    case GateType::Xnor: return "xnor";
  }
  return "?";
}

inline GateType parse_gate(std::string_view name) {
  std::string lower(name);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (GateType g : kAllGates)
    if (to_string(g) == lower) return g;
  throw ConfigError("unknown gate type '" + std::string(name) + "' (expected and|or|nand|nor|xor|xnor)");
}

// Arithmetic form of each gate over {0, 1}; X + Y saturates at 1 (boolean sum).
constexpr double gate_arithmetic(double x, double y, GateType g) noexcept {
  const double sum = x + y - x * y;
  switch (g) {
    case GateType::And: return x * y;
    case GateType::Or: return sum;
    case GateType::Nand: return 1.0 - x * y;
    case GateType::Nor: return 1.0 - sum;
    case GateType::Xor: return x * (1.0 - y) + (1.0 - x) * y;
    case GateType::Xnor: return x * y + (1.0 - x) * (1.0 - y);
  }
  return 0.0;
}

constexpr Bit apply_gate(Bit x, Bit y, GateType g) noexcept {
  const unsigned a = x & 1u;
  const unsigned b = y & 1u;
  switch (g) {
    case GateType::And: return static_cast<Bit>(a & b);
    case GateType::Or: return static_cast<Bit>(a | b);
    case GateType::Nand: return static_cast<Bit>((a & b) ^ 1u);
    case GateType::Nor: return static_cast<Bit>((a | b) ^ 1u);
    case GateType::Xor: return static_cast<Bit>(a ^ b);
    case GateType::Xnor: return static_cast<Bit>(a ^ b ^ 1u);
  }
  return 0;
}

struct LogicEncoderConfig {
  GateType gate = GateType::Nor;
  double threshold = kDefaultThreshold;
  int hidden_layers = 1;

  void validate() const {
    validate_threshold(threshold);
    if (hidden_layers < 1) throw ConfigError("hidden_layers must be >= 1, got " + std::to_string(hidden_layers));
  }

  friend bool operator==(const LogicEncoderConfig&, const LogicEncoderConfig&) = default;
};

struct LatentCode {
  BitVector bits;
  int depth = 0;
  std::size_t input_len = 0;

  std::size_t size() const noexcept { return bits.size(); }

  friend bool operator==(const LatentCode&, const LatentCode&) = default;
};

// Length after applying L -> ceil(L / 2) `depth` times.
constexpr std::size_t ceil_chain(std::size_t len, int depth) noexcept {
  for (int k = 0; k < depth; ++k) len = (len + 1) / 2;
  return len;
}

// One logic layer: pad a trailing 0 if the width is odd, then gate each
// non-overlapping adjacent pair left to right.
inline BitVector encode_layer(std::span<const Bit> bits, GateType g) {
  if (bits.empty()) throw ValidationError("encode_layer needs a non-empty bit vector");
  const std::size_t out_len = (bits.size() + 1) / 2;
  BitVector out(out_len);
  for (std::size_t j = 0; j < out_len; ++j) {
    const Bit x = bits[2 * j];
    const Bit y = 2 * j + 1 < bits.size() ? bits[2 * j + 1] : Bit{0};
    out[j] = apply_gate(x, y, g);
  }
  return out;
}

inline LatentCode encode(const BinaryFingerprint& bf, const LogicEncoderConfig& cfg) {
  cfg.validate();
  if (bf.bits.size() != bf.source_ap_count)
    throw ValidationError("binary fingerprint length " + std::to_string(bf.bits.size()) +
                          " does not match its source AP count " + std::to_string(bf.source_ap_count));
  BitVector layer = bf.bits;
  for (int k = 0; k < cfg.hidden_layers; ++k) layer = encode_layer(layer, cfg.gate);
  return LatentCode{std::move(layer), cfg.hidden_layers, bf.source_ap_count};
}

// Half-open range of input APs.
struct ApWindow {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool contains(std::size_t ap) const noexcept { return ap >= begin && ap < end; }

  friend bool operator==(const ApWindow&, const ApWindow&) = default;
};

// Every input AP that latent bit `bit_index` can depend on after `depth`
// layers over `input_len` inputs: [j * 2^h, (j + 1) * 2^h) clipped to the input.
inline ApWindow trace_bit_to_aps(std::size_t bit_index, int depth, std::size_t input_len) {
  if (depth < 0) throw BoundsError("depth must be non-negative");
  const std::size_t latent_len = ceil_chain(input_len, depth);
  if (bit_index >= latent_len)
    throw BoundsError("latent bit " + std::to_string(bit_index) + " out of range for depth " +
                      std::to_string(depth) + " over " + std::to_string(input_len) + " inputs (latent length " +
                      std::to_string(latent_len) + ")");
  if (depth >= 63) return {0, input_len};  // the whole input collapses into bit 0
  const std::size_t span = std::size_t{1} << depth;
  const std::size_t begin = bit_index * span;
  const std::size_t end = std::min(begin + span, input_len);
  return {begin, end};
}

}  // namespace lognet
