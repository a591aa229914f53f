#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <variant>

#include "json.hpp"
#include "lognet/classifiers.hpp"
#include "lognet/error.hpp"

namespace lognet {

inline constexpr int kModelSchemaVersion = 1;

using AnyModel = std::variant<LogNetModel, DnnClassifier>;

namespace detail {

inline nlohmann::json layer_to_json(const DenseLayer& l) {
  return {{"inputs", l.inputs}, {"outputs", l.outputs}, {"weights", l.weights}, {"biases", l.biases}};
}

inline DenseLayer layer_from_json(const nlohmann::json& j) {
  DenseLayer l;
  l.inputs = j.at("inputs").get<std::size_t>();
  l.outputs = j.at("outputs").get<std::size_t>();
  l.weights = j.at("weights").get<std::vector<double>>();
  l.biases = j.at("biases").get<std::vector<double>>();
  if (l.weights.size() != l.inputs * l.outputs || l.biases.size() != l.outputs)
    throw ValidationError("serialized layer arrays do not match its declared shape");
  return l;
}

inline nlohmann::json range_to_json(const NormalizationRange& r) { return {{"lo_dbm", r.lo}, {"hi_dbm", r.hi}}; }

inline NormalizationRange range_from_json(const nlohmann::json& j) {
  NormalizationRange r{j.at("lo_dbm").get<double>(), j.at("hi_dbm").get<double>()};
  r.validate();
  return r;
}

}  // namespace detail

inline nlohmann::json to_json(const LogNetModel& m) {
  return {{"schema_version", kModelSchemaVersion},
          {"family", LogNetModel::family()},
          {"normalization", detail::range_to_json(m.range)},
          {"encoder",
           {{"gate", to_string(m.encoder.gate)},
            {"threshold", m.encoder.threshold},
            {"hidden_layers", m.encoder.hidden_layers},
            {"input_aps", m.input_aps}}},
          {"widths", {m.head.latent_dim(), m.head.num_classes()}},
          {"class_labels", m.head.class_labels},
          {"param_count", count_params(m)},
          {"bytes_per_param", kBytesPerParam},
          {"layers", {detail::layer_to_json(m.head.head)}}};
}

inline nlohmann::json to_json(const DnnClassifier& m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : m.net.layers) layers.push_back(detail::layer_to_json(l));
  return {{"schema_version", kModelSchemaVersion},
          {"family", DnnClassifier::family()},
          {"normalization", detail::range_to_json(m.range)},
          {"widths", m.net.widths},
          {"class_labels", m.net.class_labels},
          {"param_count", count_params(m)},
          {"bytes_per_param", kBytesPerParam},
          {"layers", std::move(layers)}};
}

inline AnyModel model_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion)
      throw ValidationError("unsupported model schema_version " + std::to_string(version));
    const auto family = j.at("family").get<std::string>();
    const auto range = detail::range_from_json(j.at("normalization"));
    auto classes = j.at("class_labels").get<std::vector<RpId>>();
    const auto& layers = j.at("layers");

    if (family == LogNetModel::family()) {
      const auto& enc = j.at("encoder");
      LogNetModel m;
      m.range = range;
      m.encoder = {parse_gate(enc.at("gate").get<std::string>()), enc.at("threshold").get<double>(),
                   enc.at("hidden_layers").get<int>()};
      m.encoder.validate();
      m.input_aps = enc.at("input_aps").get<std::size_t>();
      if (layers.size() != 1) throw ValidationError("a LogNet model has exactly one trainable layer");
      m.head.head = detail::layer_from_json(layers.at(0));
      m.head.class_labels = std::move(classes);
      if (m.head.latent_dim() != ceil_chain(m.input_aps, m.encoder.hidden_layers) ||
          m.head.num_classes() != m.head.class_labels.size())
        throw ValidationError("LogNet head shape does not match its encoder configuration");
      return m;
    }
    if (family == DnnClassifier::family()) {
      DnnClassifier m;
      m.range = range;
      m.net.widths = j.at("widths").get<std::vector<std::size_t>>();
      m.net.class_labels = std::move(classes);
      for (const auto& l : layers) m.net.layers.push_back(detail::layer_from_json(l));
      if (m.net.widths.size() != m.net.layers.size() + 1 || m.net.widths.back() != m.net.class_labels.size())
        throw ValidationError("DNN widths do not match its layers");
      for (std::size_t k = 0; k < m.net.layers.size(); ++k)
        if (m.net.layers[k].inputs != m.net.widths[k] || m.net.layers[k].outputs != m.net.widths[k + 1])
          throw ValidationError("DNN layer " + std::to_string(k) + " does not chain with its widths");
      return m;
    }
    throw ValidationError("unknown model family '" + family + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model document: ") + e.what());
  }
}

template <typename M>
void save_model(const std::filesystem::path& path, const M& model) {
  ensure_parent_dir(path);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << to_json(model).dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline AnyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace lognet
