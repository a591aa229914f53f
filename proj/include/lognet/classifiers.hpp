#pragma once

#include <concepts>
#include <span>
#include <string>
#include <vector>

#include "lognet/core_data.hpp"
#include "lognet/gates.hpp"
#include "lognet/models.hpp"

namespace lognet {

// Binarize -> logic layers -> softmax head. Only the head is trainable.
struct LogNetModel {
  NormalizationRange range;
  LogicEncoderConfig encoder;
  std::size_t input_aps = 0;
  SoftmaxModel head;

  static constexpr std::string_view family() noexcept { return "lognet"; }
  std::size_t ap_count() const noexcept { return input_aps; }

  LatentCode latent(std::span<const double> rss_dbm) const {
    if (rss_dbm.size() != input_aps)
      throw ShapeError("LogNet expects " + std::to_string(input_aps) + " APs, got " + std::to_string(rss_dbm.size()));
    return encode(binarize(normalize_rss(rss_dbm, range), encoder.threshold), encoder);
  }

  std::vector<double> probabilities(std::span<const double> rss_dbm) const {
    return softmax_forward(head, latent(rss_dbm));
  }

  RpId predict(std::span<const double> rss_dbm) const { return head.class_labels[argmax(probabilities(rss_dbm))]; }

  friend bool operator==(const LogNetModel&, const LogNetModel&) = default;
};

struct DnnClassifier {
  NormalizationRange range;
  DnnModel net;

  static constexpr std::string_view family() noexcept { return "dnn"; }
  std::size_t ap_count() const noexcept { return net.input_dim(); }

  std::vector<double> probabilities(std::span<const double> rss_dbm) const {
    return dnn_forward(net, normalize_rss(rss_dbm, range));
  }

  std::vector<double> latent(std::span<const double> rss_dbm) const {
    return dnn_latent(net, normalize_rss(rss_dbm, range));
  }

  RpId predict(std::span<const double> rss_dbm) const { return net.class_labels[argmax(probabilities(rss_dbm))]; }

  friend bool operator==(const DnnClassifier&, const DnnClassifier&) = default;
};

inline std::size_t count_params(const LogNetModel& m) { return count_params(m.head); }
inline std::size_t count_params(const DnnClassifier& m) { return count_params(m.net); }

template <typename M>
concept Localizer = requires(const M& m, std::span<const double> rss) {
  { m.predict(rss) } -> std::same_as<RpId>;
  { m.ap_count() } -> std::convertible_to<std::size_t>;
  { count_params(m) } -> std::convertible_to<std::size_t>;
  { M::family() } -> std::convertible_to<std::string_view>;
};

template <Localizer M>
std::vector<RpId> predict_all(const M& model, const Dataset& ds) {
  if (ds.ap_count() != model.ap_count())
    throw ShapeError("model expects " + std::to_string(model.ap_count()) + " APs, dataset has " +
                     std::to_string(ds.ap_count()));
  std::vector<RpId> out;
  out.reserve(ds.size());
  for (const auto& fp : ds) out.push_back(model.predict(fp.rss));
  return out;
}

inline std::vector<LatentCode> encode_dataset(const Dataset& raw, const LogicEncoderConfig& encoder,
                                              const NormalizationRange& range = {}) {
  encoder.validate();
  std::vector<LatentCode> out;
  out.reserve(raw.size());
  for (const auto& fp : raw) out.push_back(encode(binarize(normalize_rss(fp.rss, range), encoder.threshold), encoder));
  return out;
}

inline std::vector<RpId> labels_of(const Dataset& ds) {
  std::vector<RpId> out;
  out.reserve(ds.size());
  for (const auto& fp : ds) out.push_back(fp.rp_id);
  return out;
}

// `raw_train` is in dBm. Classes default to the RPs present in the training set.
inline TrainResult<LogNetModel> train_lognet(const Dataset& raw_train, const LogicEncoderConfig& encoder,
                                             const TrainConfig& cfg, const NormalizationRange& range = {}) {
  range.validate();
  auto latents = encode_dataset(raw_train, encoder, range);
  const auto labels = labels_of(raw_train);
  auto head = train_softmax(latents, labels, cfg);
  return {LogNetModel{range, encoder, raw_train.ap_count(), std::move(head.model)}, std::move(head.loss_history)};
}

inline TrainResult<DnnClassifier> train_dnn_classifier(const Dataset& raw_train, int hidden_layers,
                                                       const TrainConfig& cfg, const NormalizationRange& range = {}) {
  auto result = train_dnn(normalize(raw_train, range), hidden_layers, cfg);
  return {DnnClassifier{range, std::move(result.model)}, std::move(result.loss_history)};
}

}  // namespace lognet
