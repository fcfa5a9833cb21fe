#include "mre/model.hpp"

#include <algorithm>

#include "mre/contrastive.hpp"
#include "mre/errors.hpp"

namespace mre {

ModelConfig ModelConfig::from(const TrainConfig& cfg, const DatasetManifest& manifest) {
  ModelConfig m;
  m.input_dims = manifest.dims;
  m.classes = manifest.classes;
  m.d_model = cfg.d_model;
  m.head_hidden = cfg.head_hidden;
  m.rank = cfg.rank;
  m.fusion_out = cfg.fusion_out;
  m.temperature = cfg.tau;
  return m;
}

MreModel::MreModel(const ModelConfig& config, Rng& rng) : config_(config) {
  if (config.classes < 2) throw ContractError("model needs at least two classes");
  encoders = EncoderParams::init(config.input_dims[0], config.input_dims[1], config.input_dims[2],
                                 config.d_model, rng);
  heads = RelevanceHeads::init(config.d_model, config.head_hidden, config.classes, rng);
  fusion = FusionParams::init(config.d_model, config.rank, config.fused_width(), config.classes,
                              rng);
}

ForwardResult MreModel::forward(std::span<const InstanceBag* const> batch,
                                const ForwardMode& mode) const {
  if (batch.empty()) throw ContractError("forward on an empty batch");
  std::array<std::vector<const Matrix*>, kModalityCount> seqs;
  for (const InstanceBag* bag : batch)
    for (auto m : kModalities) seqs[static_cast<std::size_t>(m)].push_back(&bag->features(m));

  ForwardResult out;
  Tensor vision = dnn_encode_pooled(seqs[0], encoders.vision, mode);
  Tensor audio = dnn_encode_pooled(seqs[1], encoders.audio, mode);
  Tensor text = lstm_encode_pooled(seqs[2], encoders.text);
  out.pooled = stack_modalities(vision, audio, text);
  out.attended = self_attention(out.pooled);
  out.weights = relevance_weights(out.attended, heads.modality_weights);
  out.estimates = category_estimates(out.attended, heads);
  out.weighted = weighted_embedding(out.pooled, out.weights);

  const std::size_t b = batch.size();
  const std::size_t d = config_.d_model;
  auto row = [&](std::size_t m) { return reshape(slice(out.weighted, 1, m, m + 1), {b, d}); };
  out.fused = low_rank_fuse(row(0), row(1), row(2), fusion);
  out.logits = classify(out.fused, fusion);
  return out;
}

LossBundle MreModel::loss(const ForwardResult& out, std::span<const int> labels, double lambda_rs,
                          double lambda_cnce) const {
  const std::size_t b = labels.size();
  const std::size_t d = config_.d_model;
  auto row = [&](std::size_t m) { return reshape(slice(out.weighted, 1, m, m + 1), {b, d}); };
  Tensor l_rs = relevant_semantic_loss(out.estimates, out.weights, labels);
  ContrastiveBatch cb{row(0), row(1), row(2), std::vector<int>(labels.begin(), labels.end()),
                      config_.temperature};
  Tensor l_cnce = cnce_loss(cb);
  return total_loss(out.logits, labels, l_rs, l_cnce, lambda_rs, lambda_cnce);
}

std::vector<int> MreModel::predict(std::span<const InstanceBag* const> batch) const {
  Tensor logits = forward(batch).logits;
  const std::size_t c = config_.classes;
  std::vector<int> out(batch.size());
  auto v = logits.data();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto first = v.begin() + static_cast<std::ptrdiff_t>(i * c);
    out[i] = static_cast<int>(std::max_element(first, first + static_cast<std::ptrdiff_t>(c)) - first);
  }
  return out;
}

std::vector<std::pair<std::string, Tensor>> MreModel::named_parameters() const {
  std::vector<std::pair<std::string, Tensor>> out;
  auto add_dense = [&](const std::string& prefix, const Dense& l) {
    out.emplace_back(prefix + ".weight", l.weight);
    out.emplace_back(prefix + ".bias", l.bias);
  };
  auto add_mlp = [&](const std::string& prefix, const Mlp& m) {
    add_dense(prefix + ".hidden", m.hidden);
    add_dense(prefix + ".out", m.out);
  };
  for (std::size_t i = 0; i < 3; ++i) {
    add_dense("encoder.vision." + std::to_string(i), encoders.vision.layers[i]);
    add_dense("encoder.audio." + std::to_string(i), encoders.audio.layers[i]);
  }
  out.emplace_back("encoder.text.input_weight", encoders.text.input_weight);
  out.emplace_back("encoder.text.hidden_weight", encoders.text.hidden_weight);
  out.emplace_back("encoder.text.bias", encoders.text.bias);
  add_mlp("heads.modality_weights", heads.modality_weights);
  add_mlp("heads.category", heads.category);
  add_mlp("heads.multimodal", heads.multimodal);
  for (auto m : kModalities)
    out.emplace_back(std::string("fusion.factor.") + modality_name(m),
                     fusion.factors[static_cast<std::size_t>(m)]);
  out.emplace_back("fusion.bias", fusion.bias);
  if (fusion.classifier) add_dense("fusion.classifier", *fusion.classifier);
  return out;
}

std::vector<Tensor> MreModel::parameters() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named_parameters()) out.push_back(t);
  return out;
}

}  // namespace mre
