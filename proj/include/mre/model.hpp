#pragma once

// The full network: encoders -> temporal mean pooling -> self-attention over
// the modality stack -> relevance weights and category heads -> relevance-
// weighted embeddings -> low-rank fusion -> classifier.

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mre/config.hpp"
#include "mre/dataset.hpp"
#include "mre/encoders.hpp"
#include "mre/fusion.hpp"
#include "mre/relevance.hpp"

namespace mre {

struct ModelConfig {
  std::array<std::size_t, kModalityCount> input_dims{};
  std::size_t classes = 0;
  std::size_t d_model = 32;
  std::size_t head_hidden = 32;
  std::size_t rank = 4;
  std::size_t fusion_out = 0;  // 0 -> classes
  double temperature = 0.1;

  static ModelConfig from(const TrainConfig& cfg, const DatasetManifest& manifest);
  std::size_t fused_width() const { return fusion_out == 0 ? classes : fusion_out; }
  bool operator==(const ModelConfig&) const = default;
};

struct ForwardResult {
  Tensor pooled;     // [B, 3, d_model]
  Tensor attended;   // [B, 3, d_model]
  Tensor weights;    // [B, 3]
  CategoryEstimates estimates;
  Tensor weighted;   // [B, 3, d_model]
  Tensor fused;      // [B, d_out]
  Tensor logits;     // [B, C]
};

class MreModel {
 public:
  MreModel(const ModelConfig& config, Rng& rng);

  const ModelConfig& config() const { return config_; }

  ForwardResult forward(std::span<const InstanceBag* const> batch,
                        const ForwardMode& mode = {}) const;
  LossBundle loss(const ForwardResult& out, std::span<const int> labels, double lambda_rs,
                  double lambda_cnce) const;
  std::vector<int> predict(std::span<const InstanceBag* const> batch) const;

  // Stable names and order; checkpoints rely on both.
  std::vector<std::pair<std::string, Tensor>> named_parameters() const;
  std::vector<Tensor> parameters() const;

  EncoderParams encoders;
  RelevanceHeads heads;
  FusionParams fusion;

 private:
  ModelConfig config_;
};

}  // namespace mre
