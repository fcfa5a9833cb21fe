#pragma once

// Low-rank multimodal fusion, the classification head and the combined
// training objective.
//
// Each modality embedding s_m is augmented to [s_m; 1] and projected by R
// factor matrices W_m^r (d_out x (d_model + 1)). The fused feature is
//   F = sum_r (W_v^r s~_v) * (W_a^r s~_a) * (W_t^r s~_t) + bias
// which equals a rank-R CP factorization of the full outer-product fusion.

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "mre/encoders.hpp"
#include "mre/matrix.hpp"
#include "mre/relevance.hpp"
#include "mre/tensor.hpp"

namespace mre {

struct FusionParams {
  // Per modality [d_model + 1, rank * d_out]; column r * d_out + o holds row o
  // of W_m^r.
  std::array<Tensor, kModalityCount> factors;
  Tensor bias;  // [d_out]
  // Absent means identity (d_out == C).
  std::optional<Dense> classifier;
  std::size_t rank = 0;

  static FusionParams init(std::size_t d_model, std::size_t rank, std::size_t d_out,
                           std::size_t classes, Rng& rng);
  std::size_t out_dim() const { return bias.numel(); }
  std::size_t input_dim() const { return factors[0].dim(0) - 1; }

  // W_m^r as a d_out x (d_model + 1) matrix.
  Matrix factor(Modality m, std::size_t r) const;
  void set_factor(Modality m, std::size_t r, const Matrix& w);
  std::vector<Tensor> parameters() const;
};

// [B, d] x 3 -> [B, d_out]
Tensor low_rank_fuse(const Tensor& vision, const Tensor& audio, const Tensor& text,
                     const FusionParams& params);

// [B, d_out] -> [B, C]
Tensor classify(const Tensor& fused, const FusionParams& params);

struct LossBundle {
  Tensor ce;
  Tensor l_rs;
  Tensor l_cnce;
  Tensor total;
  double lambda_rs = 1.0;
  double lambda_cnce = 1.0;
};

// total = ce + lambda_rs * l_rs + lambda_cnce * l_cnce, ce the batch-mean
// cross-entropy of the classifier logits.
LossBundle total_loss(const Tensor& logits, std::span<const int> labels, const Tensor& l_rs,
                      const Tensor& l_cnce, double lambda_rs = 1.0, double lambda_cnce = 1.0);

}  // namespace mre
