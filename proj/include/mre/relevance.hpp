#pragma once

// Relevant semantic estimation: parameter-free self-attention over the stacked
// per-modality embeddings, modality relevance weights (M1), per-modality and
// multimodal category heads (M2 and the multimodal head), the
// relevance-weighted embedding, and the relevance-weighted weak-supervision loss.
//
// Stacks are [B, 3, d_model] with rows ordered (vision, audio, text).

#include <array>
#include <span>
#include <vector>

#include "mre/encoders.hpp"
#include "mre/tensor.hpp"

namespace mre {

enum class Modality : std::size_t { vision = 0, audio = 1, text = 2 };
inline constexpr std::size_t kModalityCount = 3;
inline constexpr std::array<Modality, kModalityCount> kModalities = {
    Modality::vision, Modality::audio, Modality::text};

const char* modality_name(Modality m);

// affine -> ReLU -> affine
struct Mlp {
  Dense hidden;
  Dense out;

  static Mlp init(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng);
  static Mlp zeros(std::size_t in, std::size_t hidden, std::size_t out);
  Tensor operator()(const Tensor& x) const { return out(relu(hidden(x))); }
  std::vector<Tensor> parameters() const;
};

struct RelevanceHeads {
  Mlp modality_weights;  // M1: 3*d_model -> hidden -> 3
  Mlp category;          // M2: d_model -> hidden -> C, shared across modality rows
  Mlp multimodal;        // 3*d_model -> hidden -> C

  static RelevanceHeads init(std::size_t d_model, std::size_t hidden, std::size_t classes,
                             Rng& rng);
  std::size_t classes() const { return category.out.out_dim(); }
  std::vector<Tensor> parameters() const;
};

struct CategoryEstimates {
  Tensor modality_logits;    // [B, 3, C]
  Tensor multimodal_logits;  // [B, C]
};

// [B, d] x 3 -> [B, 3, d]
Tensor stack_modalities(const Tensor& vision, const Tensor& audio, const Tensor& text);

// row-softmax(S S^T / sqrt(d)), shape [..., 3, 3].
Tensor attention_scores(const Tensor& stack);

// attention_scores(S) S with Q = K = V = S.
Tensor self_attention(const Tensor& stack);

// softmax(M1(flatten(A))), shape [B, 3].
Tensor relevance_weights(const Tensor& attended, const Mlp& m1);

CategoryEstimates category_estimates(const Tensor& attended, const RelevanceHeads& heads);

// Row m of each sample scaled by h_m: [B, 3, d] x [B, 3] -> [B, 3, d].
Tensor weighted_embedding(const Tensor& pooled_stack, const Tensor& weights);

// Batch mean of sum_m (1 + h_m) CE(modality row m, y) + CE(multimodal, y); the
// bag label y is the pseudo-label for every modality.
Tensor relevant_semantic_loss(const CategoryEstimates& est, const Tensor& weights,
                              std::span<const int> labels);

}  // namespace mre
