#include "mre/relevance.hpp"

#include <cmath>

#include "mre/errors.hpp"
#include "mre/losses.hpp"

namespace mre {

namespace {

void require_stack(const Tensor& s, const char* who) {
  if (s.rank() < 2 || s.shape()[s.rank() - 2] != kModalityCount)
    throw ShapeError(std::string(who) + ": expected [..., 3, d] modality stack, got " +
                     shape_string(s.shape()));
}

// [B, 3, d] (or [3, d]) -> [B, 3d]
Tensor flatten_stack(const Tensor& s) {
  const std::size_t width = kModalityCount * s.shape().back();
  return reshape(s, {s.numel() / width, width});
}

}  // namespace

const char* modality_name(Modality m) {
  switch (m) {
    case Modality::vision: return "vision";
    case Modality::audio: return "audio";
    case Modality::text: return "text";
  }
  return "?";
}

Mlp Mlp::init(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng) {
  return Mlp{Dense::init(in, hidden, rng), Dense::init(hidden, out, rng)};
}

Mlp Mlp::zeros(std::size_t in, std::size_t hidden, std::size_t out) {
  return Mlp{Dense::zeros(in, hidden), Dense::zeros(hidden, out)};
}

std::vector<Tensor> Mlp::parameters() const {
  return {hidden.weight, hidden.bias, out.weight, out.bias};
}

RelevanceHeads RelevanceHeads::init(std::size_t d_model, std::size_t hidden, std::size_t classes,
                                    Rng& rng) {
  RelevanceHeads h;
  h.modality_weights = Mlp::init(kModalityCount * d_model, hidden, kModalityCount, rng);
  h.category = Mlp::init(d_model, hidden, classes, rng);
  h.multimodal = Mlp::init(kModalityCount * d_model, hidden, classes, rng);
  return h;
}

std::vector<Tensor> RelevanceHeads::parameters() const {
  std::vector<Tensor> out = modality_weights.parameters();
  for (auto& p : category.parameters()) out.push_back(p);
  for (auto& p : multimodal.parameters()) out.push_back(p);
  return out;
}

Tensor stack_modalities(const Tensor& vision, const Tensor& audio, const Tensor& text) {
  for (const Tensor* t : {&vision, &audio, &text})
    if (t->rank() != 2 || t->shape() != vision.shape())
      throw ShapeError("stack_modalities: shapes " + shape_string(vision.shape()) + ", " +
                       shape_string(audio.shape()) + ", " + shape_string(text.shape()));
  const std::size_t b = vision.dim(0);
  const std::size_t d = vision.dim(1);
  return concat({reshape(vision, {b, 1, d}), reshape(audio, {b, 1, d}), reshape(text, {b, 1, d})},
                1);
}

Tensor attention_scores(const Tensor& stack) {
  require_stack(stack, "attention_scores");
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(stack.shape().back()));
  return row_softmax(scale(matmul(stack, transpose(stack)), inv_sqrt_d));
}

Tensor self_attention(const Tensor& stack) { return matmul(attention_scores(stack), stack); }

Tensor relevance_weights(const Tensor& attended, const Mlp& m1) {
  require_stack(attended, "relevance_weights");
  return row_softmax(m1(flatten_stack(attended)));
}

CategoryEstimates category_estimates(const Tensor& attended, const RelevanceHeads& heads) {
  require_stack(attended, "category_estimates");
  Tensor batched = attended.rank() == 2
                       ? reshape(attended, {1, kModalityCount, attended.shape().back()})
                       : attended;
  return CategoryEstimates{heads.category(batched), heads.multimodal(flatten_stack(attended))};
}

Tensor weighted_embedding(const Tensor& pooled_stack, const Tensor& weights) {
  require_stack(pooled_stack, "weighted_embedding");
  return scale_rows(pooled_stack, weights);
}

Tensor relevant_semantic_loss(const CategoryEstimates& est, const Tensor& weights,
                              std::span<const int> labels) {
  const Shape& ms = est.modality_logits.shape();
  if (ms.size() != 3 || ms[1] != kModalityCount || ms[0] != labels.size())
    throw ShapeError("relevant_semantic_loss: modality logits " + shape_string(ms) + " for " +
                     std::to_string(labels.size()) + " labels");
  if (weights.shape() != Shape{labels.size(), kModalityCount})
    throw ShapeError("relevant_semantic_loss: weights " + shape_string(weights.shape()));

  std::vector<int> pseudo;
  pseudo.reserve(labels.size() * kModalityCount);
  for (int y : labels) pseudo.insert(pseudo.end(), kModalityCount, y);
  Tensor per_modality = nll_rows(est.modality_logits, pseudo);  // [B, 3]
  Tensor weighted = sum(multiply(add_scalar(weights, 1.0), per_modality), 1);
  Tensor multimodal = nll_rows(est.multimodal_logits, labels);  // [B]
  return mean(add(weighted, multimodal));
}

}  // namespace mre
