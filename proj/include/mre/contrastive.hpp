#pragma once

// Category-level contrastive estimation over cross-modal pairs of
// relevance-weighted embeddings. For a modality pair (s1, s2) every ordered
// sample pair (i, j) is scored by exp(cos(z_s1[i], z_s2[j]) / tau), normalized
// over all B*B pairs. Same-label pairs are positives, the rest negatives.

#include <span>
#include <vector>

#include "mre/tensor.hpp"

namespace mre {

inline constexpr double kProbabilityClamp = 1e-7;

// Cosine similarity. Throws DomainError for a zero-norm vector.
double similarity(std::span<const double> x, std::span<const double> y);

// exp(s_anchor / tau) / sum_j exp(s_j / tau), max-subtracted.
double nce_prob(std::span<const double> similarities, std::size_t anchor, double tau);

// Pairwise cosine similarities of the rows of a and b, shape [B, B].
Tensor cosine_similarity_matrix(const Tensor& a, const Tensor& b);

struct ContrastiveBatch {
  Tensor vision;  // [B, d]
  Tensor audio;   // [B, d]
  Tensor text;    // [B, d]
  std::vector<int> labels;
  double temperature = 0.1;
};

// -(1/Np) sum_pos log P - (1/Nn) sum_neg log(1 - P) for one modality pair, with
// P clamped to [kProbabilityClamp, 1 - kProbabilityClamp]. An empty positive or
// negative set contributes zero.
Tensor cnce_pair_loss(const Tensor& first, const Tensor& second, std::span<const int> labels,
                      double temperature);

// Sum of cnce_pair_loss over (vision, audio), (vision, text), (audio, text).
Tensor cnce_loss(const ContrastiveBatch& batch);

}  // namespace mre
