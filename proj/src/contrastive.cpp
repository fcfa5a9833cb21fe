#include "mre/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mre/errors.hpp"

namespace mre {

double similarity(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw ShapeError("similarity: lengths " + std::to_string(x.size()) + " and " +
                     std::to_string(y.size()));
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  if (nx == 0.0 || ny == 0.0) throw DomainError("similarity of a zero-norm vector");
  return dot / (std::sqrt(nx) * std::sqrt(ny));
}

double nce_prob(std::span<const double> similarities, std::size_t anchor, double tau) {
  if (!(tau > 0.0)) throw ContractError("temperature must be positive");
  if (anchor >= similarities.size()) throw ContractError("nce_prob: anchor out of range");
  const double mx = *std::max_element(similarities.begin(), similarities.end());
  double z = 0.0;
  for (double s : similarities) z += std::exp((s - mx) / tau);
  return std::exp((similarities[anchor] - mx) / tau) / z;
}

Tensor cosine_similarity_matrix(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(1))
    throw ShapeError("cosine_similarity_matrix: shapes " + shape_string(a.shape()) + " and " +
                     shape_string(b.shape()));
  auto normalize = [](const Tensor& z) {
    Tensor norms = sqrt(sum(multiply(z, z), 1));
    for (double n : norms.data())
      if (n == 0.0) throw DomainError("cosine similarity of a zero-norm embedding");
    return scale_rows(z, divide(Tensor::full(norms.shape(), 1.0), norms));
  };
  return matmul(normalize(a), transpose(normalize(b)));
}

Tensor cnce_pair_loss(const Tensor& first, const Tensor& second, std::span<const int> labels,
                      double temperature) {
  if (!(temperature > 0.0)) throw ContractError("temperature must be positive");
  const std::size_t b = labels.size();
  if (first.rank() != 2 || first.dim(0) != b)
    throw ShapeError("cnce_pair_loss: embeddings " + shape_string(first.shape()) + " for " +
                     std::to_string(b) + " labels");

  Tensor logits = scale(cosine_similarity_matrix(first, second), 1.0 / temperature);
  Tensor prob = exp(row_log_softmax(reshape(logits, {1, b * b})));
  prob = clamp(prob, kProbabilityClamp, 1.0 - kProbabilityClamp);

  std::vector<double> pos(b * b, 0.0), neg(b * b, 0.0);
  std::size_t n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j) {
      if (labels[i] == labels[j]) {
        pos[i * b + j] = 1.0;
        ++n_pos;
      } else {
        neg[i * b + j] = 1.0;
        ++n_neg;
      }
    }

  Tensor loss = Tensor::scalar(0.0);
  if (n_pos > 0) {
    Tensor term = sum(multiply(log(prob), Tensor({1, b * b}, std::move(pos))));
    loss = add(loss, scale(term, -1.0 / static_cast<double>(n_pos)));
  }
  if (n_neg > 0) {
    Tensor complement = add_scalar(scale(prob, -1.0), 1.0);
    Tensor term = sum(multiply(log(complement), Tensor({1, b * b}, std::move(neg))));
    loss = add(loss, scale(term, -1.0 / static_cast<double>(n_neg)));
  }
  return loss;
}

Tensor cnce_loss(const ContrastiveBatch& batch) {
  const double tau = batch.temperature;
  return add(add(cnce_pair_loss(batch.vision, batch.audio, batch.labels, tau),
                 cnce_pair_loss(batch.vision, batch.text, batch.labels, tau)),
             cnce_pair_loss(batch.audio, batch.text, batch.labels, tau));
}

}  // namespace mre
