#include "mre/losses.hpp"

#include <string>

#include "mre/errors.hpp"

namespace mre {

Tensor nll_rows(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() < 2) throw ShapeError("nll_rows expects [..., C] logits");
  const std::size_t classes = logits.shape().back();
  const std::size_t rows = logits.numel() / classes;
  if (labels.size() != rows)
    throw ShapeError("nll_rows: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(rows) + " rows");
  std::vector<double> pick(logits.numel(), 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= classes)
      throw ContractError("label " + std::to_string(y) + " outside [0, " +
                          std::to_string(classes) + ")");
    pick[r * classes + static_cast<std::size_t>(y)] = -1.0;
  }
  Tensor picked = multiply(row_log_softmax(logits), Tensor(logits.shape(), std::move(pick)));
  return sum(picked, logits.rank() - 1);
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2) throw ShapeError("cross_entropy expects [B, C] logits, got " +
                                           shape_string(logits.shape()));
  return mean(nll_rows(logits, labels));
}

}  // namespace mre
