#pragma once

#include <span>

#include "mre/tensor.hpp"

namespace mre {

// Per-row negative log-likelihood of softmax(logits) at the given class ids.
// logits is [..., C] with labels.size() rows in flat row order; result has the
// logits shape without its last axis. Throws ContractError on a label outside [0, C).
Tensor nll_rows(const Tensor& logits, std::span<const int> labels);

// Batch-mean cross-entropy of softmax(logits[B, C]) against labels.
Tensor cross_entropy(const Tensor& logits, std::span<const int> labels);

}  // namespace mre
