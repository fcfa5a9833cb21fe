#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mre/tensor.hpp"

namespace mre {

struct AdamState {
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;

  explicit AdamState(double lr = 5e-5) : learning_rate(lr) {}
};

// Bias-corrected Adam update of params in place using explicit gradients.
// Moment buffers are sized lazily on the first step.
void adam_step(std::span<Tensor> params, std::span<const std::vector<double>> grads,
               AdamState& state);

// Same, reading each parameter's accumulated gradient (absent gradient = 0).
void adam_step(std::span<Tensor> params, AdamState& state);

}  // namespace mre
