#pragma once

#include <cstddef>
#include <vector>

#include "mre/tensor.hpp"

namespace mre {

// Plain row-major feature matrix (value semantics, no graph).
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  bool operator==(const Matrix&) const = default;

  Tensor to_tensor() const { return Tensor({rows, cols}, values); }
};

}  // namespace mre
