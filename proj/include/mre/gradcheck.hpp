#pragma once

#include <functional>
#include <vector>

#include "mre/tensor.hpp"

namespace mre {

// Compares reverse-mode gradients of f against central differences.
//
// f must rebuild its graph from the current values of the checked tensors on
// every call. Returns max_i |analytic_i - numeric_i| / max(1, |numeric_i|).
// Throws NumericalError naming the coordinate if f is non-finite.
double grad_check(const std::function<Tensor()>& f, Tensor theta, double eps = 1e-5);

// Maximum of grad_check over several tensors.
double grad_check(const std::function<Tensor()>& f, std::vector<Tensor> thetas,
                  double eps = 1e-5);

}  // namespace mre
