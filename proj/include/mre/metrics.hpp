#pragma once

#include <span>
#include <vector>

#include "mre/config.hpp"

namespace mre {

struct Metrics {
  double accuracy = 0.0;
  double f1 = 0.0;
};

// Accuracy and F1. Weighted F1 averages per-class F1 by true support; macro F1
// averages over classes present in either predictions or truth. A class with
// no true positives has F1 = 0. Throws ContractError on empty input.
Metrics classification_metrics(std::span<const int> predicted, std::span<const int> truth,
                               std::size_t classes, F1Average average = F1Average::weighted);

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  bool operator==(const Aggregate&) const = default;
};

Aggregate aggregate(std::span<const double> values);

}  // namespace mre
