#include "mre/metrics.hpp"

#include <cmath>
#include <string>

#include "mre/errors.hpp"

namespace mre {

Metrics classification_metrics(std::span<const int> predicted, std::span<const int> truth,
                               std::size_t classes, F1Average average) {
  if (predicted.empty()) throw ContractError("metrics on an empty split");
  if (predicted.size() != truth.size())
    throw ContractError("metrics: prediction and label counts differ");
  std::vector<std::size_t> tp(classes, 0), pred_count(classes, 0), support(classes, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int p = predicted[i];
    const int t = truth[i];
    if (p < 0 || t < 0 || static_cast<std::size_t>(p) >= classes ||
        static_cast<std::size_t>(t) >= classes)
      throw ContractError("metrics: class id outside [0, " + std::to_string(classes) + ")");
    ++pred_count[static_cast<std::size_t>(p)];
    ++support[static_cast<std::size_t>(t)];
    if (p == t) {
      ++correct;
      ++tp[static_cast<std::size_t>(t)];
    }
  }
  const double n = static_cast<double>(truth.size());
  Metrics m;
  m.accuracy = static_cast<double>(correct) / n;

  double f1_sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (support[c] == 0 && pred_count[c] == 0) continue;
    ++present;
    double f1 = 0.0;
    if (tp[c] > 0) {
      const double precision = static_cast<double>(tp[c]) / static_cast<double>(pred_count[c]);
      const double recall = static_cast<double>(tp[c]) / static_cast<double>(support[c]);
      f1 = 2.0 * precision * recall / (precision + recall);
    }
    f1_sum += average == F1Average::weighted ? f1 * static_cast<double>(support[c]) / n : f1;
  }
  m.f1 = average == F1Average::weighted ? f1_sum : f1_sum / static_cast<double>(present);
  return m;
}

Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) throw ContractError("aggregate of no values");
  double total = 0.0;
  for (double v : values) total += v;
  Aggregate a;
  a.mean = total / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - a.mean) * (v - a.mean);
  a.std = std::sqrt(sq / static_cast<double>(values.size()));
  return a;
}

}  // namespace mre
