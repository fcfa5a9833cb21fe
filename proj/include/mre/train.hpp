#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mre/config.hpp"
#include "mre/dataset.hpp"
#include "mre/metrics.hpp"
#include "mre/model.hpp"

namespace mre {

// Batch-mean loss components averaged over one epoch of training batches.
struct EpochRecord {
  std::size_t epoch = 0;
  double ce = 0.0;
  double l_rs = 0.0;
  double l_cnce = 0.0;
  double total = 0.0;
  double val_accuracy = 0.0;
  bool operator==(const EpochRecord&) const = default;
};

struct SeedRecord {
  std::uint64_t seed = 0;
  double accuracy = 0.0;  // test split, best-validation model
  double f1 = 0.0;
  double val_accuracy = 0.0;
  std::size_t best_epoch = 0;
  std::vector<EpochRecord> epochs;
  bool operator==(const SeedRecord&) const = default;
};

struct RunReport {
  TrainConfig config;
  std::vector<SeedRecord> runs;
  Aggregate accuracy;
  Aggregate f1;
  bool operator==(const RunReport&) const = default;
};

struct TrainResult {
  MreModel model;
  SeedRecord record;
};

using Progress = std::function<void(const std::string&)>;

// Trains one seed on the configured split: Adam on the combined objective,
// early stopping on validation accuracy, best-validation parameters restored.
// Throws NumericalError naming epoch and batch if the loss becomes non-finite.
TrainResult train(const TrainConfig& cfg, const Dataset& data, std::uint64_t seed,
                  const Progress& progress = {});

Metrics evaluate(const MreModel& model, const Dataset& data, std::span<const std::size_t> indices,
                 F1Average average = F1Average::weighted, std::size_t batch_size = 256);

// Mean ce / l_rs / l_cnce / total over the given samples in eval mode.
EpochRecord evaluate_loss(const MreModel& model, const Dataset& data,
                          std::span<const std::size_t> indices, double lambda_rs,
                          double lambda_cnce, std::size_t batch_size = 256);

// One train() per configured seed, possibly in parallel; records keep seed order.
RunReport run_seeds(const TrainConfig& cfg, const Dataset& data, const Progress& progress = {});

// Recomputes the aggregates from the per-seed records.
RunReport summarize(TrainConfig cfg, std::vector<SeedRecord> runs);

nlohmann::json to_json(const RunReport& report);

}  // namespace mre
