#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mre/split.hpp"

namespace mre {

enum class F1Average { weighted, macro };

// Training hyperparameters. JSON keys are the field names; "lambda_sa" is
// accepted as an alias of "lambda_rs" (the objective names the relevance loss
// both ways).
struct TrainConfig {
  double learning_rate = 5e-5;
  double dropout = 0.2;
  std::size_t batch_size = 64;
  std::size_t epochs = 100;
  std::size_t d_model = 32;
  std::size_t rank = 4;
  double tau = 0.1;
  double lambda_rs = 1.0;
  double lambda_cnce = 1.0;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::size_t patience = 8;
  std::size_t head_hidden = 32;
  // Fused feature width; 0 means the class count (identity classifier).
  std::size_t fusion_out = 0;
  SplitRatios split{};
  std::uint64_t split_seed = 0;
  F1Average f1_average = F1Average::weighted;
  // Worker threads for multi-seed runs; 0 means hardware concurrency.
  std::size_t threads = 0;

  bool operator==(const TrainConfig&) const = default;
};

// Throws ConfigError on invalid values.
void validate(const TrainConfig& cfg);

nlohmann::json to_json(const TrainConfig& cfg);
// Unknown keys are rejected. Missing keys keep their defaults.
TrainConfig train_config_from_json(const nlohmann::json& j);
TrainConfig load_train_config(const std::string& path);

}  // namespace mre
