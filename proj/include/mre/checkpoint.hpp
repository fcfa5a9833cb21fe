#pragma once

// Model checkpoints: one JSON document holding the version tag "mre-v1", the
// training and model configuration, and every parameter tensor with its name
// and shape.

#include <filesystem>
#include <string>

#include "mre/config.hpp"
#include "mre/model.hpp"

namespace mre {

inline constexpr const char* kCheckpointVersion = "mre-v1";

struct Checkpoint {
  TrainConfig train_config;
  MreModel model;
};

nlohmann::json checkpoint_json(const MreModel& model, const TrainConfig& cfg);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const MreModel& model,
                     const TrainConfig& cfg);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mre
