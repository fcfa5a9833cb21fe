#include "mre/checkpoint.hpp"

#include <fstream>

#include "mre/errors.hpp"

namespace mre {

using nlohmann::json;

json checkpoint_json(const MreModel& model, const TrainConfig& cfg) {
  const ModelConfig& mc = model.config();
  json params = json::array();
  for (const auto& [name, t] : model.named_parameters())
    params.push_back({{"name", name},
                      {"shape", t.shape()},
                      {"data", std::vector<double>(t.data().begin(), t.data().end())}});
  return json{{"version", kCheckpointVersion},
              {"train_config", to_json(cfg)},
              {"model_config",
               {{"input_dims", mc.input_dims},
                {"classes", mc.classes},
                {"d_model", mc.d_model},
                {"head_hidden", mc.head_hidden},
                {"rank", mc.rank},
                {"fusion_out", mc.fusion_out},
                {"temperature", mc.temperature}}},
              {"parameters", params}};
}

Checkpoint checkpoint_from_json(const json& j) {
  try {
    if (j.at("version").get<std::string>() != kCheckpointVersion)
      throw ParseError("checkpoint version is not " + std::string(kCheckpointVersion));
    TrainConfig cfg = train_config_from_json(j.at("train_config"));
    const json& m = j.at("model_config");
    ModelConfig mc;
    mc.input_dims = m.at("input_dims").get<std::array<std::size_t, kModalityCount>>();
    mc.classes = m.at("classes").get<std::size_t>();
    mc.d_model = m.at("d_model").get<std::size_t>();
    mc.head_hidden = m.at("head_hidden").get<std::size_t>();
    mc.rank = m.at("rank").get<std::size_t>();
    mc.fusion_out = m.at("fusion_out").get<std::size_t>();
    mc.temperature = m.at("temperature").get<double>();

    Rng rng(0);
    MreModel model(mc, rng);
    auto named = model.named_parameters();
    const json& stored = j.at("parameters");
    if (stored.size() != named.size())
      throw ParseError("checkpoint holds " + std::to_string(stored.size()) + " tensors, model has " +
                       std::to_string(named.size()));
    for (std::size_t i = 0; i < named.size(); ++i) {
      auto& [name, tensor] = named[i];
      const json& entry = stored[i];
      if (entry.at("name").get<std::string>() != name)
        throw ParseError("checkpoint tensor " + std::to_string(i) + " is \"" +
                         entry.at("name").get<std::string>() + "\", expected \"" + name + "\"");
      if (entry.at("shape").get<Shape>() != tensor.shape())
        throw ParseError("checkpoint tensor \"" + name + "\" has the wrong shape");
      auto values = entry.at("data").get<std::vector<double>>();
      if (values.size() != tensor.numel())
        throw ParseError("checkpoint tensor \"" + name + "\" has the wrong length");
      std::copy(values.begin(), values.end(), tensor.mutable_data().begin());
    }
    return Checkpoint{std::move(cfg), std::move(model)};
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const MreModel& model,
                     const TrainConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint " + path.string());
  out << checkpoint_json(model, cfg).dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace mre
