#include "mre/config.hpp"

#include <fstream>
#include <set>

#include "mre/errors.hpp"

namespace mre {

using nlohmann::json;

namespace {

template <typename T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key \"") + key + "\": " + e.what());
  }
}

std::size_t get_count(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(std::string("config key \"") + key + "\" must be a non-negative integer");
  return v.get<std::size_t>();
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (cfg.epochs == 0) throw ConfigError("epochs must be positive");
  if (cfg.d_model == 0 || cfg.rank == 0 || cfg.head_hidden == 0)
    throw ConfigError("d_model, rank and head_hidden must be positive");
  if (!(cfg.tau > 0.0)) throw ConfigError("tau must be positive");
  if (!(cfg.lambda_rs >= 0.0) || !(cfg.lambda_cnce >= 0.0))
    throw ConfigError("loss coefficients must be non-negative");
  if (cfg.seeds.empty()) throw ConfigError("seeds must not be empty");
  if (cfg.patience == 0) throw ConfigError("patience must be positive");
}

json to_json(const TrainConfig& cfg) {
  return json{{"learning_rate", cfg.learning_rate},
              {"dropout", cfg.dropout},
              {"batch_size", cfg.batch_size},
              {"epochs", cfg.epochs},
              {"d_model", cfg.d_model},
              {"rank", cfg.rank},
              {"tau", cfg.tau},
              {"lambda_rs", cfg.lambda_rs},
              {"lambda_cnce", cfg.lambda_cnce},
              {"seeds", cfg.seeds},
              {"patience", cfg.patience},
              {"head_hidden", cfg.head_hidden},
              {"fusion_out", cfg.fusion_out},
              {"split", {cfg.split.train, cfg.split.val, cfg.split.test}},
              {"split_seed", cfg.split_seed},
              {"f1_average", cfg.f1_average == F1Average::weighted ? "weighted" : "macro"},
              {"threads", cfg.threads}};
}

TrainConfig train_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "learning_rate", "dropout",     "batch_size", "epochs",     "d_model",    "rank",
      "tau",           "lambda_rs",   "lambda_sa",  "lambda_cnce", "seeds",     "patience",
      "head_hidden",   "fusion_out",  "split",      "split_seed", "f1_average", "threads"};
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw ConfigError("unknown config key \"" + key + "\"");
  if (j.contains("lambda_rs") && j.contains("lambda_sa"))
    throw ConfigError("set only one of \"lambda_rs\" and its alias \"lambda_sa\"");

  TrainConfig cfg;
  if (j.contains("learning_rate")) cfg.learning_rate = get_field<double>(j, "learning_rate");
  if (j.contains("dropout")) cfg.dropout = get_field<double>(j, "dropout");
  if (j.contains("batch_size")) cfg.batch_size = get_count(j, "batch_size");
  if (j.contains("epochs")) cfg.epochs = get_count(j, "epochs");
  if (j.contains("d_model")) cfg.d_model = get_count(j, "d_model");
  if (j.contains("rank")) cfg.rank = get_count(j, "rank");
  if (j.contains("tau")) cfg.tau = get_field<double>(j, "tau");
  if (j.contains("lambda_rs")) cfg.lambda_rs = get_field<double>(j, "lambda_rs");
  if (j.contains("lambda_sa")) cfg.lambda_rs = get_field<double>(j, "lambda_sa");
  if (j.contains("lambda_cnce")) cfg.lambda_cnce = get_field<double>(j, "lambda_cnce");
  if (j.contains("seeds")) cfg.seeds = get_field<std::vector<std::uint64_t>>(j, "seeds");
  if (j.contains("patience")) cfg.patience = get_count(j, "patience");
  if (j.contains("head_hidden")) cfg.head_hidden = get_count(j, "head_hidden");
  if (j.contains("fusion_out")) cfg.fusion_out = get_count(j, "fusion_out");
  if (j.contains("split")) {
    auto r = get_field<std::vector<double>>(j, "split");
    if (r.size() != 3) throw ConfigError("\"split\" must hold three ratios");
    cfg.split = SplitRatios{r[0], r[1], r[2]};
  }
  if (j.contains("split_seed")) cfg.split_seed = get_field<std::uint64_t>(j, "split_seed");
  if (j.contains("f1_average")) {
    const auto mode = get_field<std::string>(j, "f1_average");
    if (mode == "weighted")
      cfg.f1_average = F1Average::weighted;
    else if (mode == "macro")
      cfg.f1_average = F1Average::macro;
    else
      throw ConfigError("\"f1_average\" must be \"weighted\" or \"macro\"");
  }
  if (j.contains("threads")) cfg.threads = get_count(j, "threads");
  validate(cfg);
  return cfg;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return train_config_from_json(j);
}

}  // namespace mre
