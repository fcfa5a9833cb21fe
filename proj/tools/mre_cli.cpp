// Command-line front end: synthetic data generation, training, evaluation,
// loss ablation and cross-modal consistency analysis.
//
// Exit codes: 0 success, 2 configuration/validation error, 3 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "mre/ablation.hpp"
#include "mre/checkpoint.hpp"
#include "mre/consistency.hpp"
#include "mre/dataset.hpp"
#include "mre/errors.hpp"
#include "mre/synth.hpp"
#include "mre/train.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw mre::ConfigError("cannot write " + path.string());
  out << text;
}

mre::Progress stderr_progress(bool verbose) {
  if (!verbose) return {};
  return [](const std::string& s) { std::cerr << s << '\n'; };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal relevance estimation: training and analysis tools"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Print per-epoch progress to stderr");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  std::string synth_out;
  mre::SynthConfig scfg;
  double p_irr = 0.3;
  std::size_t seq_len = 6;
  std::size_t feature_dim = 8;
  synth->add_option("--out", synth_out, "Output JSONL path")->required();
  synth->add_option("--n", scfg.n_samples, "Number of samples")->capture_default_str();
  synth->add_option("--classes", scfg.classes, "Number of classes")->capture_default_str();
  synth->add_option("--p-irr", p_irr, "Per-modality irrelevance probability")->capture_default_str();
  synth->add_option("--sigma", scfg.noise, "Gaussian noise std")->capture_default_str();
  synth->add_option("--separation", scfg.separation, "Prototype scale")->capture_default_str();
  synth->add_option("--seq-len", seq_len, "Timesteps per modality")->capture_default_str();
  synth->add_option("--dim", feature_dim, "Feature width per modality")->capture_default_str();
  synth->add_option("--seed", scfg.seed, "Generator seed")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Train on a dataset");
  std::string train_data, train_config, train_out, train_report;
  std::optional<std::uint64_t> train_seed;
  train->add_option("--data", train_data, "Dataset JSONL")->required();
  train->add_option("--config", train_config, "TrainConfig JSON")->required();
  train->add_option("--seed", train_seed, "Train only this seed");
  train->add_option("--out", train_out, "Checkpoint path for the first trained seed");
  train->add_option("--report", train_report, "Write the run report JSON here");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on one split");
  std::string eval_model, eval_data, eval_split = "test";
  eval->add_option("--model", eval_model, "Checkpoint path")->required();
  eval->add_option("--data", eval_data, "Dataset JSONL")->required();
  eval->add_option("--split", eval_split, "Split")
      ->check(CLI::IsMember({"train", "val", "test"}))
      ->capture_default_str();

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Run the four-way loss ablation");
  std::string ablate_data, ablate_config, ablate_out;
  ablate->add_option("--data", ablate_data, "Dataset JSONL")->required();
  ablate->add_option("--config", ablate_config, "TrainConfig JSON")->required();
  ablate->add_option("--out", ablate_out, "Output directory")->required();

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Cross-modal label consistency report");
  std::string analyze_data, analyze_out;
  std::optional<int> neutral;
  analyze->add_option("--data", analyze_data, "Dataset JSONL")->required();
  analyze->add_option("--out", analyze_out, "Output directory")->required();
  analyze->add_option("--neutral", neutral, "Class id excluded in the second statistic");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*synth) {
      scfg.p_irrelevant = {p_irr, p_irr, p_irr};
      scfg.seq_lengths = {seq_len, seq_len, seq_len};
      scfg.dims = {feature_dim, feature_dim, feature_dim};
      mre::save_dataset(synth_out, mre::synth_generate(scfg));
      std::cout << "wrote " << scfg.n_samples << " samples to " << synth_out << '\n';
    } else if (*train) {
      mre::TrainConfig cfg = mre::load_train_config(train_config);
      const mre::Dataset data = mre::load_dataset(train_data);
      if (train_seed) cfg.seeds = {*train_seed};
      std::vector<mre::SeedRecord> records;
      for (auto seed : cfg.seeds) {
        mre::TrainResult result = mre::train(cfg, data, seed, stderr_progress(verbose));
        std::cout << "seed " << seed << ": acc " << result.record.accuracy << " f1 "
                  << result.record.f1 << " (best epoch " << result.record.best_epoch << ")\n";
        if (records.empty() && !train_out.empty())
          mre::save_checkpoint(train_out, result.model, cfg);
        records.push_back(std::move(result.record));
      }
      const mre::RunReport report = mre::summarize(cfg, std::move(records));
      std::cout << "accuracy " << report.accuracy.mean << " ± " << report.accuracy.std << ", f1 "
                << report.f1.mean << " ± " << report.f1.std << '\n';
      if (!train_report.empty()) write_file(train_report, mre::to_json(report).dump(2) + "\n");
    } else if (*eval) {
      const mre::Checkpoint ckpt = mre::load_checkpoint(eval_model);
      const mre::Dataset data = mre::load_dataset(eval_data);
      if (data.manifest.dims != ckpt.model.config().input_dims ||
          data.manifest.classes != ckpt.model.config().classes)
        throw mre::ValidationError("dataset dimensions do not match the checkpoint");
      const mre::DataSplit split = mre::split_dataset(
          data.samples.size(), ckpt.train_config.split, ckpt.train_config.split_seed);
      const auto& idx = eval_split == "train" ? split.train
                        : eval_split == "val" ? split.val
                                              : split.test;
      const mre::Metrics m =
          mre::evaluate(ckpt.model, data, idx, ckpt.train_config.f1_average);
      std::cout << nlohmann::json{{"split", eval_split},
                                  {"n", idx.size()},
                                  {"accuracy", m.accuracy},
                                  {"f1", m.f1}}
                       .dump()
                << '\n';
    } else if (*ablate) {
      const mre::TrainConfig cfg = mre::load_train_config(ablate_config);
      const mre::Dataset data = mre::load_dataset(ablate_data);
      fs::create_directories(ablate_out);
      const auto rows = mre::ablation_run(cfg, data, stderr_progress(verbose));
      write_file(fs::path(ablate_out) / "ablation.csv", mre::ablation_csv(rows));
      const std::string table = mre::ablation_markdown(rows);
      write_file(fs::path(ablate_out) / "ablation.md", table);
      nlohmann::json j = nlohmann::json::array();
      for (const auto& r : rows)
        j.push_back({{"variant", r.variant.name}, {"report", mre::to_json(r.report)}});
      write_file(fs::path(ablate_out) / "ablation.json", j.dump(2) + "\n");
      std::cout << table;
    } else if (*analyze) {
      const mre::Dataset data = mre::load_dataset(analyze_data);
      fs::create_directories(analyze_out);
      const auto report = mre::relevance_report(data, neutral);
      const std::string text = mre::format_relevance_report(report);
      write_file(fs::path(analyze_out) / "relevance.txt", text);
      write_file(fs::path(analyze_out) / "relevance.json", mre::to_json(report).dump(2) + "\n");
      std::cout << text;
    }
  } catch (const mre::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const mre::DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const mre::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
