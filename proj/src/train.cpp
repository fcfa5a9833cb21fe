#include "mre/train.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "mre/errors.hpp"
#include "mre/optim.hpp"
#include "mre/split.hpp"

namespace mre {

namespace {

std::vector<const InstanceBag*> gather(const Dataset& data, std::span<const std::size_t> idx) {
  std::vector<const InstanceBag*> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(&data.samples[i]);
  return out;
}

std::vector<int> labels_of(std::span<const InstanceBag* const> batch) {
  std::vector<int> out;
  out.reserve(batch.size());
  for (const auto* b : batch) out.push_back(b->label);
  return out;
}

std::vector<std::vector<double>> snapshot(const std::vector<Tensor>& params) {
  std::vector<std::vector<double>> out;
  out.reserve(params.size());
  for (const auto& p : params) out.emplace_back(p.data().begin(), p.data().end());
  return out;
}

void restore(std::vector<Tensor>& params, const std::vector<std::vector<double>>& values) {
  for (std::size_t i = 0; i < params.size(); ++i)
    std::copy(values[i].begin(), values[i].end(), params[i].mutable_data().begin());
}

}  // namespace

Metrics evaluate(const MreModel& model, const Dataset& data, std::span<const std::size_t> indices,
                 F1Average average, std::size_t batch_size) {
  if (indices.empty()) throw ContractError("evaluate on an empty split");
  std::vector<int> predicted, truth;
  for (const auto& batch : make_batches(indices, batch_size)) {
    auto bags = gather(data, batch);
    auto p = model.predict(bags);
    predicted.insert(predicted.end(), p.begin(), p.end());
    for (const auto* b : bags) truth.push_back(b->label);
  }
  return classification_metrics(predicted, truth, model.config().classes, average);
}

EpochRecord evaluate_loss(const MreModel& model, const Dataset& data,
                          std::span<const std::size_t> indices, double lambda_rs,
                          double lambda_cnce, std::size_t batch_size) {
  if (indices.empty()) throw ContractError("evaluate_loss on an empty split");
  EpochRecord rec;
  double weight_total = 0.0;
  for (const auto& batch : make_batches(indices, batch_size)) {
    auto bags = gather(data, batch);
    auto labels = labels_of(bags);
    LossBundle loss = model.loss(model.forward(bags), labels, lambda_rs, lambda_cnce);
    const double w = static_cast<double>(batch.size());
    rec.ce += w * loss.ce.item();
    rec.l_rs += w * loss.l_rs.item();
    rec.l_cnce += w * loss.l_cnce.item();
    rec.total += w * loss.total.item();
    weight_total += w;
  }
  rec.ce /= weight_total;
  rec.l_rs /= weight_total;
  rec.l_cnce /= weight_total;
  rec.total /= weight_total;
  return rec;
}

TrainResult train(const TrainConfig& cfg, const Dataset& data, std::uint64_t seed,
                  const Progress& progress) {
  validate(cfg);
  if (data.manifest.classes < 2) throw ContractError("training needs at least two classes");
  const DataSplit split = split_dataset(data.samples.size(), cfg.split, cfg.split_seed);
  const BatchStream stream(split, cfg.batch_size, seed);

  Rng init_rng(seed);
  MreModel model(ModelConfig::from(cfg, data.manifest), init_rng);
  std::vector<Tensor> params = model.parameters();
  Rng dropout_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const ForwardMode train_mode{true, 1.0 - cfg.dropout, &dropout_rng};
  AdamState adam(cfg.learning_rate);

  SeedRecord record;
  record.seed = seed;
  double best_val = -1.0;
  std::size_t since_best = 0;
  std::vector<std::vector<double>> best_params = snapshot(params);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    const Batches batches = stream.train_epoch(epoch);
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      auto bags = gather(data, batches[bi]);
      auto labels = labels_of(bags);
      LossBundle loss =
          model.loss(model.forward(bags, train_mode), labels, cfg.lambda_rs, cfg.lambda_cnce);
      const double total = loss.total.item();
      if (!std::isfinite(total))
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(bi));
      for (auto& p : params) p.zero_grad();
      loss.total.backward();
      adam_step(params, adam);
      rec.ce += loss.ce.item();
      rec.l_rs += loss.l_rs.item();
      rec.l_cnce += loss.l_cnce.item();
      rec.total += total;
    }
    const double nb = static_cast<double>(batches.size());
    rec.ce /= nb;
    rec.l_rs /= nb;
    rec.l_cnce /= nb;
    rec.total /= nb;
    rec.val_accuracy = evaluate(model, data, split.val, cfg.f1_average).accuracy;
    record.epochs.push_back(rec);
    if (progress)
      progress("seed " + std::to_string(seed) + " epoch " + std::to_string(epoch) + " loss " +
               std::to_string(rec.total) + " val_acc " + std::to_string(rec.val_accuracy));

    if (rec.val_accuracy > best_val) {
      best_val = rec.val_accuracy;
      record.best_epoch = epoch;
      best_params = snapshot(params);
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }

  restore(params, best_params);
  const Metrics test = evaluate(model, data, split.test, cfg.f1_average);
  record.accuracy = test.accuracy;
  record.f1 = test.f1;
  record.val_accuracy = best_val;
  return TrainResult{std::move(model), std::move(record)};
}

RunReport summarize(TrainConfig cfg, std::vector<SeedRecord> runs) {
  RunReport report;
  report.config = std::move(cfg);
  report.runs = std::move(runs);
  std::vector<double> acc, f1;
  for (const auto& r : report.runs) {
    acc.push_back(r.accuracy);
    f1.push_back(r.f1);
  }
  report.accuracy = aggregate(acc);
  report.f1 = aggregate(f1);
  return report;
}

RunReport run_seeds(const TrainConfig& cfg, const Dataset& data, const Progress& progress) {
  validate(cfg);
  const std::size_t n = cfg.seeds.size();
  std::vector<SeedRecord> records(n);
  std::size_t workers = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, n);

  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) records[i] = train(cfg, data, cfg.seeds[i], progress).record;
    return summarize(cfg, std::move(records));
  }

  // Each run owns its model, optimizer and rngs; only the result slot and the
  // progress callback are shared.
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr failure;
  Progress locked = progress ? Progress([&](const std::string& s) {
    std::lock_guard lock(mu);
    progress(s);
  })
                             : Progress{};
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next >= n || failure) return;
        i = next++;
      }
      try {
        SeedRecord r = train(cfg, data, cfg.seeds[i], locked).record;
        std::lock_guard lock(mu);
        records[i] = std::move(r);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return summarize(cfg, std::move(records));
}

nlohmann::json to_json(const RunReport& report) {
  using nlohmann::json;
  json runs = json::array();
  for (const auto& r : report.runs) {
    json epochs = json::array();
    for (const auto& e : r.epochs)
      epochs.push_back({{"epoch", e.epoch},
                        {"ce", e.ce},
                        {"l_rs", e.l_rs},
                        {"l_cnce", e.l_cnce},
                        {"total", e.total},
                        {"val_accuracy", e.val_accuracy}});
    runs.push_back({{"seed", r.seed},
                    {"accuracy", r.accuracy},
                    {"f1", r.f1},
                    {"val_accuracy", r.val_accuracy},
                    {"best_epoch", r.best_epoch},
                    {"epochs", epochs}});
  }
  return json{{"config", to_json(report.config)},
              {"runs", runs},
              {"accuracy", {{"mean", report.accuracy.mean}, {"std", report.accuracy.std}}},
              {"f1", {{"mean", report.f1.mean}, {"std", report.f1.std}}}};
}

}  // namespace mre
