// Acceptance gate: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. Criteria may be selected by name, e.g.
//   acceptance AC1 AC4

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "mre/ablation.hpp"
#include "mre/consistency.hpp"
#include "mre/contrastive.hpp"
#include "mre/fusion.hpp"
#include "mre/gradcheck.hpp"
#include "mre/model.hpp"
#include "mre/synth.hpp"
#include "mre/train.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace mre;
using mre::test::random_tensor;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void randomize_biases(MreModel& model, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 0.3);
  for (auto& p : model.parameters())
    if (p.rank() == 1)
      for (auto& v : p.mutable_data()) v = dist(rng);
}

Outcome gradient_soundness() {
  SynthConfig sc;
  sc.n_samples = 4;
  sc.classes = 3;
  sc.dims = {4, 3, 5};
  sc.seq_lengths = {3, 2, 4};
  sc.seed = 21;
  const Dataset data = synth_generate(sc);
  std::vector<const InstanceBag*> batch;
  std::vector<int> labels;
  for (const auto& s : data.samples) {
    batch.push_back(&s);
    labels.push_back(s.label);
  }
  ModelConfig mc;
  mc.input_dims = data.manifest.dims;
  mc.classes = 3;
  mc.d_model = 6;
  mc.head_hidden = 6;
  mc.rank = 2;
  mc.temperature = 0.5;
  Rng rng(5);
  MreModel model(mc, rng);
  randomize_biases(model, rng);
  auto f = [&] { return model.loss(model.forward(batch), labels, 1.0, 1.0).total; };
  const double err = grad_check(f, model.parameters(), 1e-5);
  return {err < 1e-4, "max relative error " + fmt("%.3e", err) + " (< 1e-4)"};
}

std::vector<std::vector<oracle::Factor>> factors_of(const FusionParams& p) {
  std::vector<std::vector<oracle::Factor>> w(3);
  for (auto m : kModalities)
    for (std::size_t r = 0; r < p.rank; ++r) {
      Matrix f = p.factor(m, r);
      oracle::Factor rows(f.rows, std::vector<double>(f.cols));
      for (std::size_t o = 0; o < f.rows; ++o)
        for (std::size_t k = 0; k < f.cols; ++k) rows[o][k] = f(o, k);
      w[static_cast<std::size_t>(m)].push_back(rows);
    }
  return w;
}

std::vector<double> row(const Tensor& t, std::size_t i) {
  const std::size_t d = t.dim(1);
  return {t.data().begin() + i * d, t.data().begin() + (i + 1) * d};
}

Outcome fusion_oracle() {
  Rng rng(31);
  std::uniform_int_distribution<std::size_t> dim(1, 4), rank(1, 3), out(1, 3);
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const std::size_t d = dim(rng), r = rank(rng), d_out = out(rng);
    FusionParams p = FusionParams::init(d, r, d_out, d_out, rng);
    for (auto& v : p.bias.mutable_data()) v = std::normal_distribution<double>(0, 1)(rng);
    Tensor sv = random_tensor({3, d}, rng), sa = random_tensor({3, d}, rng),
           st = random_tensor({3, d}, rng);
    Tensor fused = low_rank_fuse(sv, sa, st, p);
    const auto w = factors_of(p);
    const std::vector<double> bias(p.bias.data().begin(), p.bias.data().end());
    for (std::size_t b = 0; b < 3; ++b) {
      const auto expected = oracle::full_tensor_fuse(w, bias, row(sv, b), row(sa, b), row(st, b));
      for (std::size_t o = 0; o < d_out; ++o)
        worst = std::max(worst, std::abs(fused[b * d_out + o] - expected[o]));
    }
  }
  return {worst < 1e-10, "max abs deviation " + fmt("%.3e", worst) + " over 100 draws (< 1e-10)"};
}

Outcome cnce_oracle() {
  Rng rng(41);
  std::uniform_int_distribution<std::size_t> size(1, 4), dim(2, 5);
  std::uniform_real_distribution<double> tau(0.05, 2.0);
  double worst = 0.0;
  int single_class = 0, singletons = 0;
  for (int draw = 0; draw < 50; ++draw) {
    const std::size_t b = draw % 5 < 2 ? 2 + draw % 3 : size(rng);
    const std::size_t d = dim(rng);
    std::vector<int> labels(b);
    if (draw % 5 == 0) {
      std::fill(labels.begin(), labels.end(), 1);
    } else if (draw % 5 == 1) {
      for (std::size_t i = 0; i < b; ++i) labels[i] = static_cast<int>(i);
    } else {
      std::uniform_int_distribution<int> cls(0, 2);
      for (auto& l : labels) l = cls(rng);
    }
    std::set<int> distinct(labels.begin(), labels.end());
    single_class += distinct.size() == 1;
    singletons += distinct.size() == b;
    ContrastiveBatch batch{random_tensor({b, d}, rng), random_tensor({b, d}, rng),
                           random_tensor({b, d}, rng), labels, tau(rng)};
    auto rows_of = [](const Tensor& t) {
      oracle::Rows out;
      for (std::size_t i = 0; i < t.dim(0); ++i) out.push_back(row(t, i));
      return out;
    };
    const double expected = oracle::cnce(rows_of(batch.vision), rows_of(batch.audio),
                                         rows_of(batch.text), labels, batch.temperature);
    worst = std::max(worst, std::abs(cnce_loss(batch).item() - expected));
  }
  return {worst < 1e-10 && single_class > 0 && singletons > 0,
          "max abs deviation " + fmt("%.3e", worst) + " over 50 draws (< 1e-10), " +
              std::to_string(single_class) + " single-class, " + std::to_string(singletons) +
              " all-singleton"};
}

Outcome simplex_suite() {
  SynthConfig sc;
  sc.n_samples = 64;
  sc.classes = 4;
  sc.dims = {5, 4, 3};
  sc.seq_lengths = {3, 4, 2};
  sc.seed = 51;
  const Dataset data = synth_generate(sc);
  ModelConfig mc;
  mc.input_dims = data.manifest.dims;
  mc.classes = 4;
  mc.d_model = 8;
  mc.head_hidden = 8;
  mc.rank = 2;
  Rng rng(52);
  std::uniform_int_distribution<std::size_t> pick(0, data.samples.size() - 1);
  double worst = 0.0;
  bool in_range = true;
  std::optional<MreModel> model;
  for (int pass = 0; pass < 1000; ++pass) {
    if (pass % 50 == 0) model.emplace(mc, rng);
    std::vector<const InstanceBag*> batch;
    for (int i = 0; i < 4; ++i) batch.push_back(&data.samples[pick(rng)]);
    ForwardResult out = model->forward(batch);
    Tensor scores = attention_scores(out.pooled);
    for (std::size_t r = 0; r < scores.numel() / 3; ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        s += scores[r * 3 + j];
        in_range = in_range && scores[r * 3 + j] >= 0.0;
      }
      worst = std::max(worst, std::abs(s - 1.0));
    }
    for (std::size_t b = 0; b < batch.size(); ++b) {
      double s = 0.0;
      for (std::size_t m = 0; m < 3; ++m) {
        const double h = out.weights[b * 3 + m];
        s += h;
        in_range = in_range && h >= 0.0 && h <= 1.0;
      }
      worst = std::max(worst, std::abs(s - 1.0));
    }
  }
  return {worst < 1e-9 && in_range,
          "max |row sum - 1| " + fmt("%.3e", worst) + " over 1000 forward passes (< 1e-9)"};
}

Outcome rs_closed_forms() {
  const std::vector<int> labels = {0, 1, 1};
  CategoryEstimates halves{Tensor({3, 3, 2}), Tensor({3, 2})};
  const double five_ln2 = 5.0 * std::log(2.0);
  const double uniform =
      relevant_semantic_loss(halves, Tensor::full({3, 3}, 1.0 / 3.0), labels).item();
  const double onehot =
      relevant_semantic_loss(halves, Tensor({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1}), labels).item();
  const double err_closed = std::max(std::abs(uniform - five_ln2), std::abs(onehot - five_ln2));

  // Equal per-modality cross-entropies: L_rs = 4 CE + CE_mm for every h.
  Rng rng(61);
  double err_invariant = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Tensor logits = random_tensor({1, 4}, rng);
    std::vector<double> stacked;
    for (int m = 0; m < 3; ++m) stacked.insert(stacked.end(), logits.data().begin(), logits.data().end());
    Tensor mm = random_tensor({1, 4}, rng);
    const std::vector<int> y = {2};
    CategoryEstimates est{Tensor({1, 3, 4}, stacked), mm};
    Tensor h = row_softmax(random_tensor({1, 3}, rng, 3.0));
    const double ce = -row_log_softmax(logits)[2];
    const double ce_mm = -row_log_softmax(mm)[2];
    err_invariant = std::max(
        err_invariant, std::abs(relevant_semantic_loss(est, h, y).item() - (4 * ce + ce_mm)));
  }
  return {err_closed < 1e-9 && err_invariant < 1e-9,
          "5ln2 deviation " + fmt("%.3e", err_closed) + ", invariance deviation " +
              fmt("%.3e", err_invariant) + " (< 1e-9)"};
}

// Desk-scale ablation settings. The paper's learning rate is tuned for its
// pretrained features; on raw synthetic features it converges too slowly for
// the 100-epoch budget, so the gate trains faster.
TrainConfig ablation_config() {
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.seeds = {0, 1, 2, 3, 4};
  cfg.threads = 1;
  return cfg;
}

Outcome ablation_direction() {
  const Dataset data = synth_generate(SynthConfig{});
  const auto rows = ablation_run(ablation_config(), data);
  const double base = 100.0 * rows[0].report.accuracy.mean;
  const double rs = 100.0 * rows[1].report.accuracy.mean;
  const double cnce = 100.0 * rows[2].report.accuracy.mean;
  const double both = 100.0 * rows[3].report.accuracy.mean;
  const bool pass = both - base >= 1.0 && rs >= base - 0.5 && cnce >= base - 0.5;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "acc%% Baseline %.2f, L_rs %.2f, L_cnce %.2f, both %.2f; both - Baseline %+.2f "
                "(>= 1.0), singles - Baseline %+.2f / %+.2f (>= -0.5)",
                base, rs, cnce, both, both - base, rs - base, cnce - base);
  return {pass, buf};
}

Outcome determinism() {
  const Dataset data = synth_generate(SynthConfig{});
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.epochs = 4;
  cfg.seeds = {7};
  const RunReport a = run_seeds(cfg, data);
  const RunReport b = run_seeds(cfg, data);
  const bool same = a == b && to_json(a).dump() == to_json(b).dump();
  return {same, same ? "two runs produced identical reports" : "reports differ"};
}

Outcome consistency_analyzer() {
  SynthConfig sc;
  sc.n_samples = 10000;
  const RelevanceReport r = relevance_report(synth_generate(sc));
  bool pass = true;
  std::string detail;
  for (const auto& m : r.modalities) {
    std::size_t trace = 0, total = 0;
    for (std::size_t i = 0; i < m.counts.size(); ++i)
      for (std::size_t j = 0; j < m.counts[i].size(); ++j) {
        total += m.counts[i][j];
        if (i == j) trace += m.counts[i][j];
      }
    const bool identity = m.consistency && total == m.labelled &&
                          *m.consistency == static_cast<double>(trace) / static_cast<double>(total);
    const bool within = m.consistency && std::abs(*m.consistency - 0.70) <= 0.02;
    pass = pass && identity && within;
    detail += std::string(detail.empty() ? "" : ", ") + modality_name(m.modality) + " " +
              fmt("%.4f", m.consistency.value_or(-1)) + (identity ? "" : " (trace mismatch)");
  }
  return {pass, detail + " (0.70 +- 0.02, trace/total exact)"};
}

struct Criterion {
  const char* id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"AC1", "gradient soundness", 30, gradient_soundness},
      {"AC2", "fusion oracle equivalence", 5, fusion_oracle},
      {"AC3", "CNCE oracle equivalence", 5, cnce_oracle},
      {"AC4", "simplex/normalization suite", 0, simplex_suite},
      {"AC5", "L_rs closed forms", 0, rs_closed_forms},
      {"AC6", "synthetic ablation direction", 900, ablation_direction},
      {"AC7", "determinism", 0, determinism},
      {"AC8", "consistency analyzer", 0, consistency_analyzer},
  };
  std::set<std::string> selected(argv + 1, argv + argc);

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt("%.2f s", secs);
    if (c.budget_seconds > 0) {
      timing += fmt(" (< %.0f s)", c.budget_seconds);
      if (secs >= c.budget_seconds) o.pass = false;
    }
    std::printf("%s %s %s: %s; %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
