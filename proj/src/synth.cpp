#include "mre/synth.hpp"

#include <random>
#include <string>

#include "mre/errors.hpp"

namespace mre {

void validate(const SynthConfig& cfg) {
  if (cfg.n_samples == 0) throw ContractError("synth: n_samples must be positive");
  if (cfg.classes < 1) throw ContractError("synth: need at least one class");
  for (std::size_t m = 0; m < kModalityCount; ++m) {
    const double p = cfg.p_irrelevant[m];
    if (!(p >= 0.0 && p <= 1.0)) throw ContractError("synth: p_irrelevant must lie in [0, 1]");
    if (p > 0.0 && cfg.classes < 2)
      throw ContractError("synth: p_irrelevant > 0 needs at least two classes");
    if (cfg.dims[m] == 0 || cfg.seq_lengths[m] == 0)
      throw ContractError("synth: dims and sequence lengths must be positive");
  }
  if (!(cfg.noise >= 0.0)) throw ContractError("synth: noise must be non-negative");
  if (!(cfg.separation >= 0.0)) throw ContractError("synth: separation must be non-negative");
}

Dataset synth_generate(const SynthConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  // prototypes[m][c] is a dims[m]-vector.
  std::array<std::vector<std::vector<double>>, kModalityCount> prototypes;
  for (std::size_t m = 0; m < kModalityCount; ++m) {
    prototypes[m].resize(cfg.classes);
    for (auto& proto : prototypes[m]) {
      proto.resize(cfg.dims[m]);
      for (auto& v : proto) v = cfg.separation * unit(rng);
    }
  }

  std::uniform_int_distribution<int> pick_class(0, static_cast<int>(cfg.classes) - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Dataset data;
  data.samples.reserve(cfg.n_samples);
  for (std::size_t i = 0; i < cfg.n_samples; ++i) {
    InstanceBag bag;
    bag.id = "s" + std::to_string(i);
    bag.label = pick_class(rng);
    std::array<std::optional<int>*, kModalityCount> labels{&bag.label_v, &bag.label_a,
                                                           &bag.label_t};
    std::array<Matrix*, kModalityCount> features{&bag.vision, &bag.audio, &bag.text};
    for (std::size_t m = 0; m < kModalityCount; ++m) {
      int shown = bag.label;
      if (coin(rng) < cfg.p_irrelevant[m]) {
        // Uniform over the C - 1 other classes.
        std::uniform_int_distribution<int> other(0, static_cast<int>(cfg.classes) - 2);
        shown = other(rng);
        if (shown >= bag.label) ++shown;
      }
      *labels[m] = shown;
      Matrix& f = *features[m];
      f.rows = cfg.seq_lengths[m];
      f.cols = cfg.dims[m];
      f.values.resize(f.rows * f.cols);
      const auto& proto = prototypes[m][static_cast<std::size_t>(shown)];
      for (std::size_t r = 0; r < f.rows; ++r)
        for (std::size_t c = 0; c < f.cols; ++c) f(r, c) = proto[c] + cfg.noise * unit(rng);
    }
    data.samples.push_back(std::move(bag));
  }
  data.manifest.n = cfg.n_samples;
  data.manifest.classes = cfg.classes;
  data.manifest.dims = cfg.dims;
  return data;
}

}  // namespace mre
