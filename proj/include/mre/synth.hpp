#pragma once

// Synthetic multimodal data with controllable modality-irrelevant semantics.
//
// Every class owns one prototype vector per modality. For a sample with bag
// label y, each modality independently shows a uniformly drawn other class
// with probability p_irrelevant (recorded as that modality's label) and y
// otherwise. Each timestep row is the shown class's prototype plus Gaussian
// noise.

#include <array>
#include <cstdint>

#include "mre/dataset.hpp"

namespace mre {

struct SynthConfig {
  std::size_t n_samples = 2000;
  std::size_t classes = 5;
  std::array<std::size_t, kModalityCount> dims{8, 8, 8};
  std::array<std::size_t, kModalityCount> seq_lengths{6, 6, 6};
  // Prototype coordinates are drawn from N(0, separation^2).
  double separation = 1.0;
  double noise = 0.5;
  std::array<double, kModalityCount> p_irrelevant{0.3, 0.3, 0.3};
  std::uint64_t seed = 0;
};

void validate(const SynthConfig& cfg);

Dataset synth_generate(const SynthConfig& cfg);

}  // namespace mre
