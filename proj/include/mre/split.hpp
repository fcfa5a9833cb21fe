#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mre {

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  bool operator==(const SplitRatios&) const = default;
};

struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

using Batches = std::vector<std::vector<std::size_t>>;

// Seeded shuffle of [0, n) cut into contiguous train/val/test ranges of sizes
// round(n * train), round(n * val) and the remainder. Throws ConfigError when
// ratios do not sum to 1 or a split would be empty.
DataSplit split_dataset(std::size_t n, const SplitRatios& ratios, std::uint64_t seed);

// Consecutive batches of at most batch_size indices, in the given order.
Batches make_batches(std::span<const std::size_t> indices, std::size_t batch_size);

// Deterministic per-epoch reshuffle of the training split, then batching.
class BatchStream {
 public:
  BatchStream(DataSplit split, std::size_t batch_size, std::uint64_t seed);

  const DataSplit& split() const { return split_; }
  Batches train_epoch(std::size_t epoch) const;
  Batches val_batches() const { return make_batches(split_.val, batch_size_); }
  Batches test_batches() const { return make_batches(split_.test, batch_size_); }

 private:
  DataSplit split_;
  std::size_t batch_size_;
  std::uint64_t seed_;
};

}  // namespace mre
