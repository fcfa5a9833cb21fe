#include "mre/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mre/errors.hpp"

namespace mre {

DataSplit split_dataset(std::size_t n, const SplitRatios& ratios, std::uint64_t seed) {
  for (double r : {ratios.train, ratios.val, ratios.test})
    if (!(r >= 0.0)) throw ConfigError("split ratios must be non-negative");
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9)
    throw ConfigError("split ratios must sum to 1");
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.train));
  const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.val));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n)
    throw ConfigError("split of " + std::to_string(n) + " samples leaves an empty split");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  DataSplit split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                   order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return split;
}

Batches make_batches(std::span<const std::size_t> indices, std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  Batches out;
  for (std::size_t i = 0; i < indices.size(); i += batch_size) {
    const std::size_t end = std::min(indices.size(), i + batch_size);
    out.emplace_back(indices.begin() + static_cast<std::ptrdiff_t>(i),
                     indices.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

BatchStream::BatchStream(DataSplit split, std::size_t batch_size, std::uint64_t seed)
    : split_(std::move(split)), batch_size_(batch_size), seed_(seed) {
  if (batch_size_ == 0) throw ConfigError("batch size must be positive");
}

Batches BatchStream::train_epoch(std::size_t epoch) const {
  std::vector<std::size_t> order = split_.train;
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(epoch)};
  std::mt19937_64 rng(seq);
  std::shuffle(order.begin(), order.end(), rng);
  return make_batches(order, batch_size_);
}

}  // namespace mre
