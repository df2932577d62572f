#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "weirflow/data_model.hpp"

namespace weirflow {

/// Deterministic k-way partition of [0, n).
class FoldPlan {
public:
  std::size_t k() const noexcept { return k_; }
  std::size_t size() const noexcept { return assignments_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Fold index of each sample.
  const std::vector<std::size_t>& assignments() const noexcept { return assignments_; }

  /// Sample indices of fold `i`, ascending.
  std::vector<std::size_t> fold(std::size_t i) const;
  std::vector<std::size_t> fold_sizes() const;

private:
  friend FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed);

  std::size_t k_ = 0;
  std::vector<std::size_t> assignments_;
  std::uint64_t seed_ = 0;
};

/// Seeded Fisher-Yates shuffle of [0, n) chunked into k contiguous blocks
/// whose sizes differ by at most one (larger blocks first).
FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed);

/// Index split of one cross-validation iteration; both lists ascending.
struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

FoldSplit fold_indices(const FoldPlan& plan, std::size_t i);

/// Read-only view of a dataset restricted to an index list.
class DatasetView {
public:
  DatasetView(const Dataset& data, std::vector<std::size_t> indices)
      : data_(&data), indices_(std::move(indices)) {}

  std::size_t size() const noexcept { return indices_.size(); }
  const WeirSample& operator[](std::size_t i) const { return (*data_)[indices_[i]]; }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  const Dataset& source() const noexcept { return *data_; }

  Dataset materialize() const { return data_->subset(indices_); }

private:
  const Dataset* data_;
  std::vector<std::size_t> indices_;
};

struct DatasetSplit {
  DatasetView train;
  DatasetView test;
};

/// Test = samples of fold i, train = the rest, both in dataset order.
DatasetSplit fold_split(const Dataset& dataset, const FoldPlan& plan, std::size_t i);

} // namespace weirflow
