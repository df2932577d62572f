#include "weirflow/resampling.hpp"

#include <numeric>
#include <random>
#include <string>

#include "weirflow/errors.hpp"

namespace weirflow {

FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ArgumentError("make_folds: k must be >= 2, got " + std::to_string(k));
  if (k > n) {
    throw ArgumentError("make_folds: k = " + std::to_string(k) + " exceeds n = " +
                        std::to_string(n));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }

  FoldPlan plan;
  plan.k_ = k;
  plan.seed_ = seed;
  plan.assignments_.assign(n, 0);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    for (std::size_t j = 0; j < len; ++j) plan.assignments_[order[pos++]] = f;
  }
  return plan;
}

std::vector<std::size_t> FoldPlan::fold(std::size_t i) const {
  if (i >= k_) throw ArgumentError("fold index " + std::to_string(i) + " out of range");
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < assignments_.size(); ++s) {
    if (assignments_[s] == i) out.push_back(s);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(k_, 0);
  for (std::size_t f : assignments_) ++sizes[f];
  return sizes;
}

FoldSplit fold_indices(const FoldPlan& plan, std::size_t i) {
  if (i >= plan.k()) {
    throw ArgumentError("fold index " + std::to_string(i) + " out of range [0, " +
                        std::to_string(plan.k()) + ")");
  }
  FoldSplit split;
  const auto& a = plan.assignments();
  for (std::size_t s = 0; s < a.size(); ++s) {
    (a[s] == i ? split.test : split.train).push_back(s);
  }
  return split;
}

DatasetSplit fold_split(const Dataset& dataset, const FoldPlan& plan, std::size_t i) {
  if (plan.size() != dataset.size()) {
    throw ArgumentError("fold plan built for " + std::to_string(plan.size()) +
                        " samples, dataset has " + std::to_string(dataset.size()));
  }
  FoldSplit split = fold_indices(plan, i);
  return DatasetSplit{DatasetView(dataset, std::move(split.train)),
                      DatasetView(dataset, std::move(split.test))};
}

} // namespace weirflow
