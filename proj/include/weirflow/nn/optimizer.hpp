#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "weirflow/nn/tensor.hpp"

namespace weirflow::nn {

/// Training hyperparameters. Defaults follow the reference deep-learning setup.
struct TrainConfig {
  std::size_t epochs = 200;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  /// When false the loop runs forward/backward but never moves parameters.
  bool update_parameters = true;

  void validate() const;
};

/// First and second moment accumulators of Adam.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t t = 0;

  static AdamState zeros_like(const std::vector<Tensor*>& params);
};

/// One bias-corrected Adam update of every parameter tensor.
void adam_step(AdamState& state, const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads, const TrainConfig& config);

} // namespace weirflow::nn
