#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "weirflow/nn/layers.hpp"
#include "weirflow/nn/optimizer.hpp"
#include "weirflow/nn/tensor.hpp"

namespace weirflow::nn {

/// Sequential stack of layers ending in a scalar output.
class Network {
public:
  /// Zero-valued parameters.
  Network(const std::vector<LayerSpec>& specs, Shape input_shape);

  /// Seeded Glorot-uniform weights and zero biases.
  static Network glorot(const std::vector<LayerSpec>& specs, Shape input_shape,
                        std::uint64_t seed);

  const Shape& input_shape() const noexcept { return input_shape_; }
  std::vector<LayerSpec> specs() const;
  std::vector<Layer>& layers() noexcept { return layers_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }

  /// Every parameter tensor in layer order.
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::size_t parameter_count() const;

  /// Batched forward pass [B, input...] -> [B, 1]; records are filled when given.
  Tensor forward(const Tensor& batch, std::vector<ActivationRecord>* records = nullptr) const;

  /// Backpropagates d(loss)/d(output) and returns gradients aligned with parameters().
  std::vector<Tensor> backward(const std::vector<ActivationRecord>& records,
                               const Tensor& grad_out) const;

  void save(std::ostream& out) const;
  static Network load(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static Network load(const std::filesystem::path& path);

  bool operator==(const Network& other) const;

private:
  Shape input_shape_;
  std::vector<Layer> layers_;
};

/// Mean squared error over a batch and its gradient with respect to the predictions.
double mse_loss(std::span<const double> predictions, std::span<const double> targets,
                std::span<double> grad = {});

struct TrainResult {
  Network net;
  std::vector<double> loss_trace; ///< sample-weighted mean batch loss per epoch
  std::uint64_t steps = 0;        ///< Adam steps taken
};

/// Minibatch Adam on MSE. `features` is [n, input...]; fully deterministic in config.seed.
TrainResult train(const std::vector<LayerSpec>& architecture, const Tensor& features,
                  std::span<const double> targets, const TrainConfig& config);

/// Same loop starting from an existing network.
TrainResult train(Network initial, const Tensor& features, std::span<const double> targets,
                  const TrainConfig& config);

/// Scalar prediction for one sample shaped like the network input.
double predict(const Network& net, const Tensor& sample);

/// Predictions for a batch [n, input...].
std::vector<double> predict_batch(const Network& net, const Tensor& batch);

} // namespace weirflow::nn
