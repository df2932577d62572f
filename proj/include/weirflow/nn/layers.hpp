#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "weirflow/nn/tensor.hpp"

namespace weirflow::nn {

enum class LayerKind { Dense, Conv1d, Lstm, Gru, Relu };

std::string_view to_string(LayerKind kind);
LayerKind parse_layer_kind(std::string_view token);

struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  std::size_t units = 0;  ///< neurons for dense/recurrent, filters for conv1d
  std::size_t kernel = 0; ///< conv1d only
  bool returns_sequence = false;

  static LayerSpec dense(std::size_t units) { return {LayerKind::Dense, units, 0, false}; }
  static LayerSpec conv1d(std::size_t filters, std::size_t kernel) {
    return {LayerKind::Conv1d, filters, kernel, false};
  }
  static LayerSpec lstm(std::size_t units, bool returns_sequence) {
    return {LayerKind::Lstm, units, 0, returns_sequence};
  }
  static LayerSpec gru(std::size_t units, bool returns_sequence) {
    return {LayerKind::Gru, units, 0, returns_sequence};
  }
  static LayerSpec relu() { return {LayerKind::Relu, 0, 0, false}; }

  /// Throws ArgumentError when units/filters/kernel are out of range.
  void validate() const;

  bool operator==(const LayerSpec&) const = default;
};

/// Intermediate values kept by a forward pass for exact backpropagation.
struct ActivationRecord {
  Tensor input;              ///< batched input [B, ...]
  Tensor output;             ///< batched output [B, ...]
  std::vector<RowMat> gates; ///< recurrent: activated gates per step
  std::vector<RowMat> cells; ///< lstm: c_0..c_T
  std::vector<RowMat> hidden;///< recurrent: h_0..h_T
  std::vector<RowMat> aux;   ///< lstm: tanh(c_t); gru: r_t * h_{t-1}
  bool batched = true;
};

/// One layer with its parameters.
///
/// Parameter layout (row-major):
///   dense   W [units, in_features], b [units]
///   conv1d  K [filters, kernel, in_channels], b [filters]
///   lstm    Wx [4U, C], Wh [4U, U], b [4U]   gate order i, f, g, o
///   gru     Wx [3U, C], Wh [3U, U], b [3U]   gate order z, r, n
///
/// GRU update: h' = z * h + (1 - z) * n with n = tanh(Wx_n x + Wh_n (r * h) + b_n).
class Layer {
public:
  /// Layer with zero-valued parameters for a per-sample input shape.
  Layer(LayerSpec spec, Shape input_shape);

  const LayerSpec& spec() const noexcept { return spec_; }
  const Shape& input_shape() const noexcept { return input_shape_; }
  const Shape& output_shape() const noexcept { return output_shape_; }

  std::vector<Tensor>& params() noexcept { return params_; }
  const std::vector<Tensor>& params() const noexcept { return params_; }
  std::size_t parameter_count() const;

  /// Glorot-uniform weights, zero biases.
  void init_glorot(std::mt19937_64& rng);

  /// Batched forward pass: input [B, input_shape...] -> [B, output_shape...].
  Tensor forward(const Tensor& input, ActivationRecord* record = nullptr) const;

  /// Batched backward pass. Parameter gradients are added into `grad_params`,
  /// which must be shaped like params().
  Tensor backward(const ActivationRecord& record, const Tensor& grad_out,
                  std::vector<Tensor>& grad_params) const;

  std::vector<Tensor> zero_gradients() const;

private:
  Tensor forward_dense(const Tensor& in, ActivationRecord* rec) const;
  Tensor forward_conv(const Tensor& in, ActivationRecord* rec) const;
  Tensor forward_lstm(const Tensor& in, ActivationRecord* rec) const;
  Tensor forward_gru(const Tensor& in, ActivationRecord* rec) const;
  Tensor forward_relu(const Tensor& in, ActivationRecord* rec) const;

  Tensor backward_dense(const ActivationRecord& rec, const Tensor& g, std::vector<Tensor>& gp) const;
  Tensor backward_conv(const ActivationRecord& rec, const Tensor& g, std::vector<Tensor>& gp) const;
  Tensor backward_lstm(const ActivationRecord& rec, const Tensor& g, std::vector<Tensor>& gp) const;
  Tensor backward_gru(const ActivationRecord& rec, const Tensor& g, std::vector<Tensor>& gp) const;
  Tensor backward_relu(const ActivationRecord& rec, const Tensor& g) const;

  std::size_t batch_of(const Tensor& in) const;

  LayerSpec spec_;
  Shape input_shape_;
  Shape output_shape_;
  std::vector<Tensor> params_;
};

/// Single-sample or batched forward pass. The input may be shaped exactly like
/// the layer's per-sample input, or carry a leading batch dimension.
std::pair<Tensor, ActivationRecord> layer_forward(const Layer& layer, const Tensor& input);

/// Gradient of the input and of each parameter, for a record produced by layer_forward.
std::pair<Tensor, std::vector<Tensor>> layer_backward(const Layer& layer,
                                                      const ActivationRecord& record,
                                                      const Tensor& grad_out);

} // namespace weirflow::nn
