#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weirflow/nn/layers.hpp"
#include "weirflow/nn/tensor.hpp"

namespace weirflow::deep {

enum class Architecture { Lstm, Cnn, Gru, LstmGru, CnnLstm, CnnGru };

inline constexpr std::array<Architecture, 6> kAllArchitectures = {
    Architecture::Lstm,    Architecture::Cnn,     Architecture::Gru,
    Architecture::LstmGru, Architecture::CnnLstm, Architecture::CnnGru};

/// CLI/config token: lstm, cnn, gru, lstm-gru, cnn-lstm, cnn-gru.
std::string_view token(Architecture arch);
/// Display name: LSTM, CNN, GRU, LSTM-GRU, CNN-LSTM, CNN-GRU.
std::string_view display_name(Architecture arch);
/// Accepts either form (case-insensitive).
Architecture parse_architecture(std::string_view name);

struct Widths {
  std::size_t units = 50;
  std::size_t filters = 64;
  std::size_t kernel = 3;
};

struct ArchitectureSpec {
  Architecture name;
  std::vector<nn::LayerSpec> layers; ///< ends with dense(1)
};

/// Layer program of a named architecture. Intermediate recurrent layers return
/// sequences; the last recurrent layer returns its final state. Each conv1d is
/// followed by a ReLU.
ArchitectureSpec build_architecture(Architecture name, const Widths& widths = {});
ArchitectureSpec build_architecture(std::string_view name, const Widths& widths = {});

/// [features] -> [features, 1]: step t carries feature t.
nn::Tensor encode_sequence(std::span<const double> features);

/// Expected number of features per sample; 9 for the plain inputs.
nn::Tensor encode_sequence(std::span<const double> features, std::size_t expected);

/// Row-major feature matrix (n x d) -> [n, d, 1].
nn::Tensor encode_batch(std::span<const double> row_major, std::size_t rows, std::size_t cols);

} // namespace weirflow::deep
