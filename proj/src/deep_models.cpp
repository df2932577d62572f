#include "weirflow/deep_models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "weirflow/data_model.hpp"
#include "weirflow/errors.hpp"

namespace weirflow::deep {

using nn::LayerSpec;

std::string_view token(Architecture arch) {
  switch (arch) {
  case Architecture::Lstm: return "lstm";
  case Architecture::Cnn: return "cnn";
  case Architecture::Gru: return "gru";
  case Architecture::LstmGru: return "lstm-gru";
  case Architecture::CnnLstm: return "cnn-lstm";
  case Architecture::CnnGru: return "cnn-gru";
  }
  return "unknown";
}

std::string_view display_name(Architecture arch) {
  switch (arch) {
  case Architecture::Lstm: return "LSTM";
  case Architecture::Cnn: return "CNN";
  case Architecture::Gru: return "GRU";
  case Architecture::LstmGru: return "LSTM-GRU";
  case Architecture::CnnLstm: return "CNN-LSTM";
  case Architecture::CnnGru: return "CNN-GRU";
  }
  return "unknown";
}

Architecture parse_architecture(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Architecture a : kAllArchitectures) {
    if (token(a) == lower) return a;
  }
  if (lower == "cgru") return Architecture::CnnGru;
  throw ArgumentError("unknown architecture '" + std::string(name) + "'");
}

ArchitectureSpec build_architecture(Architecture name, const Widths& w) {
  const LayerSpec conv = LayerSpec::conv1d(w.filters, w.kernel);
  const LayerSpec relu = LayerSpec::relu();
  const LayerSpec head = LayerSpec::dense(1);
  ArchitectureSpec spec{name, {}};
  auto& L = spec.layers;
  switch (name) {
  case Architecture::Lstm:
    L = {LayerSpec::lstm(w.units, true), LayerSpec::lstm(w.units, true),
         LayerSpec::lstm(w.units, false), head};
    break;
  case Architecture::Cnn: L = {conv, relu, conv, relu, conv, relu, head}; break;
  case Architecture::Gru:
    L = {LayerSpec::gru(w.units, true), LayerSpec::gru(w.units, true),
         LayerSpec::gru(w.units, false), head};
    break;
  case Architecture::LstmGru:
    L = {LayerSpec::lstm(w.units, true), LayerSpec::lstm(w.units, true),
         LayerSpec::gru(w.units, false), head};
    break;
  case Architecture::CnnLstm:
    L = {conv, relu, LayerSpec::lstm(w.units, true), LayerSpec::lstm(w.units, false), head};
    break;
  case Architecture::CnnGru:
    L = {conv, relu, LayerSpec::gru(w.units, true), LayerSpec::gru(w.units, false), head};
    break;
  }
  return spec;
}

ArchitectureSpec build_architecture(std::string_view name, const Widths& widths) {
  return build_architecture(parse_architecture(name), widths);
}

nn::Tensor encode_sequence(std::span<const double> features, std::size_t expected) {
  if (features.size() != expected) {
    throw ShapeError("encode_sequence: expected " + std::to_string(expected) +
                     " features, got " + std::to_string(features.size()));
  }
  for (double v : features) {
    if (!std::isfinite(v)) throw ArgumentError("encode_sequence: non-finite feature");
  }
  return nn::Tensor({features.size(), 1}, std::vector<double>(features.begin(), features.end()));
}

nn::Tensor encode_sequence(std::span<const double> features) {
  return encode_sequence(features, kFeatureCount);
}

nn::Tensor encode_batch(std::span<const double> row_major, std::size_t rows, std::size_t cols) {
  if (row_major.size() != rows * cols) {
    throw ShapeError("encode_batch: buffer does not hold " + std::to_string(rows) + "x" +
                     std::to_string(cols) + " values");
  }
  return nn::Tensor({rows, cols, 1}, std::vector<double>(row_major.begin(), row_major.end()));
}

} // namespace weirflow::deep
