#include <doctest.h>

#include <numeric>

#include "oracles.hpp"
#include "weirflow/deep_models.hpp"
#include "weirflow/errors.hpp"
#include "weirflow/nn/network.hpp"

using namespace weirflow;
using namespace weirflow::deep;
using nn::LayerKind;

namespace {

std::vector<LayerKind> kinds(const ArchitectureSpec& a) {
  std::vector<LayerKind> out;
  for (const auto& l : a.layers) out.push_back(l.kind);
  return out;
}

// Closed-form parameter counts.
std::size_t dense_params(std::size_t in, std::size_t u) { return in * u + u; }
std::size_t conv_params(std::size_t c, std::size_t f, std::size_t k) { return f * k * c + f; }
std::size_t lstm_params(std::size_t c, std::size_t u) { return 4 * (c * u + u * u + u); }
std::size_t gru_params(std::size_t c, std::size_t u) { return 3 * (c * u + u * u + u); }

} // namespace

TEST_SUITE("deep_models") {

TEST_CASE("catalog layer programs") {
  using K = LayerKind;
  CHECK(kinds(build_architecture(Architecture::CnnGru)) ==
        std::vector{K::Conv1d, K::Relu, K::Gru, K::Gru, K::Dense});
  CHECK(kinds(build_architecture(Architecture::LstmGru)) ==
        std::vector{K::Lstm, K::Lstm, K::Gru, K::Dense});
  CHECK(kinds(build_architecture(Architecture::Lstm)) ==
        std::vector{K::Lstm, K::Lstm, K::Lstm, K::Dense});
  CHECK(kinds(build_architecture(Architecture::Gru)) == std::vector{K::Gru, K::Gru, K::Gru, K::Dense});
  CHECK(kinds(build_architecture(Architecture::Cnn)) ==
        std::vector{K::Conv1d, K::Relu, K::Conv1d, K::Relu, K::Conv1d, K::Relu, K::Dense});
  CHECK(kinds(build_architecture(Architecture::CnnLstm)) ==
        std::vector{K::Conv1d, K::Relu, K::Lstm, K::Lstm, K::Dense});

  for (Architecture a : kAllArchitectures) {
    const auto spec = build_architecture(a);
    CHECK(spec.layers.back() == nn::LayerSpec::dense(1));
    // only the last recurrent layer drops the sequence
    std::size_t last_rec = 0;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
      if (spec.layers[i].kind == K::Lstm || spec.layers[i].kind == K::Gru) last_rec = i;
    }
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
      const auto& l = spec.layers[i];
      if (l.kind == K::Lstm || l.kind == K::Gru) CHECK(l.returns_sequence == (i != last_rec));
      if (l.kind == K::Lstm || l.kind == K::Gru) CHECK(l.units == 50);
      if (l.kind == K::Conv1d) {
        CHECK(l.units == 64);
        CHECK(l.kernel == 3);
      }
    }
  }
}

TEST_CASE("names and tokens") {
  CHECK(parse_architecture("cnn-gru") == Architecture::CnnGru);
  CHECK(parse_architecture("CNN-GRU") == Architecture::CnnGru);
  CHECK(parse_architecture("LSTM-GRU") == Architecture::LstmGru);
  CHECK(token(Architecture::CnnLstm) == "cnn-lstm");
  CHECK(display_name(Architecture::Gru) == "GRU");
  CHECK_THROWS_AS(parse_architecture("transformer"), ArgumentError);
}

TEST_CASE("CNN shape trace 9 -> 7 -> 5 -> 3 -> scalar") {
  const nn::Network net(build_architecture(Architecture::Cnn).layers, {9, 1});
  std::vector<nn::Shape> shapes;
  for (const auto& l : net.layers()) shapes.push_back(l.output_shape());
  CHECK(shapes[0] == nn::Shape{7, 64});
  CHECK(shapes[2] == nn::Shape{5, 64});
  CHECK(shapes[4] == nn::Shape{3, 64});
  CHECK(shapes.back() == nn::Shape{1});
}

TEST_CASE("parameter counts match closed forms") {
  CHECK(gru_params(64, 50) == 3 * (64 * 50 + 50 * 50 + 50));
  CHECK(gru_params(64, 50) == 17250);
  const std::size_t U = 50;
  const std::size_t F = 64;
  const std::size_t expected[] = {
      lstm_params(1, U) + lstm_params(U, U) + lstm_params(U, U) + dense_params(U, 1),
      conv_params(1, F, 3) + conv_params(F, F, 3) + conv_params(F, F, 3) + dense_params(3 * F, 1),
      gru_params(1, U) + gru_params(U, U) + gru_params(U, U) + dense_params(U, 1),
      lstm_params(1, U) + lstm_params(U, U) + gru_params(U, U) + dense_params(U, 1),
      conv_params(1, F, 3) + lstm_params(F, U) + lstm_params(U, U) + dense_params(U, 1),
      conv_params(1, F, 3) + gru_params(F, U) + gru_params(U, U) + dense_params(U, 1),
  };
  for (std::size_t i = 0; i < kAllArchitectures.size(); ++i) {
    const nn::Network net(build_architecture(kAllArchitectures[i]).layers, {9, 1});
    CHECK(net.parameter_count() == expected[i]);
  }
  const nn::Network cgru(build_architecture(Architecture::CnnGru).layers, {9, 1});
  CHECK(cgru.layers()[2].parameter_count() == 17250);
}

TEST_CASE("zero-initialized architectures emit zero") {
  nn::Tensor x({9, 1});
  std::iota(x.values().begin(), x.values().end(), 1.0);
  for (Architecture a : kAllArchitectures) {
    const nn::Network net(build_architecture(a).layers, {9, 1});
    CHECK(nn::predict(net, x) == 0.0);
  }
}

TEST_CASE("sequence encoding") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9};
  const nn::Tensor t = encode_sequence(v);
  CHECK(t.shape() == nn::Shape{9, 1});
  CHECK(std::vector<double>(t.values().begin(), t.values().end()) == v);
  CHECK(encode_sequence(std::vector<double>(9, 0.0)) == nn::Tensor({9, 1}));
  CHECK_THROWS_AS(encode_sequence(std::vector<double>(8, 0.0)), ShapeError);
  CHECK_THROWS_AS(encode_sequence(std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, NAN}), ArgumentError);
  const nn::Tensor b = encode_batch(std::vector<double>(18, 1.0), 2, 9);
  CHECK(b.shape() == nn::Shape{2, 9, 1});
}

TEST_CASE("reduced-width architectures pass gradient checks") {
  const Widths small{4, 4, 3};
  for (Architecture a : kAllArchitectures) {
    CAPTURE(display_name(a));
    nn::Network net(build_architecture(a, small).layers, {9, 1});
    CHECK(oracle::network_gradcheck(net, nn::Tensor({3, 9, 1}), 31).worst() < 1e-5);
  }
}

} // TEST_SUITE
