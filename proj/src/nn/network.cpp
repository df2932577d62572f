#include "weirflow/nn/network.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "weirflow/errors.hpp"

namespace weirflow::nn {

namespace {

constexpr const char* kMagic = "weirflow-net";
constexpr int kFormatVersion = 1;

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_scalar_head(const Network& net) {
  if (net.layers().empty() || net.layers().back().output_shape() != Shape{1}) {
    throw ShapeError("network must end in a layer producing a single scalar");
  }
}

Shape batched_shape(std::size_t batch, const Shape& sample) {
  Shape s = {batch};
  s.insert(s.end(), sample.begin(), sample.end());
  return s;
}

template <typename T>
T read_value(std::istream& in, const char* what) {
  T value{};
  if (!(in >> value)) throw ParseError(std::string("network file: expected ") + what, 0);
  return value;
}

void expect_token(std::istream& in, const std::string& token) {
  std::string got;
  if (!(in >> got) || got != token) {
    throw ParseError("network file: expected '" + token + "', found '" + got + "'", 0);
  }
}

} // namespace

Network::Network(const std::vector<LayerSpec>& specs, Shape input_shape)
    : input_shape_(std::move(input_shape)) {
  if (specs.empty()) throw ArgumentError("network needs at least one layer");
  Shape shape = input_shape_;
  layers_.reserve(specs.size());
  for (const LayerSpec& spec : specs) {
    layers_.emplace_back(spec, shape);
    shape = layers_.back().output_shape();
  }
}

Network Network::glorot(const std::vector<LayerSpec>& specs, Shape input_shape,
                        std::uint64_t seed) {
  Network net(specs, std::move(input_shape));
  std::mt19937_64 rng(seed);
  for (Layer& layer : net.layers_) layer.init_glorot(rng);
  return net;
}

std::vector<LayerSpec> Network::specs() const {
  std::vector<LayerSpec> out;
  for (const Layer& l : layers_) out.push_back(l.spec());
  return out;
}

std::vector<Tensor*> Network::parameters() {
  std::vector<Tensor*> out;
  for (Layer& l : layers_) {
    for (Tensor& p : l.params()) out.push_back(&p);
  }
  return out;
}

std::vector<const Tensor*> Network::parameters() const {
  std::vector<const Tensor*> out;
  for (const Layer& l : layers_) {
    for (const Tensor& p : l.params()) out.push_back(&p);
  }
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += l.parameter_count();
  return n;
}

Tensor Network::forward(const Tensor& batch, std::vector<ActivationRecord>* records) const {
  if (records) records->assign(layers_.size(), ActivationRecord{});
  Tensor x = batch;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i].forward(x, records ? &(*records)[i] : nullptr);
  }
  return x;
}

std::vector<Tensor> Network::backward(const std::vector<ActivationRecord>& records,
                                      const Tensor& grad_out) const {
  if (records.size() != layers_.size()) {
    throw ShapeError("backward: activation records do not match layer count");
  }
  std::vector<std::vector<Tensor>> per_layer(layers_.size());
  Tensor g = grad_out;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    per_layer[i] = layers_[i].zero_gradients();
    g = layers_[i].backward(records[i], g, per_layer[i]);
  }
  std::vector<Tensor> flat;
  for (auto& grads : per_layer) {
    for (Tensor& t : grads) flat.push_back(std::move(t));
  }
  return flat;
}

bool Network::operator==(const Network& other) const {
  if (input_shape_ != other.input_shape_ || layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (!(layers_[i].spec() == other.layers_[i].spec())) return false;
    if (layers_[i].params() != other.layers_[i].params()) return false;
  }
  return true;
}

void Network::save(std::ostream& out) const {
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "input " << input_shape_.size();
  for (std::size_t d : input_shape_) out << ' ' << d;
  out << '\n' << "layers " << layers_.size() << '\n';
  for (const Layer& layer : layers_) {
    const LayerSpec& s = layer.spec();
    out << "layer " << to_string(s.kind) << " units " << s.units << " kernel " << s.kernel
        << " returns_sequence " << (s.returns_sequence ? 1 : 0) << '\n';
    out << "params " << layer.params().size() << '\n';
    for (const Tensor& p : layer.params()) {
      out << "tensor " << p.rank();
      for (std::size_t d : p.shape()) out << ' ' << d;
      out << '\n';
      for (std::size_t i = 0; i < p.size(); ++i) {
        out << (i ? " " : "") << format17(p[i]);
      }
      out << '\n';
    }
  }
}

Network Network::load(std::istream& in) {
  expect_token(in, kMagic);
  const int version = read_value<int>(in, "format version");
  if (version != kFormatVersion) {
    throw ParseError("network file: unsupported version " + std::to_string(version), 0);
  }
  expect_token(in, "input");
  Shape input(read_value<std::size_t>(in, "input rank"));
  for (std::size_t& d : input) d = read_value<std::size_t>(in, "input dimension");
  expect_token(in, "layers");
  const std::size_t count = read_value<std::size_t>(in, "layer count");

  std::vector<LayerSpec> specs;
  std::vector<std::vector<Tensor>> params;
  for (std::size_t i = 0; i < count; ++i) {
    LayerSpec spec;
    expect_token(in, "layer");
    spec.kind = parse_layer_kind(read_value<std::string>(in, "layer kind"));
    expect_token(in, "units");
    spec.units = read_value<std::size_t>(in, "units");
    expect_token(in, "kernel");
    spec.kernel = read_value<std::size_t>(in, "kernel");
    expect_token(in, "returns_sequence");
    spec.returns_sequence = read_value<int>(in, "returns_sequence") != 0;
    specs.push_back(spec);

    expect_token(in, "params");
    std::vector<Tensor> tensors(read_value<std::size_t>(in, "parameter count"));
    for (Tensor& t : tensors) {
      expect_token(in, "tensor");
      Shape shape(read_value<std::size_t>(in, "tensor rank"));
      for (std::size_t& d : shape) d = read_value<std::size_t>(in, "tensor dimension");
      std::vector<double> values(shape_size(shape));
      for (double& v : values) {
        const std::string token = read_value<std::string>(in, "tensor value");
        v = std::stod(token);
      }
      t = Tensor(std::move(shape), std::move(values));
    }
    params.push_back(std::move(tensors));
  }

  Network net(specs, input);
  for (std::size_t i = 0; i < count; ++i) {
    auto& dst = net.layers_[i].params();
    if (dst.size() != params[i].size()) {
      throw ShapeError("network file: layer " + std::to_string(i) + " parameter count mismatch");
    }
    for (std::size_t j = 0; j < dst.size(); ++j) {
      if (dst[j].shape() != params[i][j].shape()) {
        throw ShapeError("network file: layer " + std::to_string(i) + " expects " +
                         shape_string(dst[j].shape()) + ", file has " +
                         shape_string(params[i][j].shape()));
      }
      dst[j] = std::move(params[i][j]);
    }
  }
  return net;
}

void Network::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  save(out);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Network Network::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return load(in);
}

double mse_loss(std::span<const double> predictions, std::span<const double> targets,
                std::span<double> grad) {
  if (predictions.size() != targets.size() || predictions.empty()) {
    throw ShapeError("mse_loss: " + std::to_string(predictions.size()) + " predictions vs " +
                     std::to_string(targets.size()) + " targets");
  }
  const double n = static_cast<double>(predictions.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    sum += d * d;
    if (!grad.empty()) grad[i] = 2.0 * d / n;
  }
  return sum / n;
}

TrainResult train(const std::vector<LayerSpec>& architecture, const Tensor& features,
                  std::span<const double> targets, const TrainConfig& config) {
  if (features.rank() < 2) throw ShapeError("train: features must be [n, ...]");
  Shape sample(features.shape().begin() + 1, features.shape().end());
  return train(Network::glorot(architecture, sample, config.seed), features, targets, config);
}

TrainResult train(Network initial, const Tensor& features, std::span<const double> targets,
                  const TrainConfig& config) {
  config.validate();
  require_scalar_head(initial);
  if (features.rank() < 2) throw ShapeError("train: features must be [n, ...]");
  const std::size_t n = features.dim(0);
  if (n == 0 || targets.size() != n) {
    throw ShapeError("train: " + std::to_string(n) + " feature rows vs " +
                     std::to_string(targets.size()) + " targets");
  }
  const Shape sample(features.shape().begin() + 1, features.shape().end());
  if (sample != initial.input_shape()) {
    throw ShapeError("train: sample shape " + shape_string(sample) + " does not match network " +
                     shape_string(initial.input_shape()));
  }
  const std::size_t stride = shape_size(sample);

  TrainResult result{std::move(initial), {}, 0};
  Network& net = result.net;
  std::vector<Tensor*> params = net.parameters();
  AdamState adam = AdamState::zeros_like(params);

  std::seed_seq shuffle_seed{config.seed, std::uint64_t{0x9E3779B97F4A7C15ULL}};
  std::mt19937_64 rng(shuffle_seed);
  std::vector<std::size_t> order(n);
  std::vector<ActivationRecord> records;
  std::vector<double> batch_targets;
  std::vector<double> grad;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i);
      std::swap(order[i], order[pick(rng)]);
    }

    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t B = std::min(config.batch_size, n - start);
      Tensor batch(batched_shape(B, sample));
      batch_targets.resize(B);
      for (std::size_t b = 0; b < B; ++b) {
        const std::size_t row = order[start + b];
        std::copy_n(features.data() + row * stride, stride, batch.data() + b * stride);
        batch_targets[b] = targets[row];
      }

      const Tensor out = net.forward(batch, &records);
      grad.resize(B);
      const double loss = mse_loss(out.values(), batch_targets, grad);
      if (!std::isfinite(loss)) {
        throw TrainingError("training diverged: non-finite loss at epoch " + std::to_string(epoch),
                            epoch);
      }
      epoch_sum += loss * static_cast<double>(B);

      const std::vector<Tensor> grads = net.backward(records, Tensor({B, 1}, grad));
      if (config.update_parameters) {
        std::vector<const Tensor*> gptr;
        gptr.reserve(grads.size());
        for (const Tensor& g : grads) gptr.push_back(&g);
        adam_step(adam, params, gptr, config);
        ++result.steps;
      }
    }
    result.loss_trace.push_back(epoch_sum / static_cast<double>(n));
  }
  return result;
}

double predict(const Network& net, const Tensor& sample) {
  require_scalar_head(net);
  if (sample.shape() != net.input_shape()) {
    throw ShapeError("predict: sample shape " + shape_string(sample.shape()) +
                     " does not match network input " + shape_string(net.input_shape()));
  }
  return net.forward(sample.reshaped(batched_shape(1, sample.shape())))[0];
}

std::vector<double> predict_batch(const Network& net, const Tensor& batch) {
  require_scalar_head(net);
  const Shape sample(batch.shape().begin() + (batch.rank() ? 1 : 0), batch.shape().end());
  if (batch.rank() < 2 || sample != net.input_shape()) {
    throw ShapeError("predict: batch shape " + shape_string(batch.shape()) +
                     " does not match network input " + shape_string(net.input_shape()));
  }
  const Tensor out = net.forward(batch);
  return {out.values().begin(), out.values().end()};
}

} // namespace weirflow::nn
