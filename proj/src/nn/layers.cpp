#include "weirflow/nn/layers.hpp"

#include <cmath>

#include "weirflow/errors.hpp"

namespace weirflow::nn {

namespace {

using Eigen::Index;
using StridedMap = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;
using RowArr = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Index ix(std::size_t v) { return static_cast<Index>(v); }

// Rows b*T + t (b = 0..B-1) of a (B*T) x width row-major buffer.
ConstStridedMap step_rows(const double* base, std::size_t B, std::size_t T, std::size_t t,
                          std::size_t width) {
  return ConstStridedMap(base + t * width, ix(B), ix(width), Eigen::OuterStride<>(ix(T * width)));
}

StridedMap step_rows(double* base, std::size_t B, std::size_t T, std::size_t t,
                     std::size_t width) {
  return StridedMap(base + t * width, ix(B), ix(width), Eigen::OuterStride<>(ix(T * width)));
}

template <typename Derived>
RowMat sigmoid(const Eigen::MatrixBase<Derived>& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

template <typename Derived>
RowMat tanh_of(const Eigen::MatrixBase<Derived>& x) {
  return x.array().tanh().matrix();
}

void glorot_fill(Tensor& t, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : t.values()) v = dist(rng);
}

} // namespace

std::string_view to_string(LayerKind kind) {
  switch (kind) {
  case LayerKind::Dense: return "dense";
  case LayerKind::Conv1d: return "conv1d";
  case LayerKind::Lstm: return "lstm";
  case LayerKind::Gru: return "gru";
  case LayerKind::Relu: return "relu";
  }
  return "unknown";
}

LayerKind parse_layer_kind(std::string_view token) {
  for (LayerKind k : {LayerKind::Dense, LayerKind::Conv1d, LayerKind::Lstm, LayerKind::Gru,
                      LayerKind::Relu}) {
    if (to_string(k) == token) return k;
  }
  throw ArgumentError("unknown layer kind '" + std::string(token) + "'");
}

void LayerSpec::validate() const {
  switch (kind) {
  case LayerKind::Dense:
  case LayerKind::Lstm:
  case LayerKind::Gru:
    if (units == 0) throw ArgumentError(std::string(to_string(kind)) + ": units must be > 0");
    break;
  case LayerKind::Conv1d:
    if (units == 0) throw ArgumentError("conv1d: filters must be > 0");
    if (kernel == 0) throw ArgumentError("conv1d: kernel must be >= 1");
    break;
  case LayerKind::Relu: break;
  }
}

Layer::Layer(LayerSpec spec, Shape input_shape)
    : spec_(spec), input_shape_(std::move(input_shape)) {
  spec_.validate();
  if (input_shape_.empty() || shape_size(input_shape_) == 0) {
    throw ShapeError("layer input shape must be non-empty, got " + shape_string(input_shape_));
  }
  const std::size_t U = spec_.units;
  auto need_sequence = [&] {
    if (input_shape_.size() != 2) {
      throw ShapeError(std::string(to_string(spec_.kind)) +
                       " expects [steps, channels] input, got " + shape_string(input_shape_));
    }
  };
  switch (spec_.kind) {
  case LayerKind::Dense: {
    const std::size_t D = shape_size(input_shape_);
    output_shape_ = {U};
    params_ = {Tensor({U, D}), Tensor({U})};
    break;
  }
  case LayerKind::Conv1d: {
    need_sequence();
    const std::size_t T = input_shape_[0];
    const std::size_t C = input_shape_[1];
    if (T < spec_.kernel) {
      throw ShapeError("conv1d kernel " + std::to_string(spec_.kernel) +
                       " longer than input " + shape_string(input_shape_));
    }
    output_shape_ = {T - spec_.kernel + 1, U};
    params_ = {Tensor({U, spec_.kernel, C}), Tensor({U})};
    break;
  }
  case LayerKind::Lstm:
  case LayerKind::Gru: {
    need_sequence();
    const std::size_t G = spec_.kind == LayerKind::Lstm ? 4 : 3;
    const std::size_t T = input_shape_[0];
    const std::size_t C = input_shape_[1];
    output_shape_ = spec_.returns_sequence ? Shape{T, U} : Shape{U};
    params_ = {Tensor({G * U, C}), Tensor({G * U, U}), Tensor({G * U})};
    break;
  }
  case LayerKind::Relu: output_shape_ = input_shape_; break;
  }
}

std::size_t Layer::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor& p : params_) n += p.size();
  return n;
}

void Layer::init_glorot(std::mt19937_64& rng) {
  const std::size_t U = spec_.units;
  switch (spec_.kind) {
  case LayerKind::Dense:
    glorot_fill(params_[0], shape_size(input_shape_), U, rng);
    params_[1].fill(0.0);
    break;
  case LayerKind::Conv1d: {
    const std::size_t k = spec_.kernel;
    glorot_fill(params_[0], k * input_shape_[1], k * U, rng);
    params_[1].fill(0.0);
    break;
  }
  case LayerKind::Lstm:
  case LayerKind::Gru: {
    const std::size_t GU = params_[0].dim(0);
    glorot_fill(params_[0], input_shape_[1], GU, rng);
    glorot_fill(params_[1], U, GU, rng);
    params_[2].fill(0.0);
    break;
  }
  case LayerKind::Relu: break;
  }
}

std::vector<Tensor> Layer::zero_gradients() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const Tensor& p : params_) out.emplace_back(p.shape(), 0.0);
  return out;
}

std::size_t Layer::batch_of(const Tensor& in) const {
  const Shape& s = in.shape();
  bool ok = s.size() == input_shape_.size() + 1;
  if (ok) {
    for (std::size_t i = 0; i < input_shape_.size(); ++i) ok = ok && s[i + 1] == input_shape_[i];
  }
  // Dense layers flatten whatever per-sample shape they receive.
  if (!ok && spec_.kind == LayerKind::Dense && s.size() >= 2) {
    ok = shape_size(s) / s[0] == shape_size(input_shape_);
  }
  if (!ok) {
    throw ShapeError(std::string(to_string(spec_.kind)) + " expects batched input [B, " +
                     shape_string(input_shape_).substr(1) + ", got " + shape_string(s));
  }
  return s[0];
}

Tensor Layer::forward(const Tensor& input, ActivationRecord* record) const {
  switch (spec_.kind) {
  case LayerKind::Dense: return forward_dense(input, record);
  case LayerKind::Conv1d: return forward_conv(input, record);
  case LayerKind::Lstm: return forward_lstm(input, record);
  case LayerKind::Gru: return forward_gru(input, record);
  case LayerKind::Relu: return forward_relu(input, record);
  }
  throw ArgumentError("unknown layer kind");
}

Tensor Layer::backward(const ActivationRecord& record, const Tensor& grad_out,
                       std::vector<Tensor>& grad_params) const {
  if (grad_out.shape() != record.output.shape()) {
    throw ShapeError("gradient shape " + shape_string(grad_out.shape()) +
                     " does not match forward output " + shape_string(record.output.shape()));
  }
  if (grad_params.size() != params_.size()) {
    throw ShapeError("expected " + std::to_string(params_.size()) + " parameter gradients");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (grad_params[i].shape() != params_[i].shape()) {
      throw ShapeError("parameter gradient " + shape_string(grad_params[i].shape()) +
                       " does not match parameter " + shape_string(params_[i].shape()));
    }
  }
  switch (spec_.kind) {
  case LayerKind::Dense: return backward_dense(record, grad_out, grad_params);
  case LayerKind::Conv1d: return backward_conv(record, grad_out, grad_params);
  case LayerKind::Lstm: return backward_lstm(record, grad_out, grad_params);
  case LayerKind::Gru: return backward_gru(record, grad_out, grad_params);
  case LayerKind::Relu: return backward_relu(record, grad_out);
  }
  throw ArgumentError("unknown layer kind");
}

// ---- dense ---------------------------------------------------------------

Tensor Layer::forward_dense(const Tensor& in, ActivationRecord* rec) const {
  const std::size_t B = batch_of(in);
  const std::size_t D = shape_size(input_shape_);
  const std::size_t U = spec_.units;
  Tensor out({B, U});
  auto Y = out.matrix(B, U);
  Y.noalias() = in.matrix(B, D) * params_[0].matrix(U, D).transpose();
  Y.rowwise() += params_[1].matrix(1, U).row(0);
  if (rec) {
    rec->input = in;
    rec->output = out;
  }
  return out;
}

Tensor Layer::backward_dense(const ActivationRecord& rec, const Tensor& g,
                             std::vector<Tensor>& gp) const {
  const std::size_t B = rec.input.dim(0);
  const std::size_t D = shape_size(input_shape_);
  const std::size_t U = spec_.units;
  const auto G = g.matrix(B, U);
  gp[0].matrix(U, D).noalias() += G.transpose() * rec.input.matrix(B, D);
  gp[1].matrix(1, U) += G.colwise().sum();
  Tensor dx(rec.input.shape());
  dx.matrix(B, D).noalias() = G * params_[0].matrix(U, D);
  return dx;
}

// ---- conv1d (valid padding, stride 1) -------------------------------------

Tensor Layer::forward_conv(const Tensor& in, ActivationRecord* rec) const {
  const std::size_t B = batch_of(in);
  const std::size_t T = input_shape_[0];
  const std::size_t C = input_shape_[1];
  const std::size_t k = spec_.kernel;
  const std::size_t F = spec_.units;
  const std::size_t To = T - k + 1;
  const auto K = params_[0].matrix(F, k * C);
  const auto bias = params_[1].matrix(1, F).row(0);

  Tensor out({B, To, F});
  for (std::size_t b = 0; b < B; ++b) {
    // Overlapping windows: row t covers steps t..t+k-1, contiguous in memory.
    const ConstStridedMap windows(in.data() + b * T * C, ix(To), ix(k * C), Eigen::OuterStride<>(ix(C)));
    MatMap Y(out.data() + b * To * F, ix(To), ix(F));
    Y.noalias() = windows * K.transpose();
    Y.rowwise() += bias;
  }
  if (rec) {
    rec->input = in;
    rec->output = out;
  }
  return out;
}

Tensor Layer::backward_conv(const ActivationRecord& rec, const Tensor& g,
                            std::vector<Tensor>& gp) const {
  const std::size_t B = rec.input.dim(0);
  const std::size_t T = input_shape_[0];
  const std::size_t C = input_shape_[1];
  const std::size_t k = spec_.kernel;
  const std::size_t F = spec_.units;
  const std::size_t To = T - k + 1;
  const auto K = params_[0].matrix(F, k * C);
  auto dK = gp[0].matrix(F, k * C);
  auto db = gp[1].matrix(1, F);

  Tensor dx(rec.input.shape(), 0.0);
  RowMat dwin;
  for (std::size_t b = 0; b < B; ++b) {
    const ConstStridedMap windows(rec.input.data() + b * T * C, ix(To), ix(k * C),
                                  Eigen::OuterStride<>(ix(C)));
    const ConstMatMap G(g.data() + b * To * F, ix(To), ix(F));
    dK.noalias() += G.transpose() * windows;
    db += G.colwise().sum();
    dwin.noalias() = G * K;
    double* dxb = dx.data() + b * T * C;
    for (std::size_t t = 0; t < To; ++t) {
      for (std::size_t j = 0; j < k * C; ++j) dxb[t * C + j] += dwin(ix(t), ix(j));
    }
  }
  return dx;
}

// ---- lstm -----------------------------------------------------------------

Tensor Layer::forward_lstm(const Tensor& in, ActivationRecord* rec) const {
  const std::size_t B = batch_of(in);
  const std::size_t T = input_shape_[0];
  const std::size_t C = input_shape_[1];
  const std::size_t U = spec_.units;
  const Index u = ix(U);
  const auto Wx = params_[0].matrix(4 * U, C);
  const auto Wh = params_[1].matrix(4 * U, U);
  const auto bias = params_[2].matrix(1, 4 * U).row(0);

  RowMat A = in.matrix(B * T, C) * Wx.transpose();
  A.rowwise() += bias;

  Tensor out = spec_.returns_sequence ? Tensor({B, T, U}) : Tensor({B, U});
  RowMat h = RowMat::Zero(ix(B), u);
  RowMat c = RowMat::Zero(ix(B), u);
  if (rec) {
    rec->gates.clear();
    rec->cells = {c};
    rec->hidden = {h};
    rec->aux.clear();
  }
  RowMat z(ix(B), 4 * u);
  for (std::size_t t = 0; t < T; ++t) {
    z.noalias() = step_rows(A.data(), B, T, t, 4 * U);
    z.noalias() += h * Wh.transpose();
    z.leftCols(2 * u) = sigmoid(z.leftCols(2 * u));
    z.middleCols(2 * u, u) = tanh_of(z.middleCols(2 * u, u));
    z.rightCols(u) = sigmoid(z.rightCols(u));
    c = (z.middleCols(u, u).array() * c.array() + z.leftCols(u).array() * z.middleCols(2 * u, u).array())
            .matrix();
    RowMat tc = tanh_of(c);
    h = (z.rightCols(u).array() * tc.array()).matrix();
    if (spec_.returns_sequence) step_rows(out.data(), B, T, t, U) = h;
    if (rec) {
      rec->gates.push_back(z);
      rec->cells.push_back(c);
      rec->aux.push_back(std::move(tc));
      rec->hidden.push_back(h);
    }
  }
  if (!spec_.returns_sequence) out.matrix(B, U) = h;
  if (rec) {
    rec->input = in;
    rec->output = out;
  }
  return out;
}

Tensor Layer::backward_lstm(const ActivationRecord& rec, const Tensor& g,
                            std::vector<Tensor>& gp) const {
  const std::size_t B = rec.input.dim(0);
  const std::size_t T = input_shape_[0];
  const std::size_t C = input_shape_[1];
  const std::size_t U = spec_.units;
  const Index u = ix(U);
  const auto Wx = params_[0].matrix(4 * U, C);
  const auto Wh = params_[1].matrix(4 * U, U);
  auto dWh = gp[1].matrix(4 * U, U);

  RowMat dA(ix(B * T), 4 * u);
  RowMat dh_next = RowMat::Zero(ix(B), u);
  RowMat dc_next = RowMat::Zero(ix(B), u);
  RowMat dh(ix(B), u);
  RowMat dz(ix(B), 4 * u);
  for (std::size_t tt = T; tt-- > 0;) {
    dh = dh_next;
    if (spec_.returns_sequence) {
      dh += step_rows(g.data(), B, T, tt, U);
    } else if (tt == T - 1) {
      dh += g.matrix(B, U);
    }
    const RowMat& z = rec.gates[tt];
    const auto i = z.leftCols(u).array();
    const auto f = z.middleCols(u, u).array();
    const auto gg = z.middleCols(2 * u, u).array();
    const auto o = z.rightCols(u).array();
    const auto tc = rec.aux[tt].array();
    const auto c_prev = rec.cells[tt].array();

    const RowArr dc = dc_next.array() + dh.array() * o * (1.0 - tc.square());
    dz.leftCols(u) = (dc * gg * i * (1.0 - i)).matrix();
    dz.middleCols(u, u) = (dc * c_prev * f * (1.0 - f)).matrix();
    dz.middleCols(2 * u, u) = (dc * i * (1.0 - gg.square())).matrix();
    dz.rightCols(u) = (dh.array() * tc * o * (1.0 - o)).matrix();
    dc_next = (dc * f).matrix();

    dWh.noalias() += dz.transpose() * rec.hidden[tt];
    dh_next.noalias() = dz * Wh;
    step_rows(dA.data(), B, T, tt, 4 * U) = dz;
  }
  gp[2].matrix(1, 4 * U) += dA.colwise().sum();
  gp[0].matrix(4 * U, C).noalias() += dA.transpose() * rec.input.matrix(B * T, C);
  Tensor dx(rec.input.shape());
  dx.matrix(B * T, C).noalias() = dA * Wx;
  return dx;
}

// ---- gru ------------------------------------------------------------------

Tensor Layer::forward_gru(const Tensor& in, ActivationRecord* rec) const {
  const std::size_t B = batch_of(in);
  const std::size_t T = input_shape_[0];
  const std::size_t C = input_shape_[1];
  const std::size_t U = spec_.units;
  const Index u = ix(U);
  const auto Wx = params_[0].matrix(3 * U, C);
  const auto Wh = params_[1].matrix(3 * U, U);
  const auto bias = params_[2].matrix(1, 3 * U).row(0);

  RowMat A = in.matrix(B * T, C) * Wx.transpose();
  A.rowwise() += bias;

  Tensor out = spec_.returns_sequence ? Tensor({B, T, U}) : Tensor({B, U});
  RowMat h = RowMat::Zero(ix(B), u);
  if (rec) {
    rec->gates.clear();
    rec->cells.clear();
    rec->hidden = {h};
    rec->aux.clear();
  }
  RowMat z(ix(B), 3 * u);
  RowMat rh(ix(B), u);
  for (std::size_t t = 0; t < T; ++t) {
    z.noalias() = step_rows(A.data(), B, T, t, 3 * U);
    z.leftCols(2 * u).noalias() += h * Wh.topRows(2 * u).transpose();
    z.leftCols(2 * u) = sigmoid(z.leftCols(2 * u));
    rh = (z.middleCols(u, u).array() * h.array()).matrix();
    z.rightCols(u).noalias() += rh * Wh.bottomRows(u).transpose();
    z.rightCols(u) = tanh_of(z.rightCols(u));
    const auto zg = z.leftCols(u).array();
    h = (zg * h.array() + (1.0 - zg) * z.rightCols(u).array()).matrix();
    if (spec_.returns_sequence) step_rows(out.data(), B, T, t, U) = h;
    if (rec) {
      rec->gates.push_back(z);
      rec->aux.push_back(rh);
      rec->hidden.push_back(h);
    }
  }
  if (!spec_.returns_sequence) out.matrix(B, U) = h;
  if (rec) {
    rec->input = in;
    rec->output = out;
  }
  return out;
}

Tensor Layer::backward_gru(const ActivationRecord& rec, const Tensor& g,
                           std::vector<Tensor>& gp) const {
  const std::size_t B = rec.input.dim(0);
  const std::size_t T = input_shape_[0];
  const std::size_t C = input_shape_[1];
  const std::size_t U = spec_.units;
  const Index u = ix(U);
  const auto Wx = params_[0].matrix(3 * U, C);
  const auto Wh = params_[1].matrix(3 * U, U);
  auto dWh = gp[1].matrix(3 * U, U);

  RowMat dA(ix(B * T), 3 * u);
  RowMat dh_next = RowMat::Zero(ix(B), u);
  RowMat dh(ix(B), u);
  RowMat dz(ix(B), 3 * u);
  RowMat drh(ix(B), u);
  for (std::size_t tt = T; tt-- > 0;) {
    dh = dh_next;
    if (spec_.returns_sequence) {
      dh += step_rows(g.data(), B, T, tt, U);
    } else if (tt == T - 1) {
      dh += g.matrix(B, U);
    }
    const RowMat& z = rec.gates[tt];
    const RowMat& h_prev = rec.hidden[tt];
    const auto zg = z.leftCols(u).array();
    const auto r = z.middleCols(u, u).array();
    const auto n = z.rightCols(u).array();

    // candidate pre-activation
    dz.rightCols(u) = (dh.array() * (1.0 - zg) * (1.0 - n.square())).matrix();
    dWh.bottomRows(u).noalias() += dz.rightCols(u).transpose() * rec.aux[tt];
    drh.noalias() = dz.rightCols(u) * Wh.bottomRows(u);

    dz.leftCols(u) = (dh.array() * (h_prev.array() - n) * zg * (1.0 - zg)).matrix();
    dz.middleCols(u, u) = (drh.array() * h_prev.array() * r * (1.0 - r)).matrix();

    dh_next = (dh.array() * zg + drh.array() * r).matrix();
    dWh.topRows(2 * u).noalias() += dz.leftCols(2 * u).transpose() * h_prev;
    dh_next.noalias() += dz.leftCols(2 * u) * Wh.topRows(2 * u);
    step_rows(dA.data(), B, T, tt, 3 * U) = dz;
  }
  gp[2].matrix(1, 3 * U) += dA.colwise().sum();
  gp[0].matrix(3 * U, C).noalias() += dA.transpose() * rec.input.matrix(B * T, C);
  Tensor dx(rec.input.shape());
  dx.matrix(B * T, C).noalias() = dA * Wx;
  return dx;
}

// ---- relu -----------------------------------------------------------------

Tensor Layer::forward_relu(const Tensor& in, ActivationRecord* rec) const {
  batch_of(in);
  Tensor out = in;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  if (rec) {
    rec->input = in;
    rec->output = out;
  }
  return out;
}

Tensor Layer::backward_relu(const ActivationRecord& rec, const Tensor& g) const {
  Tensor dx = g;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!(rec.input[i] > 0.0)) dx[i] = 0.0;
  }
  return dx;
}

// ---- single-sample helpers ------------------------------------------------

std::pair<Tensor, ActivationRecord> layer_forward(const Layer& layer, const Tensor& input) {
  ActivationRecord rec;
  const bool single = input.shape() == layer.input_shape() ||
                      (layer.spec().kind == LayerKind::Dense && input.rank() == 1 &&
                       input.size() == shape_size(layer.input_shape()));
  if (single) {
    Shape batched = {1};
    batched.insert(batched.end(), input.shape().begin(), input.shape().end());
    Tensor out = layer.forward(input.reshaped(batched), &rec);
    rec.batched = false;
    return {out.reshaped(layer.output_shape()), std::move(rec)};
  }
  Tensor out = layer.forward(input, &rec);
  return {std::move(out), std::move(rec)};
}

std::pair<Tensor, std::vector<Tensor>> layer_backward(const Layer& layer,
                                                      const ActivationRecord& record,
                                                      const Tensor& grad_out) {
  std::vector<Tensor> grads = layer.zero_gradients();
  if (!record.batched) {
    if (grad_out.size() != record.output.size()) {
      throw ShapeError("gradient shape " + shape_string(grad_out.shape()) +
                       " does not match forward output " +
                       shape_string(layer.output_shape()));
    }
    Tensor dx = layer.backward(record, grad_out.reshaped(record.output.shape()), grads);
    Shape in_shape(record.input.shape().begin() + 1, record.input.shape().end());
    return {dx.reshaped(in_shape), std::move(grads)};
  }
  Tensor dx = layer.backward(record, grad_out, grads);
  return {std::move(dx), std::move(grads)};
}

} // namespace weirflow::nn
