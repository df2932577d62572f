#include "weirflow/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "weirflow/errors.hpp"
#include "weirflow/hydraulics.hpp"

namespace weirflow {

namespace {

constexpr std::array<std::string_view, kFeatureCount + 1> kCsvColumns = {
    "lambda", "beta", "L", "W", "Q", "Y1", "Y2", "Y3", "h1", "Cd"};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

void check_header(const std::vector<std::string_view>& header) {
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
    const bool present =
        std::find(header.begin(), header.end(), kCsvColumns[i]) != header.end();
    if (!present) {
      throw SchemaError("missing column '" + std::string(kCsvColumns[i]) + "'");
    }
  }
  for (std::string_view column : header) {
    if (std::find(kCsvColumns.begin(), kCsvColumns.end(), column) == kCsvColumns.end()) {
      throw SchemaError("unexpected column '" + std::string(column) + "'");
    }
  }
  if (header.size() != kCsvColumns.size()) {
    throw SchemaError("duplicate columns in header");
  }
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
    if (header[i] != kCsvColumns[i]) {
      throw SchemaError("column '" + std::string(kCsvColumns[i]) + "' out of order; expected " +
                        "lambda,beta,L,W,Q,Y1,Y2,Y3,h1,Cd");
    }
  }
}

double parse_cell(std::string_view cell, std::size_t line, std::string_view column) {
  cell = trim(cell);
  if (cell.empty()) {
    throw ParseError("row " + std::to_string(line) + ": blank cell in column '" +
                         std::string(column) + "'",
                     line);
  }
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    throw ParseError("row " + std::to_string(line) + ": non-numeric value '" +
                         std::string(cell) + "' in column '" + std::string(column) + "'",
                     line);
  }
  return value;
}

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

WeirSample sample_from_features(const FeatureVector& f, std::optional<double> cd) {
  WeirSample s;
  s.lambda = f[0];
  s.beta = f[1];
  s.L = f[2];
  s.W = f[3];
  s.Q = f[4];
  s.Y1 = f[5];
  s.Y2 = f[6];
  s.Y3 = f[7];
  s.h1 = f[8];
  s.cd = cd;
  return s;
}

// Q consistent with the discharge relation, iterating on the velocity head.
double back_computed_discharge(double cd, double h1, double Y1) {
  const double B = kSyntheticChannelWidth;
  const double g = hydraulics::kGravity;
  double H1 = h1;
  double Q = 0.0;
  for (int it = 0; it < 50; ++it) {
    Q = hydraulics::discharge_from_cd(cd, B, H1, g);
    const double v = Q / (B * Y1);
    H1 = hydraulics::total_head(h1, v, g);
  }
  return Q;
}

} // namespace

FeatureVector WeirSample::features() const { return {lambda, beta, L, W, Q, Y1, Y2, Y3, h1}; }

std::string WeirSample::violation() const {
  for (double v : features()) {
    if (!std::isfinite(v)) return "non-finite feature";
  }
  if (!(lambda > 0.0)) return "lambda must be > 0";
  if (!(beta >= 0.0)) return "beta must be >= 0";
  if (!(L > 0.0)) return "L must be > 0";
  if (!(W > 0.0)) return "W must be > 0";
  if (!(Q >= 0.0)) return "Q must be >= 0";
  if (!(Y1 > 0.0)) return "Y1 must be > 0";
  if (!(h1 > 0.0)) return "h1 must be > 0";
  if (cd && !(*cd > 0.0 && *cd < 3.0)) return "Cd must lie in (0, 3)";
  return {};
}

std::string_view to_string(SyntheticMode mode) {
  return mode == SyntheticMode::Bagheri ? "bagheri" : "linear";
}

SyntheticMode parse_synthetic_mode(std::string_view token) {
  if (token == "bagheri") return SyntheticMode::Bagheri;
  if (token == "linear") return SyntheticMode::Linear;
  throw ArgumentError("unknown synthetic mode '" + std::string(token) +
                      "' (expected bagheri or linear)");
}

Dataset::Dataset(std::vector<WeirSample> samples, Provenance provenance,
                 std::optional<std::uint64_t> seed)
    : samples_(std::move(samples)), provenance_(provenance), seed_(seed) {
  if (samples_.empty()) throw ArgumentError("empty dataset");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const std::string why = samples_[i].violation();
    if (!why.empty()) {
      throw ValidationError("sample " + std::to_string(i) + ": " + why, i);
    }
  }
}

std::vector<double> Dataset::targets() const {
  std::vector<double> y;
  y.reserve(samples_.size());
  for (const WeirSample& s : samples_) {
    if (!s.cd) throw ArgumentError("sample without discharge coefficient");
    y.push_back(*s.cd);
  }
  return y;
}

std::vector<double> Dataset::targets(std::span<const std::size_t> indices) const {
  std::vector<double> y;
  y.reserve(indices.size());
  for (std::size_t i : indices) {
    if (!samples_.at(i).cd) throw ArgumentError("sample without discharge coefficient");
    y.push_back(*samples_[i].cd);
  }
  return y;
}

RowMatrix Dataset::feature_matrix() const {
  RowMatrix X(static_cast<Eigen::Index>(samples_.size()), static_cast<Eigen::Index>(kFeatureCount));
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const FeatureVector f = samples_[i].features();
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f[j];
    }
  }
  return X;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<WeirSample> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) picked.push_back(samples_.at(i));
  Dataset out(std::move(picked), provenance_, seed_);
  out.linear_ = linear_;
  return out;
}

Dataset parse_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw SchemaError("missing header row");

  std::vector<std::string_view> header = split_fields(lines[0]);
  for (auto& h : header) h = trim(h);
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].remove_prefix(3);
  check_header(header);

  std::vector<WeirSample> samples;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t row = li + 1;
    const auto fields = split_fields(lines[li]);
    if (fields.size() != kCsvColumns.size()) {
      throw ParseError("row " + std::to_string(row) + ": expected " +
                           std::to_string(kCsvColumns.size()) + " cells, found " +
                           std::to_string(fields.size()),
                       row);
    }
    FeatureVector f{};
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      f[j] = parse_cell(fields[j], row, kCsvColumns[j]);
    }
    const double cd = parse_cell(fields[kFeatureCount], row, "Cd");
    WeirSample s = sample_from_features(f, cd);
    const std::string why = s.violation();
    if (!why.empty()) {
      throw ValidationError("row " + std::to_string(row) + ": " + why, row);
    }
    samples.push_back(s);
  }
  if (samples.empty()) throw ArgumentError("empty dataset");
  return Dataset(std::move(samples), Provenance::LoadedCsv);
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

std::string to_csv(const Dataset& dataset) {
  std::string out = "lambda,beta,L,W,Q,Y1,Y2,Y3,h1,Cd\n";
  for (const WeirSample& s : dataset.samples()) {
    for (double v : s.features()) {
      out += format17(v);
      out += ',';
    }
    out += s.cd ? format17(*s.cd) : std::string();
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << to_csv(dataset);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Dataset generate_synthetic(std::size_t n, SyntheticMode mode, double noise_sd, std::uint64_t seed) {
  if (n < 2) throw ArgumentError("generate_synthetic: n must be >= 2");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    throw ArgumentError("generate_synthetic: noise_sd must be >= 0");
  }

  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  std::vector<FeatureVector> geometry(n);
  for (FeatureVector& f : geometry) {
    const double lambda = uniform(0.5, 2.0);
    const double beta = uniform(0.0, 1.0) < 0.5 ? 0.0 : uniform(10.0, 60.0);
    const double L = uniform(0.1, 1.0);
    const double W = uniform(0.05, 0.5);
    const double h1 = uniform(0.01, 0.3 * W + 0.05);
    const double Y1 = W + h1;
    const double Y2 = h1 * uniform(0.6, 0.75);
    const double Y3 = Y1 * uniform(0.15, 0.6);
    f = {lambda, beta, L, W, 0.0, Y1, Y2, Y3, h1};
  }

  // Clean (noise-free) coefficient per sample.
  std::vector<double> clean(n);
  std::optional<LinearGenerator> generator;
  if (mode == SyntheticMode::Bagheri) {
    for (std::size_t i = 0; i < n; ++i) {
      const FeatureVector& f = geometry[i];
      clean[i] = hydraulics::cd_bagheri(f[0], f[8], f[2], f[3]);
    }
  } else {
    // Q is derived from cd, so its weight is zero.
    LinearGenerator gen{1.0, {0.05, -0.03, 0.04, 0.02, 0.0, 0.03, 0.02, -0.02, 0.06}};
    FeatureVector mean{};
    FeatureVector sd{};
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      double sum = 0.0;
      for (const FeatureVector& f : geometry) sum += f[j];
      mean[j] = sum / static_cast<double>(n);
      double ss = 0.0;
      for (const FeatureVector& f : geometry) ss += (f[j] - mean[j]) * (f[j] - mean[j]);
      sd[j] = std::sqrt(ss / static_cast<double>(n));
      if (!(sd[j] > 0.0)) sd[j] = 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double cd = gen.intercept;
      for (std::size_t j = 0; j < kFeatureCount; ++j) {
        if (gen.weights[j] != 0.0) cd += gen.weights[j] * (geometry[i][j] - mean[j]) / sd[j];
      }
      clean[i] = cd;
    }
    generator = gen;
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<WeirSample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double cd = clean[i];
    if (noise_sd > 0.0) {
      // Redraw the rare noise values that would leave the physical band.
      for (int attempt = 0;; ++attempt) {
        cd = clean[i] + noise_sd * noise(rng);
        if (cd > 0.0 && cd < 3.0) break;
        if (attempt > 1000) throw ArgumentError("generate_synthetic: noise_sd too large");
      }
    }
    FeatureVector f = geometry[i];
    f[4] = back_computed_discharge(cd, f[8], f[5]);
    samples.push_back(sample_from_features(f, cd));
  }

  Dataset out(std::move(samples), Provenance::Synthetic, seed);
  if (generator) out.set_linear_generator(*generator);
  return out;
}

FeatureVector Scaler::transform(const FeatureVector& raw) const {
  FeatureVector z{};
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    z[j] = (raw[j] - params_.mean[j]) / params_.sd[j];
  }
  return z;
}

FeatureVector Scaler::transform(const WeirSample& sample) const {
  return transform(sample.features());
}

RowMatrix Scaler::transform(const Dataset& data) const {
  RowMatrix X(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(kFeatureCount));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const FeatureVector z = transform(data[i]);
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = z[j];
    }
  }
  return X;
}

Scaler standardize(const Dataset& train) {
  ScalerParams params;
  const double n = static_cast<double>(train.size());
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double lo = train[0].features()[j];
    double hi = lo;
    double sum = 0.0;
    for (const WeirSample& s : train.samples()) {
      const double v = s.features()[j];
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double mean = sum / n;
    if (lo == hi) {
      params.mean[j] = lo;
      params.sd[j] = 1.0;
      params.warnings.push_back("feature '" + std::string(kFeatureNames[j]) +
                                "' is constant on the training split; sd set to 1");
      continue;
    }
    double ss = 0.0;
    for (const WeirSample& s : train.samples()) {
      const double d = s.features()[j] - mean;
      ss += d * d;
    }
    params.mean[j] = mean;
    params.sd[j] = std::sqrt(ss / n);
  }
  return Scaler(std::move(params));
}

ColumnScaler ColumnScaler::fit(const RowMatrix& X) {
  ColumnScaler s;
  const Eigen::Index cols = X.cols();
  s.mean = Eigen::VectorXd::Zero(cols);
  s.sd = Eigen::VectorXd::Ones(cols);
  if (X.rows() == 0) return s;
  for (Eigen::Index j = 0; j < cols; ++j) {
    const auto col = X.col(j);
    if (col.minCoeff() == col.maxCoeff()) {
      s.mean(j) = col(0);
      continue;
    }
    s.mean(j) = col.mean();
    s.sd(j) = std::sqrt((col.array() - s.mean(j)).square().mean());
  }
  return s;
}

RowMatrix ColumnScaler::apply(const RowMatrix& X) const {
  RowMatrix out = X;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    out.col(j) = (X.col(j).array() - mean(j)) / sd(j);
  }
  return out;
}

} // namespace weirflow
