#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace weirflow {

inline constexpr std::size_t kFeatureCount = 9;

/// Feature order used everywhere a sample is flattened.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "lambda", "beta", "L", "W", "Q", "Y1", "Y2", "Y3", "h1"};

using FeatureVector = std::array<double, kFeatureCount>;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One weir experiment: nine geometric/hydraulic inputs and the measured
/// discharge coefficient.
struct WeirSample {
  double lambda = 0.0; ///< relative eccentricity
  double beta = 0.0;   ///< downstream slope angle in degrees, 0 when there is no base block
  double L = 0.0;      ///< initial weir length (m)
  double W = 0.0;      ///< total weir height (m)
  double Q = 0.0;      ///< discharge (m^3/s)
  double Y1 = 0.0;     ///< upstream water depth (m)
  double Y2 = 0.0;     ///< depth at the crest (m)
  double Y3 = 0.0;     ///< downstream depth (m)
  double h1 = 0.0;     ///< upstream head on the crest (m)
  std::optional<double> cd;

  FeatureVector features() const;

  /// Empty string when the sample is valid, otherwise the first violation.
  std::string violation() const;

  bool operator==(const WeirSample&) const = default;
};

enum class Provenance { LoadedCsv, Synthetic };

enum class SyntheticMode { Bagheri, Linear };

std::string_view to_string(SyntheticMode mode);
SyntheticMode parse_synthetic_mode(std::string_view token);

/// Generator coefficients for SyntheticMode::Linear: cd = intercept + sum w_j z_j.
struct LinearGenerator {
  double intercept = 0.0;
  FeatureVector weights{};
};

class Dataset {
public:
  Dataset(std::vector<WeirSample> samples, Provenance provenance,
          std::optional<std::uint64_t> seed = std::nullopt);

  std::size_t size() const noexcept { return samples_.size(); }
  const WeirSample& operator[](std::size_t i) const { return samples_[i]; }
  std::span<const WeirSample> samples() const noexcept { return samples_; }
  Provenance provenance() const noexcept { return provenance_; }
  std::optional<std::uint64_t> seed() const noexcept { return seed_; }

  const std::optional<LinearGenerator>& linear_generator() const noexcept { return linear_; }
  void set_linear_generator(LinearGenerator gen) { linear_ = gen; }

  /// Targets in dataset order; throws if any sample lacks cd.
  std::vector<double> targets() const;
  std::vector<double> targets(std::span<const std::size_t> indices) const;

  /// Raw feature matrix (rows = samples, kFeatureNames order).
  RowMatrix feature_matrix() const;

  /// Copy restricted to the given indices, in the given order.
  Dataset subset(std::span<const std::size_t> indices) const;

private:
  std::vector<WeirSample> samples_;
  Provenance provenance_;
  std::optional<std::uint64_t> seed_;
  std::optional<LinearGenerator> linear_;
};

/// Reads `lambda,beta,L,W,Q,Y1,Y2,Y3,h1,Cd` CSV (LF or CRLF).
Dataset load_csv(const std::filesystem::path& path);
Dataset parse_csv(std::string_view text);

/// Writes the same schema with LF endings and 17 significant digits.
void write_csv(const Dataset& dataset, const std::filesystem::path& path);
std::string to_csv(const Dataset& dataset);

/// Seeded synthetic dataset; a pure function of its arguments.
Dataset generate_synthetic(std::size_t n, SyntheticMode mode, double noise_sd, std::uint64_t seed);

/// Width of the synthetic test channel used to back-compute Q.
inline constexpr double kSyntheticChannelWidth = 0.3;

struct ScalerParams {
  FeatureVector mean{};
  FeatureVector sd{};
  std::vector<std::string> warnings;
};

/// Z-score transform fit on a training split (population standard deviation).
class Scaler {
public:
  explicit Scaler(ScalerParams params) : params_(std::move(params)) {}

  const ScalerParams& params() const noexcept { return params_; }

  FeatureVector transform(const WeirSample& sample) const;
  FeatureVector transform(const FeatureVector& raw) const;
  RowMatrix transform(const Dataset& data) const;

private:
  ScalerParams params_;
};

Scaler standardize(const Dataset& train);

/// Column-wise version used for arbitrary feature matrices (e.g. stacked meta-features).
struct ColumnScaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;

  static ColumnScaler fit(const RowMatrix& X);
  RowMatrix apply(const RowMatrix& X) const;
};

} // namespace weirflow
