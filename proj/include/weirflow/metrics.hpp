#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace weirflow::metrics {

enum class MetricKind { MSE, RMSE, MAE, MAPE, MSLE, RMSLE, MPD, MGD };

inline constexpr std::array<MetricKind, 8> kAllMetrics = {
    MetricKind::MSE,  MetricKind::RMSE,  MetricKind::MAE, MetricKind::MAPE,
    MetricKind::MSLE, MetricKind::RMSLE, MetricKind::MPD, MetricKind::MGD};

/// Lower-case column token, e.g. "mse".
std::string_view metric_name(MetricKind kind);

/// Predictions at or below this value are clamped before log-family metrics.
inline constexpr double kLogClamp = 1e-6;
/// Floor applied by log_report to values at or below 1e-16.
inline constexpr double kLogFloor = -16.0;

struct MetricReport {
  double mse = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  double mape = 0.0; ///< percent
  double msle = 0.0;
  double rmsle = 0.0;
  double mpd = 0.0;
  double mgd = 0.0;
  std::size_t clamped_count = 0;

  double value(MetricKind kind) const;
  std::array<double, 8> values() const;
};

/// Evaluates a single metric with natural logarithms, without clamping.
/// Throws ArgumentError on length mismatch and DomainError when an entry lies
/// outside the metric's domain.
double compute_metric(MetricKind kind, std::span<const double> y, std::span<const double> yhat);

/// All eight metrics. Non-log metrics see the raw predictions; log-family
/// metrics see predictions clamped to kLogClamp, counted in clamped_count.
MetricReport compute_report(std::span<const double> y, std::span<const double> yhat);

/// log10 of each metric, in kAllMetrics order.
std::array<double, 8> log_report(const MetricReport& report);

} // namespace weirflow::metrics
