#include "weirflow/metrics.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "weirflow/errors.hpp"

namespace weirflow::metrics {

namespace {

bool log_family(MetricKind kind) {
  return kind == MetricKind::MSLE || kind == MetricKind::RMSLE || kind == MetricKind::MPD ||
         kind == MetricKind::MGD;
}

void check_lengths(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) {
    throw ArgumentError("metric length mismatch: |y| = " + std::to_string(y.size()) +
                        ", |yhat| = " + std::to_string(yhat.size()));
  }
  if (y.empty()) {
    throw ArgumentError("metric requires at least one pair");
  }
}

[[noreturn]] void domain_failure(MetricKind kind, const char* what, std::size_t index) {
  throw DomainError(std::string(metric_name(kind)) + ": " + what + " at index " +
                    std::to_string(index));
}

void check_domain(MetricKind kind, std::span<const double> y, std::span<const double> yhat) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (kind == MetricKind::MAPE && y[i] == 0.0) {
      domain_failure(kind, "zero target", i);
    }
    if (log_family(kind)) {
      if (!(y[i] > 0.0)) domain_failure(kind, "non-positive target", i);
      if (!(yhat[i] > 0.0)) domain_failure(kind, "non-positive prediction", i);
    }
  }
}

// Per-pair contribution; the metric is the mean (optionally square-rooted).
double term(MetricKind kind, double y, double p) {
  switch (kind) {
  case MetricKind::MSE:
  case MetricKind::RMSE: return (y - p) * (y - p);
  case MetricKind::MAE: return std::abs(y - p);
  case MetricKind::MAPE: return std::abs((y - p) / y);
  case MetricKind::MSLE:
  case MetricKind::RMSLE: {
    const double d = std::log(y) - std::log(p);
    return d * d;
  }
  case MetricKind::MPD: return 2.0 * (y * std::log(y / p) + p - y);
  case MetricKind::MGD: return 2.0 * (std::log(p / y) + y / p - 1.0);
  }
  return 0.0;
}

double evaluate(MetricKind kind, std::span<const double> y, std::span<const double> yhat) {
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += term(kind, y[i], yhat[i]);
  const double mean = sum / static_cast<double>(y.size());
  switch (kind) {
  case MetricKind::RMSE:
  case MetricKind::RMSLE: return std::sqrt(mean);
  case MetricKind::MAPE: return 100.0 * mean;
  default: return mean;
  }
}

} // namespace

std::string_view metric_name(MetricKind kind) {
  switch (kind) {
  case MetricKind::MSE: return "mse";
  case MetricKind::RMSE: return "rmse";
  case MetricKind::MAE: return "mae";
  case MetricKind::MAPE: return "mape";
  case MetricKind::MSLE: return "msle";
  case MetricKind::RMSLE: return "rmsle";
  case MetricKind::MPD: return "mpd";
  case MetricKind::MGD: return "mgd";
  }
  return "unknown";
}

double MetricReport::value(MetricKind kind) const {
  switch (kind) {
  case MetricKind::MSE: return mse;
  case MetricKind::RMSE: return rmse;
  case MetricKind::MAE: return mae;
  case MetricKind::MAPE: return mape;
  case MetricKind::MSLE: return msle;
  case MetricKind::RMSLE: return rmsle;
  case MetricKind::MPD: return mpd;
  case MetricKind::MGD: return mgd;
  }
  return 0.0;
}

std::array<double, 8> MetricReport::values() const {
  std::array<double, 8> out{};
  for (std::size_t i = 0; i < kAllMetrics.size(); ++i) out[i] = value(kAllMetrics[i]);
  return out;
}

double compute_metric(MetricKind kind, std::span<const double> y, std::span<const double> yhat) {
  check_lengths(y, yhat);
  check_domain(kind, y, yhat);
  return evaluate(kind, y, yhat);
}

MetricReport compute_report(std::span<const double> y, std::span<const double> yhat) {
  check_lengths(y, yhat);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) {
      throw DomainError("report: non-positive target at index " + std::to_string(i));
    }
  }

  MetricReport report;
  std::vector<double> clamped(yhat.begin(), yhat.end());
  for (double& p : clamped) {
    if (!(p > kLogClamp)) {
      p = kLogClamp;
      ++report.clamped_count;
    }
  }

  report.mse = evaluate(MetricKind::MSE, y, yhat);
  report.rmse = std::sqrt(report.mse);
  report.mae = evaluate(MetricKind::MAE, y, yhat);
  report.mape = evaluate(MetricKind::MAPE, y, yhat);
  report.msle = evaluate(MetricKind::MSLE, y, clamped);
  report.rmsle = std::sqrt(report.msle);
  report.mpd = evaluate(MetricKind::MPD, y, clamped);
  report.mgd = evaluate(MetricKind::MGD, y, clamped);
  return report;
}

std::array<double, 8> log_report(const MetricReport& report) {
  std::array<double, 8> out = report.values();
  for (double& v : out) v = v <= 1e-16 ? kLogFloor : std::log10(v);
  return out;
}

} // namespace weirflow::metrics
