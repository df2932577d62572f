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

#include "weirflow/data_model.hpp"
#include "weirflow/deep_models.hpp"
#include "weirflow/metrics.hpp"
#include "weirflow/resampling.hpp"

namespace weirflow::experiment {

/// The twelve model tokens in report order: five classical, six deep, one hybrid.
inline constexpr std::array<std::string_view, 12> kAllModels = {
    "lr",  "rf",       "svm",      "knn",      "dt",      "lstm",
    "cnn", "gru",      "lstm-gru", "cnn-lstm", "cnn-gru", "lr-cgru"};

bool is_model_token(std::string_view token);
bool is_deep_model(std::string_view token);
bool is_classical_model(std::string_view token);

/// Splits "lr, cnn-gru" into tokens; "all" expands to kAllModels.
std::vector<std::string> parse_model_list(std::string_view text);

enum class HybridStrategy { Average, Stacking };

std::string_view to_string(HybridStrategy strategy);
HybridStrategy parse_hybrid_strategy(std::string_view token);

struct SyntheticSource {
  std::size_t n = 120;
  SyntheticMode mode = SyntheticMode::Bagheri;
  double noise_sd = 0.01;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::size_t folds = 5;
  std::vector<std::string> models;
  HybridStrategy hybrid = HybridStrategy::Average;
  std::optional<std::size_t> epochs; ///< empty = 200
  std::optional<std::filesystem::path> data;
  std::optional<SyntheticSource> synthetic;
  std::filesystem::path out = "results";
  std::size_t threads = 0; ///< 0 = hardware concurrency, 1 = deterministic single thread
  bool in_sample = false;  ///< also fit on all rows and emit labelled in-sample YY files

  deep::Widths widths;
  /// Test hook: deep models start from all-zero parameters and never update.
  bool frozen_zero_deep = false;

  /// Throws ArgumentError describing the first invalid field.
  void validate() const;
  std::size_t effective_epochs() const { return epochs.value_or(200); }
  std::size_t effective_threads() const;
};

/// Parses a JSON config object. Unknown keys raise SchemaError.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Effective config (defaults filled in) as pretty JSON.
std::string config_to_json(const ExperimentConfig& config);

/// Reads the CSV or generates the synthetic dataset named by the config.
Dataset load_dataset(const ExperimentConfig& config);

/// Seed of one (model, fold) task, derived from the master seed.
std::uint64_t task_seed(std::uint64_t master, std::string_view model, std::size_t fold);

struct ModelResult {
  std::string model;
  bool ok = true;
  std::string error;
  std::vector<double> oof;        ///< aligned to dataset indices
  metrics::MetricReport pooled;
  std::vector<metrics::MetricReport> folds;
  metrics::MetricReport fold_mean;
  std::vector<double> fold_seconds;
  double seconds = 0.0;           ///< sum of fit times across folds
  std::vector<std::vector<double>> loss_traces; ///< per fold, deep models only
  std::optional<std::vector<double>> in_sample;
};

struct RunResult {
  ExperimentConfig config;
  FoldPlan plan;
  std::vector<double> y;
  std::vector<ModelResult> models; ///< in the order of config.models

  bool all_ok() const;
  const ModelResult& at(std::string_view model) const;
};

RunResult run_experiment(const ExperimentConfig& config, const Dataset& dataset);

/// Elementwise mean; ArgumentError on length mismatch.
std::vector<double> hybrid_average(std::span<const double> lr_oof, std::span<const double> cgru_oof);

/// Stacking path for one fold: LR predictions become a tenth standardized
/// feature of a CNN-GRU retrained on this fold. Train rows use nested
/// out-of-fold LR predictions; test rows use LR fit on the full train split.
struct StackedFold {
  std::vector<double> test_predictions;
  std::vector<double> loss_trace;
  double seconds = 0.0;
};

StackedFold stacked_fold(const Dataset& dataset, const FoldPlan& plan, std::size_t fold,
                         const ExperimentConfig& config);

/// Writes metrics.csv, predictions.csv, timing.csv and yy_<model>.csv files
/// for every successful model. Returns the written paths.
std::vector<std::filesystem::path> emit_reports(const RunResult& result,
                                                const std::filesystem::path& out_dir);

/// h:mm:ss.ffffff
std::string format_duration(double seconds);

} // namespace weirflow::experiment
