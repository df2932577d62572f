#include "weirflow/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "weirflow/classical_models.hpp"
#include "weirflow/errors.hpp"
#include "weirflow/nn/network.hpp"

namespace weirflow::experiment {

namespace fs = std::filesystem;
using json = nlohmann::json;
using metrics::MetricReport;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<double> gather(std::span<const double> v, std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

RowMatrix append_column(const RowMatrix& X, std::span<const double> column) {
  RowMatrix out(X.rows(), X.cols() + 1);
  out.leftCols(X.cols()) = X;
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i, X.cols()) = column[static_cast<std::size_t>(i)];
  return out;
}

struct FitOutput {
  std::vector<double> predictions;
  std::vector<double> loss_trace;
  double seconds = 0.0;
};

/// Deep model on a standardized feature matrix; every column is one sequence step.
FitOutput fit_deep(deep::Architecture arch, const RowMatrix& Xtr, std::span<const double> ytr,
                   const RowMatrix& Xte, std::uint64_t seed, const ExperimentConfig& config) {
  const auto rows = static_cast<std::size_t>(Xtr.rows());
  const auto cols = static_cast<std::size_t>(Xtr.cols());
  const nn::Tensor train_x = deep::encode_batch({Xtr.data(), rows * cols}, rows, cols);
  const nn::Tensor test_x = deep::encode_batch(
      {Xte.data(), static_cast<std::size_t>(Xte.size())}, static_cast<std::size_t>(Xte.rows()), cols);

  nn::TrainConfig tc;
  tc.epochs = config.effective_epochs();
  tc.seed = seed;
  tc.update_parameters = !config.frozen_zero_deep;
  const auto layers = deep::build_architecture(arch, config.widths).layers;

  FitOutput out;
  const auto start = Clock::now();
  nn::Network init = config.frozen_zero_deep ? nn::Network(layers, {cols, 1})
                                             : nn::Network::glorot(layers, {cols, 1}, seed);
  nn::TrainResult trained = nn::train(std::move(init), train_x, ytr, tc);
  out.seconds = seconds_since(start);
  out.loss_trace = std::move(trained.loss_trace);
  out.predictions = nn::predict_batch(trained.net, test_x);
  return out;
}

FitOutput fit_classical(classical::ModelKind kind, const RowMatrix& Xtr,
                        std::span<const double> ytr, const RowMatrix& Xte, std::uint64_t seed) {
  FitOutput out;
  const auto start = Clock::now();
  const classical::Regressor model = classical::fit(kind, Xtr, ytr, seed);
  out.seconds = seconds_since(start);
  out.predictions = model.predict(Xte);
  return out;
}

/// Fits `model` (not the hybrid) on standardized train rows and predicts test rows.
FitOutput fit_single(std::string_view model, const RowMatrix& Xtr, std::span<const double> ytr,
                     const RowMatrix& Xte, std::uint64_t seed, const ExperimentConfig& config) {
  if (is_classical_model(model)) {
    return fit_classical(classical::parse_model_kind(model), Xtr, ytr, Xte, seed);
  }
  return fit_deep(deep::parse_architecture(model), Xtr, ytr, Xte, seed, config);
}

/// LR predictions for `rows`, each made by a model that never saw it, using
/// the given partition of those rows.
std::vector<double> nested_lr_oof(const Dataset& dataset, std::span<const std::size_t> rows,
                                  const FoldPlan& inner) {
  std::vector<double> out(rows.size());
  for (std::size_t j = 0; j < inner.k(); ++j) {
    const FoldSplit split = fold_indices(inner, j);
    std::vector<std::size_t> tr;
    std::vector<std::size_t> te;
    for (std::size_t i : split.train) tr.push_back(rows[i]);
    for (std::size_t i : split.test) te.push_back(rows[i]);
    const Dataset train = dataset.subset(tr);
    const Scaler scaler = standardize(train);
    const auto model = classical::fit_linear_regression(scaler.transform(train), train.targets());
    const auto pred = model.predict(scaler.transform(dataset.subset(te)));
    for (std::size_t t = 0; t < split.test.size(); ++t) out[split.test[t]] = pred[t];
  }
  return out;
}

MetricReport mean_report(const std::vector<MetricReport>& reports) {
  MetricReport m;
  if (reports.empty()) return m;
  const double k = static_cast<double>(reports.size());
  for (const MetricReport& r : reports) {
    m.mse += r.mse / k;
    m.rmse += r.rmse / k;
    m.mae += r.mae / k;
    m.mape += r.mape / k;
    m.msle += r.msle / k;
    m.rmsle += r.rmsle / k;
    m.mpd += r.mpd / k;
    m.mgd += r.mgd / k;
    m.clamped_count += r.clamped_count;
  }
  return m;
}

void check_finite(std::span<const double> v, std::string_view model) {
  for (double x : v) {
    if (!std::isfinite(x)) throw TrainingError(std::string(model) + ": non-finite prediction", 0);
  }
}

struct PreparedFold {
  FoldSplit split;
  RowMatrix Xtr;
  RowMatrix Xte;
  std::vector<double> ytr;
  std::vector<double> yte;
};

struct TaskOutcome {
  bool ok = false;
  std::string error;
  FitOutput fit;
};

/// Runs fn(i) for i in [0, count) on `threads` workers; exceptions stay inside fn.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (std::thread& th : pool) th.join();
}

template <typename Fn>
TaskOutcome guarded(Fn fn) {
  TaskOutcome out;
  try {
    out.fit = fn();
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

} // namespace

// ---- model tokens ----------------------------------------------------------

bool is_model_token(std::string_view token) {
  return std::find(kAllModels.begin(), kAllModels.end(), token) != kAllModels.end();
}

bool is_classical_model(std::string_view token) {
  return token == "lr" || token == "rf" || token == "svm" || token == "knn" || token == "dt";
}

bool is_deep_model(std::string_view token) {
  for (deep::Architecture a : deep::kAllArchitectures) {
    if (deep::token(a) == token) return true;
  }
  return false;
}

std::vector<std::string> parse_model_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::string tok = lower(trim(text.substr(pos, comma - pos)));
    pos = comma + 1;
    if (tok.empty()) continue;
    if (tok == "all") {
      out.insert(out.end(), kAllModels.begin(), kAllModels.end());
      continue;
    }
    if (tok == "cgru") tok = "cnn-gru";
    if (!is_model_token(tok)) throw ArgumentError("unknown model '" + tok + "'");
    out.push_back(tok);
  }
  return out;
}

std::string_view to_string(HybridStrategy strategy) {
  return strategy == HybridStrategy::Average ? "average" : "stacking";
}

HybridStrategy parse_hybrid_strategy(std::string_view token) {
  const std::string t = lower(trim(token));
  if (t == "average") return HybridStrategy::Average;
  if (t == "stacking") return HybridStrategy::Stacking;
  throw ArgumentError("unknown hybrid strategy '" + std::string(token) +
                      "' (expected average or stacking)");
}

// ---- config ----------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (folds < 2) throw ArgumentError("folds must be >= 2, got " + std::to_string(folds));
  if (models.empty()) throw ArgumentError("no models selected");
  std::set<std::string> seen;
  for (const std::string& m : models) {
    if (!is_model_token(m)) throw ArgumentError("unknown model '" + m + "'");
    if (!seen.insert(m).second) throw ArgumentError("model '" + m + "' listed twice");
  }
  if (epochs && *epochs == 0) throw ArgumentError("epochs must be >= 1");
  if (data && synthetic) throw ArgumentError("give either a data path or synthetic parameters, not both");
  if (synthetic) {
    if (synthetic->n == 0) throw ArgumentError("synthetic n must be >= 1");
    if (!(synthetic->noise_sd >= 0.0)) throw ArgumentError("synthetic noise_sd must be >= 0");
  }
  if (widths.units == 0 || widths.filters == 0 || widths.kernel == 0) {
    throw ArgumentError("network widths must be positive");
  }
}

std::size_t ExperimentConfig::effective_threads() const {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw SchemaError(std::string("config key '") + key + "' has the wrong type");
  }
}

std::uint64_t get_uint(const json& j, const char* key) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    throw SchemaError(std::string("config key '") + key + "' must be a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

} // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what(), 0);
  }
  if (!root.is_object()) throw SchemaError("config must be a JSON object");

  ExperimentConfig c;
  for (const auto& [key, value] : root.items()) {
    if (key == "seed") {
      c.seed = get_uint(value, "seed");
    } else if (key == "folds") {
      c.folds = get_uint(value, "folds");
    } else if (key == "models") {
      if (value.is_string()) {
        c.models = parse_model_list(value.get<std::string>());
      } else if (value.is_array()) {
        std::string joined;
        for (const json& m : value) joined += get_as<std::string>(m, "models") + ",";
        c.models = parse_model_list(joined);
      } else {
        throw SchemaError("config key 'models' must be a list or comma-separated string");
      }
    } else if (key == "hybrid_strategy") {
      c.hybrid = parse_hybrid_strategy(get_as<std::string>(value, "hybrid_strategy"));
    } else if (key == "epochs") {
      c.epochs = get_uint(value, "epochs");
    } else if (key == "data") {
      c.data = fs::path(get_as<std::string>(value, "data"));
    } else if (key == "synthetic") {
      if (!value.is_object()) throw SchemaError("config key 'synthetic' must be an object");
      SyntheticSource s;
      for (const auto& [k, v] : value.items()) {
        if (k == "n") s.n = get_uint(v, "synthetic.n");
        else if (k == "mode") s.mode = parse_synthetic_mode(get_as<std::string>(v, "synthetic.mode"));
        else if (k == "noise_sd") s.noise_sd = get_as<double>(v, "synthetic.noise_sd");
        else if (k == "seed") s.seed = get_uint(v, "synthetic.seed");
        else throw SchemaError("unknown config key 'synthetic." + k + "'");
      }
      c.synthetic = s;
    } else if (key == "out") {
      c.out = fs::path(get_as<std::string>(value, "out"));
    } else if (key == "threads") {
      c.threads = get_uint(value, "threads");
    } else if (key == "single_thread") {
      if (get_as<bool>(value, "single_thread")) c.threads = 1;
    } else if (key == "in_sample") {
      c.in_sample = get_as<bool>(value, "in_sample");
    } else {
      throw SchemaError("unknown config key '" + key + "'");
    }
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["folds"] = c.folds;
  j["models"] = c.models;
  j["hybrid_strategy"] = std::string(to_string(c.hybrid));
  j["epochs"] = c.effective_epochs();
  if (c.data) j["data"] = c.data->string();
  if (c.synthetic) {
    j["synthetic"] = {{"n", c.synthetic->n},
                      {"mode", std::string(weirflow::to_string(c.synthetic->mode))},
                      {"noise_sd", c.synthetic->noise_sd},
                      {"seed", c.synthetic->seed}};
  }
  j["out"] = c.out.string();
  j["threads"] = c.effective_threads();
  j["in_sample"] = c.in_sample;
  return j.dump(2);
}

Dataset load_dataset(const ExperimentConfig& config) {
  if (config.data) return load_csv(*config.data);
  if (config.synthetic) {
    const SyntheticSource& s = *config.synthetic;
    return generate_synthetic(s.n, s.mode, s.noise_sd, s.seed);
  }
  throw ArgumentError("no dataset source (data path or synthetic parameters)");
}

std::uint64_t task_seed(std::uint64_t master, std::string_view model, std::size_t fold) {
  std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
  for (char ch : model) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(fold)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

// ---- hybrid ----------------------------------------------------------------

std::vector<double> hybrid_average(std::span<const double> lr_oof,
                                   std::span<const double> cgru_oof) {
  if (lr_oof.size() != cgru_oof.size()) {
    throw ArgumentError("hybrid average: lengths " + std::to_string(lr_oof.size()) + " and " +
                        std::to_string(cgru_oof.size()) + " differ");
  }
  std::vector<double> out(lr_oof.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * (lr_oof[i] + cgru_oof[i]);
  return out;
}

namespace {

/// Stacked CNN-GRU on the given train/test rows of `dataset`.
FitOutput stacked_fit(const Dataset& dataset, std::span<const std::size_t> train_rows,
                      std::span<const std::size_t> test_rows, std::size_t inner_folds,
                      std::uint64_t seed, const ExperimentConfig& config) {
  const auto start = Clock::now();
  const Dataset train = dataset.subset(train_rows);
  const Dataset test = dataset.subset(test_rows);
  const Scaler scaler = standardize(train);
  const RowMatrix Xtr = scaler.transform(train);
  const RowMatrix Xte = scaler.transform(test);
  const std::vector<double> ytr = train.targets();

  const FoldPlan inner = make_folds(train_rows.size(), std::min(inner_folds, train_rows.size()), seed);
  const std::vector<double> meta_tr = nested_lr_oof(dataset, train_rows, inner);
  const std::vector<double> meta_te =
      classical::fit_linear_regression(Xtr, ytr).predict(Xte);

  RowMatrix mtr(static_cast<Eigen::Index>(meta_tr.size()), 1);
  for (std::size_t i = 0; i < meta_tr.size(); ++i) mtr(static_cast<Eigen::Index>(i), 0) = meta_tr[i];
  RowMatrix mte(static_cast<Eigen::Index>(meta_te.size()), 1);
  for (std::size_t i = 0; i < meta_te.size(); ++i) mte(static_cast<Eigen::Index>(i), 0) = meta_te[i];
  const ColumnScaler meta_scaler = ColumnScaler::fit(mtr);
  const RowMatrix ztr = meta_scaler.apply(mtr);
  const RowMatrix zte = meta_scaler.apply(mte);

  const RowMatrix Str = append_column(Xtr, {ztr.data(), static_cast<std::size_t>(ztr.size())});
  const RowMatrix Ste = append_column(Xte, {zte.data(), static_cast<std::size_t>(zte.size())});
  FitOutput out = fit_deep(deep::Architecture::CnnGru, Str, ytr, Ste, seed, config);
  out.seconds = seconds_since(start);
  return out;
}

} // namespace

StackedFold stacked_fold(const Dataset& dataset, const FoldPlan& plan, std::size_t fold,
                         const ExperimentConfig& config) {
  const FoldSplit split = fold_indices(plan, fold);
  FitOutput fit = stacked_fit(dataset, split.train, split.test, plan.k(),
                              task_seed(config.seed, "lr-cgru", fold), config);
  return {std::move(fit.predictions), std::move(fit.loss_trace), fit.seconds};
}

// ---- run -------------------------------------------------------------------

bool RunResult::all_ok() const {
  return std::all_of(models.begin(), models.end(), [](const ModelResult& m) { return m.ok; });
}

const ModelResult& RunResult::at(std::string_view model) const {
  for (const ModelResult& m : models) {
    if (m.model == model) return m;
  }
  throw ArgumentError("model '" + std::string(model) + "' is not part of this run");
}

RunResult run_experiment(const ExperimentConfig& config, const Dataset& dataset) {
  config.validate();
  const std::size_t n = dataset.size();
  const std::vector<double> y = dataset.targets();
  FoldPlan plan = make_folds(n, config.folds, config.seed);
  const std::size_t k = plan.k();

  const bool want_hybrid =
      std::find(config.models.begin(), config.models.end(), "lr-cgru") != config.models.end();
  const bool stacking = config.hybrid == HybridStrategy::Stacking;

  // Models that must be fit per fold: selected ones plus the hybrid's parts.
  std::vector<std::string> fitted;
  for (const std::string& m : config.models) {
    if (m != "lr-cgru") fitted.push_back(m);
  }
  if (want_hybrid) {
    for (const char* part : {"lr", "cnn-gru"}) {
      if (std::find(fitted.begin(), fitted.end(), part) == fitted.end()) fitted.push_back(part);
    }
    if (stacking) fitted.push_back("lr-cgru");
  }

  std::vector<PreparedFold> prepared(k);
  for (std::size_t f = 0; f < k; ++f) {
    PreparedFold& p = prepared[f];
    p.split = fold_indices(plan, f);
    const Dataset train = dataset.subset(p.split.train);
    const Scaler scaler = standardize(train);
    p.Xtr = scaler.transform(train);
    p.Xte = scaler.transform(dataset.subset(p.split.test));
    p.ytr = train.targets();
    p.yte = gather(y, p.split.test);
  }

  const std::size_t tasks = fitted.size() * k;
  std::vector<TaskOutcome> outcomes(tasks);
  parallel_for(tasks, config.effective_threads(), [&](std::size_t t) {
    const std::string& model = fitted[t / k];
    const std::size_t f = t % k;
    const PreparedFold& p = prepared[f];
    const std::uint64_t seed = task_seed(config.seed, model, f);
    outcomes[t] = guarded([&] {
      if (model == "lr-cgru") {
        return stacked_fit(dataset, p.split.train, p.split.test, k, seed, config);
      }
      return fit_single(model, p.Xtr, p.ytr, p.Xte, seed, config);
    });
  });

  // Optional full-data fits for in-sample YY files.
  std::vector<TaskOutcome> full(fitted.size());
  if (config.in_sample) {
    const Scaler scaler = standardize(dataset);
    const RowMatrix X = scaler.transform(dataset);
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    parallel_for(fitted.size(), config.effective_threads(), [&](std::size_t m) {
      const std::string& model = fitted[m];
      const std::uint64_t seed = task_seed(config.seed, model, k);
      full[m] = guarded([&] {
        if (model == "lr-cgru") return stacked_fit(dataset, all, all, k, seed, config);
        return fit_single(model, X, y, X, seed, config);
      });
    });
  }

  std::map<std::string, ModelResult> assembled;
  for (std::size_t m = 0; m < fitted.size(); ++m) {
    ModelResult r;
    r.model = fitted[m];
    r.oof.assign(n, 0.0);
    for (std::size_t f = 0; f < k && r.ok; ++f) {
      const TaskOutcome& o = outcomes[m * k + f];
      if (!o.ok) {
        r.ok = false;
        r.error = "fold " + std::to_string(f) + ": " + o.error;
        break;
      }
      const auto& test = prepared[f].split.test;
      for (std::size_t i = 0; i < test.size(); ++i) r.oof[test[i]] = o.fit.predictions[i];
      r.fold_seconds.push_back(o.fit.seconds);
      r.seconds += o.fit.seconds;
      if (!o.fit.loss_trace.empty()) r.loss_traces.push_back(o.fit.loss_trace);
    }
    if (config.in_sample && r.ok) {
      if (full[m].ok) r.in_sample = full[m].fit.predictions;
    }
    assembled.emplace(r.model, std::move(r));
  }

  if (want_hybrid && !stacking) {
    const ModelResult& lr = assembled.at("lr");
    const ModelResult& cg = assembled.at("cnn-gru");
    ModelResult r;
    r.model = "lr-cgru";
    if (!lr.ok || !cg.ok) {
      r.ok = false;
      r.error = "component failed: " + (lr.ok ? cg.error : lr.error);
    } else {
      r.oof = hybrid_average(lr.oof, cg.oof);
      for (std::size_t f = 0; f < k; ++f) {
        r.fold_seconds.push_back(lr.fold_seconds[f] + cg.fold_seconds[f]);
      }
      r.seconds = lr.seconds + cg.seconds;
      r.loss_traces = cg.loss_traces;
      if (lr.in_sample && cg.in_sample) r.in_sample = hybrid_average(*lr.in_sample, *cg.in_sample);
    }
    assembled.emplace("lr-cgru", std::move(r));
  }

  RunResult result{config, plan, y, {}};
  for (const std::string& m : config.models) {
    ModelResult r = std::move(assembled.at(m));
    if (r.ok) {
      try {
        check_finite(r.oof, r.model);
        for (std::size_t f = 0; f < k; ++f) {
          const auto& test = prepared[f].split.test;
          r.folds.push_back(metrics::compute_report(prepared[f].yte, gather(r.oof, test)));
        }
        r.fold_mean = mean_report(r.folds);
        r.pooled = metrics::compute_report(y, r.oof);
        for (double v : r.pooled.values()) {
          if (!std::isfinite(v)) throw DomainError(r.model + ": non-finite metric");
        }
      } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
      }
    }
    result.models.push_back(std::move(r));
  }
  return result;
}

// ---- reports ---------------------------------------------------------------

std::string format_duration(double seconds) {
  const auto micros = static_cast<long long>(std::llround(std::max(0.0, seconds) * 1e6));
  const long long h = micros / 3'600'000'000LL;
  const long long m = (micros / 60'000'000LL) % 60;
  const long long s = (micros / 1'000'000LL) % 60;
  const long long us = micros % 1'000'000LL;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%lld:%02lld:%02lld.%06lld", h, m, s, us);
  return buf;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string yy_text(std::span<const double> y, std::span<const double> pred) {
  std::string text = "y_true,y_pred\n";
  for (std::size_t i = 0; i < y.size(); ++i) text += num(y[i]) + "," + num(pred[i]) + "\n";
  return text;
}

} // namespace

std::vector<fs::path> emit_reports(const RunResult& result, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<fs::path> written;

  std::string metrics_csv = "model";
  for (metrics::MetricKind m : metrics::kAllMetrics) metrics_csv += "," + std::string(metrics::metric_name(m));
  for (metrics::MetricKind m : metrics::kAllMetrics) {
    metrics_csv += ",log10_" + std::string(metrics::metric_name(m));
  }
  metrics_csv += "\n";

  std::string predictions_csv = "sample_index,fold,y_true,y_pred,model\n";
  std::string timing_csv = "model,seconds,duration\n";
  const auto& assignment = result.plan.assignments();

  for (const ModelResult& r : result.models) {
    if (!r.ok) continue;
    metrics_csv += r.model;
    for (double v : r.pooled.values()) metrics_csv += "," + num(v);
    for (double v : metrics::log_report(r.pooled)) metrics_csv += "," + num(v);
    metrics_csv += "\n";

    for (std::size_t i = 0; i < r.oof.size(); ++i) {
      predictions_csv += std::to_string(i) + "," + std::to_string(assignment[i]) + "," +
                         num(result.y[i]) + "," + num(r.oof[i]) + "," + r.model + "\n";
    }

    char secs[48];
    std::snprintf(secs, sizeof secs, "%.6f", r.seconds);
    timing_csv += r.model + "," + secs + "," + format_duration(r.seconds) + "\n";

    const fs::path yy = out_dir / ("yy_" + r.model + ".csv");
    write_text(yy, yy_text(result.y, r.oof));
    written.push_back(yy);
    if (r.in_sample) {
      const fs::path ins = out_dir / ("insample_yy_" + r.model + ".csv");
      write_text(ins, yy_text(result.y, *r.in_sample));
      written.push_back(ins);
    }
  }

  for (const auto& [name, text] : {std::pair{"metrics.csv", &metrics_csv},
                                   std::pair{"predictions.csv", &predictions_csv},
                                   std::pair{"timing.csv", &timing_csv}}) {
    write_text(out_dir / name, *text);
    written.push_back(out_dir / name);
  }
  return written;
}

} // namespace weirflow::experiment
