#include "weirflow/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "weirflow/data_model.hpp"
#include "weirflow/errors.hpp"
#include "weirflow/experiment.hpp"
#include "weirflow/hydraulics.hpp"
#include "weirflow/metrics.hpp"

namespace weirflow::cli {

namespace {

namespace fs = std::filesystem;

/// Raised for bad flag values detected after CLI11 parsing.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("WEIRFLOW_SEED");
  if (env == nullptr || *env == '\0') return 0;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used);
    if (used != std::string(env).size() || std::string(env)[0] == '-') throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("WEIRFLOW_SEED is not a non-negative integer: '") + env + "'");
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
  return s.substr(b);
}

double parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError(what + ": '" + text + "' is not a number");
  }
}

// ---- generate --------------------------------------------------------------

struct GenerateArgs {
  std::size_t n = 0;
  std::string mode = "bagheri";
  double noise_sd = 0.01;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_generate(const GenerateArgs& a, std::ostream& out) {
  const SyntheticMode mode = parse_synthetic_mode(a.mode);
  const std::uint64_t seed = a.seed.value_or(default_seed());
  out << "generate n=" << a.n << " mode=" << to_string(mode) << " noise_sd=" << a.noise_sd
      << " seed=" << seed << " out=" << a.out << "\n";
  const Dataset data = generate_synthetic(a.n, mode, a.noise_sd, seed);
  write_csv(data, a.out);
  out << "wrote " << data.size() << " samples to " << a.out << "\n";
  return 0;
}

// ---- run -------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::string data;
  std::string models;
  std::size_t folds = 5;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t epochs = 200;
  std::string hybrid;
  bool single_thread = false;
  std::size_t threads = 0;
  bool in_sample = false;
};

struct RunOptions {
  CLI::Option* data;
  CLI::Option* models;
  CLI::Option* folds;
  CLI::Option* out;
  CLI::Option* epochs;
  CLI::Option* hybrid;
  CLI::Option* threads;
};

void print_table(std::ostream& out, const experiment::RunResult& result) {
  out << "\nmodel      status  seconds       mse(pooled)   mape%(pooled) mse(fold-mean) mape%(fold-mean)\n";
  for (const auto& m : result.models) {
    char line[256];
    if (m.ok) {
      std::snprintf(line, sizeof line, "%-10s %-7s %-13.6f %-13.6g %-13.6g %-14.6g %.6g\n",
                    m.model.c_str(), "ok", m.seconds, m.pooled.mse, m.pooled.mape,
                    m.fold_mean.mse, m.fold_mean.mape);
    } else {
      std::snprintf(line, sizeof line, "%-10s %-7s %s\n", m.model.c_str(), "FAILED",
                    m.error.c_str());
    }
    out << line;
  }
}

int run_run(const RunArgs& a, const RunOptions& given, std::ostream& out, std::ostream& err) {
  experiment::ExperimentConfig config;
  if (!a.config.empty()) config = experiment::load_config(a.config);
  if (a.config.empty() || a.seed) config.seed = a.seed.value_or(default_seed());
  if (a.config.empty() && !given.models->count()) {
    config.models.assign(experiment::kAllModels.begin(), experiment::kAllModels.end());
  }
  if (given.data->count()) {
    config.data = a.data;
    config.synthetic.reset();
  }
  if (given.models->count()) config.models = experiment::parse_model_list(a.models);
  if (given.folds->count()) config.folds = a.folds;
  if (given.out->count()) config.out = a.out;
  if (given.epochs->count()) config.epochs = a.epochs;
  if (given.hybrid->count()) config.hybrid = experiment::parse_hybrid_strategy(a.hybrid);
  if (given.threads->count()) config.threads = a.threads;
  if (a.single_thread) config.threads = 1;
  if (a.in_sample) config.in_sample = true;
  config.validate();

  out << "effective config:\n" << experiment::config_to_json(config) << "\n";
  const Dataset data = experiment::load_dataset(config);
  out << "dataset: " << data.size() << " samples\n";

  const experiment::RunResult result = experiment::run_experiment(config, data);
  const auto files = experiment::emit_reports(result, config.out);
  print_table(out, result);
  out << "\nwrote " << files.size() << " files to " << config.out.string() << "\n";
  if (!result.all_ok()) {
    err << "some models failed; see the status table\n";
    return 1;
  }
  return 0;
}

// ---- metrics ---------------------------------------------------------------

struct MetricsArgs {
  std::string file;
  std::string true_col;
  std::string pred_col;
};

int run_metrics(const MetricsArgs& a, std::ostream& out) {
  std::ifstream in(a.file, std::ios::binary);
  if (!in) throw IoError("cannot open " + a.file);
  std::string line;
  if (!std::getline(in, line)) throw UsageError(a.file + " is empty");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const auto header = split(strip(line), ',');
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (strip(header[i]) == name) return i;
    }
    throw UsageError("column '" + name + "' not found in " + a.file);
  };
  const std::size_t ti = column(a.true_col);
  const std::size_t pi = column(a.pred_col);

  std::vector<double> y;
  std::vector<double> yhat;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = strip(line);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() <= std::max(ti, pi)) {
      throw UsageError(a.file + " line " + std::to_string(row) + ": missing columns");
    }
    const std::string where = a.file + " line " + std::to_string(row);
    y.push_back(parse_number(strip(cells[ti]), where));
    yhat.push_back(parse_number(strip(cells[pi]), where));
  }

  const metrics::MetricReport report = metrics::compute_report(y, yhat);
  const auto logs = metrics::log_report(report);
  out << "metrics over " << y.size() << " rows (" << a.true_col << " vs " << a.pred_col << ")\n";
  for (std::size_t i = 0; i < metrics::kAllMetrics.size(); ++i) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "  %-6s %-24.17g log10 %.6g\n",
                  std::string(metrics::metric_name(metrics::kAllMetrics[i])).c_str(),
                  report.values()[i], logs[i]);
    out << buf;
  }
  if (report.clamped_count > 0) {
    out << "  (" << report.clamped_count << " predictions clamped for log metrics)\n";
  }
  std::string head;
  std::string vals;
  for (std::size_t i = 0; i < metrics::kAllMetrics.size(); ++i) {
    head += (i ? "," : "") + std::string(metrics::metric_name(metrics::kAllMetrics[i]));
    vals += (i ? "," : "") + fmt("%.17g", report.values()[i]);
  }
  out << head << "\n" << vals << "\n";
  return 0;
}

// ---- baseline --------------------------------------------------------------

struct BaselineArgs {
  std::string eq;
  std::string params;
};

int run_baseline(const BaselineArgs& a, std::ostream& out) {
  std::map<std::string, double> p;
  for (const std::string& item : split(a.params, ',')) {
    const std::string kv = strip(item);
    if (kv.empty()) continue;
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("parameter '" + kv + "' is not key=value");
    const std::string key = strip(kv.substr(0, eq));
    if (p.count(key)) throw UsageError("parameter '" + key + "' given twice");
    p[key] = parse_number(strip(kv.substr(eq + 1)), "parameter " + key);
  }

  std::vector<std::string> used;
  auto need = [&](const std::string& key) {
    const auto it = p.find(key);
    if (it == p.end()) throw UsageError("--eq " + a.eq + " needs parameter '" + key + "'");
    used.push_back(key);
    return it->second;
  };
  auto maybe = [&](const std::string& key, double fallback) {
    if (!p.count(key)) return fallback;
    used.push_back(key);
    return p[key];
  };

  double value = 0.0;
  std::string label;
  if (a.eq == "eq1") {
    const double g = maybe("g", hydraulics::kGravity);
    double H1 = 0.0;
    if (p.count("H1")) {
      H1 = need("H1");
    } else {
      H1 = hydraulics::total_head(need("h1"), maybe("v", 0.0), g);
    }
    value = hydraulics::discharge_from_cd(need("cd"), need("B"), H1, g);
    label = "Q";
  } else if (a.eq == "bagheri") {
    value = hydraulics::cd_bagheri(need("lambda"), need("h1"), need("L"), need("W"));
    label = "Cd";
  } else if (a.eq == "carollo") {
    value = hydraulics::cd_carollo(need("h1"), need("W"), need("L"), need("W1"));
    label = "Cd";
  } else if (a.eq == "stage") {
    if (p.count("Q") || p.count("b")) {
      value = hydraulics::stage_variable_A(need("Q"), need("b"), need("W"),
                                           maybe("g", hydraulics::kGravity));
    } else {
      value = hydraulics::stage_discharge_A(need("h1"), need("W"), need("L"), need("W1"));
    }
    label = "A";
  } else {
    throw UsageError("unknown --eq '" + a.eq + "' (expected eq1, bagheri, carollo or stage)");
  }
  for (const auto& [key, v] : p) {
    if (std::find(used.begin(), used.end(), key) == used.end()) {
      throw UsageError("--eq " + a.eq + " does not take parameter '" + key + "'");
    }
  }
  out << label << " = " << fmt("%.10g", value) << "\n";
  return 0;
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discharge-coefficient prediction for streamlined weirs", "weirflow"};
  app.require_subcommand(1, 1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic dataset CSV");
  generate->add_option("--n", gen.n, "Number of samples")->required()->check(CLI::PositiveNumber);
  generate->add_option("--mode", gen.mode, "bagheri or linear")->capture_default_str();
  generate->add_option("--noise-sd", gen.noise_sd, "Gaussian noise on Cd")->capture_default_str();
  generate->add_option("--seed", gen.seed, "RNG seed (default: WEIRFLOW_SEED or 0)");
  generate->add_option("--out", gen.out, "Output CSV path")->required();

  RunArgs run;
  RunOptions given{};
  auto* runc = app.add_subcommand("run", "Cross-validate models and write reports");
  runc->add_option("--config", run.config, "JSON experiment config");
  given.data = runc->add_option("--data", run.data, "Dataset CSV");
  given.models = runc->add_option("--models", run.models, "Comma-separated model tokens or 'all'");
  given.folds = runc->add_option("--folds", run.folds, "Number of folds")->capture_default_str();
  runc->add_option("--seed", run.seed, "Master seed (default: WEIRFLOW_SEED or 0)");
  given.out = runc->add_option("--out", run.out, "Output directory");
  given.epochs = runc->add_option("--epochs", run.epochs, "Deep-model epochs")->capture_default_str();
  given.hybrid = runc->add_option("--hybrid", run.hybrid, "average or stacking");
  given.threads = runc->add_option("--threads", run.threads, "Worker threads (0 = all cores)");
  runc->add_flag("--single-thread", run.single_thread, "Deterministic single-threaded run");
  runc->add_flag("--in-sample", run.in_sample, "Also write in-sample YY files");

  MetricsArgs met;
  auto* metricsc = app.add_subcommand("metrics", "Score a prediction column against a target column");
  metricsc->add_option("--file", met.file, "CSV file")->required();
  metricsc->add_option("--true-col", met.true_col, "Observed column")->required();
  metricsc->add_option("--pred-col", met.pred_col, "Predicted column")->required();

  BaselineArgs base;
  auto* baseline = app.add_subcommand("baseline", "Evaluate an algebraic formula");
  baseline->add_option("--eq", base.eq, "eq1, bagheri, carollo or stage")->required();
  baseline->add_option("--params", base.params, "key=value,...")->required();

  std::vector<std::string> argv_store{"weirflow"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& s : argv_store) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << one_line(e.what()) << " (try --help)\n";
    return 2;
  }

  try {
    if (generate->parsed()) return run_generate(gen, out);
    if (runc->parsed()) return run_run(run, given, out, err);
    if (metricsc->parsed()) return run_metrics(met, out);
    if (baseline->parsed()) return run_baseline(base, out);
  } catch (const UsageError& e) {
    err << "usage error: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return 2;
  }
  err << "usage error: no subcommand\n";
  return 2;
}

} // namespace weirflow::cli
