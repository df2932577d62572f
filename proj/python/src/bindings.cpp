#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "weirflow/classical_models.hpp"
#include "weirflow/cli.hpp"
#include "weirflow/data_model.hpp"
#include "weirflow/deep_models.hpp"
#include "weirflow/errors.hpp"
#include "weirflow/experiment.hpp"
#include "weirflow/hydraulics.hpp"
#include "weirflow/metrics.hpp"
#include "weirflow/nn/network.hpp"
#include "weirflow/resampling.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace weirflow;

namespace {

py::dict report_dict(const metrics::MetricReport& r) {
  py::dict d;
  for (metrics::MetricKind k : metrics::kAllMetrics) {
    d[py::str(std::string(metrics::metric_name(k)))] = r.value(k);
  }
  d["clamped_count"] = r.clamped_count;
  return d;
}

metrics::MetricKind metric_kind(const std::string& name) {
  for (metrics::MetricKind k : metrics::kAllMetrics) {
    if (metrics::metric_name(k) == name) return k;
  }
  throw ArgumentError("unknown metric '" + name + "'");
}

py::list dataset_rows(const Dataset& d) {
  py::list rows;
  for (const WeirSample& s : d.samples()) {
    py::dict row;
    const FeatureVector f = s.features();
    for (std::size_t j = 0; j < kFeatureCount; ++j) row[py::str(std::string(kFeatureNames[j]))] = f[j];
    row["Cd"] = s.cd ? py::cast(*s.cd) : py::none();
    rows.append(row);
  }
  return rows;
}

std::vector<double> classical_fit_predict(const std::string& kind, const RowMatrix& X,
                                          const std::vector<double>& y, const RowMatrix& X_test,
                                          std::uint64_t seed) {
  const auto model = classical::fit(classical::parse_model_kind(kind), X, y, seed);
  return model.predict(X_test);
}

py::dict deep_fit_predict(const std::string& arch, const RowMatrix& X, const std::vector<double>& y,
                          const RowMatrix& X_test, std::size_t epochs, std::uint64_t seed) {
  const auto rows = static_cast<std::size_t>(X.rows());
  const auto cols = static_cast<std::size_t>(X.cols());
  const nn::Tensor train_x = deep::encode_batch({X.data(), rows * cols}, rows, cols);
  const nn::Tensor test_x = deep::encode_batch(
      {X_test.data(), static_cast<std::size_t>(X_test.size())},
      static_cast<std::size_t>(X_test.rows()), cols);
  nn::TrainConfig config;
  config.epochs = epochs;
  config.seed = seed;
  std::optional<nn::TrainResult> result;
  {
    py::gil_scoped_release release;
    result = nn::train(deep::build_architecture(arch).layers, train_x, y, config);
  }
  py::dict out;
  out["predictions"] = nn::predict_batch(result->net, test_x);
  out["loss_trace"] = result->loss_trace;
  return out;
}

py::dict run(const std::string& config_json) {
  const experiment::ExperimentConfig config = experiment::parse_config(config_json);
  const Dataset data = experiment::load_dataset(config);
  experiment::RunResult result;
  {
    py::gil_scoped_release release;
    result = experiment::run_experiment(config, data);
  }
  const auto files = experiment::emit_reports(result, config.out);
  py::dict models;
  for (const auto& m : result.models) {
    py::dict d;
    d["ok"] = m.ok;
    d["error"] = m.error;
    d["oof"] = m.oof;
    d["seconds"] = m.seconds;
    d["pooled"] = report_dict(m.pooled);
    d["fold_mean"] = report_dict(m.fold_mean);
    d["loss_traces"] = m.loss_traces;
    models[py::str(m.model)] = d;
  }
  py::dict out;
  out["models"] = models;
  out["y"] = result.y;
  out["folds"] = result.plan.assignments();
  std::vector<std::string> paths;
  for (const auto& p : files) paths.push_back(p.string());
  out["files"] = paths;
  return out;
}

py::tuple cli_main(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = cli::dispatch(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Discharge-coefficient prediction for streamlined weirs";

  py::register_exception<Error>(m, "WeirflowError", PyExc_ValueError);

  m.def("compute_metric",
        [](const std::string& name, const std::vector<double>& y, const std::vector<double>& yhat) {
          return metrics::compute_metric(metric_kind(name), y, yhat);
        },
        "name"_a, "y"_a, "yhat"_a);
  m.def("compute_report",
        [](const std::vector<double>& y, const std::vector<double>& yhat) {
          return report_dict(metrics::compute_report(y, yhat));
        },
        "y"_a, "yhat"_a);

  m.def("total_head", &hydraulics::total_head, "h1"_a, "v"_a, "g"_a = hydraulics::kGravity);
  m.def("discharge_from_cd", &hydraulics::discharge_from_cd, "cd"_a, "B"_a, "H1"_a,
        "g"_a = hydraulics::kGravity);
  m.def("cd_from_discharge", &hydraulics::cd_from_discharge, "Q"_a, "B"_a, "H1"_a,
        "g"_a = hydraulics::kGravity);
  m.def("cd_bagheri", &hydraulics::cd_bagheri, "lam"_a, "h1"_a, "L"_a, "W"_a);
  m.def("stage_variable_A", &hydraulics::stage_variable_A, "Q"_a, "b"_a, "W"_a,
        "g"_a = hydraulics::kGravity);
  m.def("stage_discharge_A", &hydraulics::stage_discharge_A, "h1"_a, "W"_a, "L"_a, "W1"_a);
  m.def("cd_carollo", &hydraulics::cd_carollo, "h1"_a, "W"_a, "L"_a, "W1"_a);

  m.def("make_folds",
        [](std::size_t n, std::size_t k, std::uint64_t seed) { return make_folds(n, k, seed).assignments(); },
        "n"_a, "k"_a, "seed"_a = 0, "Fold index of each sample.");

  m.def("generate_synthetic",
        [](std::size_t n, const std::string& mode, double noise_sd, std::uint64_t seed) {
          return dataset_rows(generate_synthetic(n, parse_synthetic_mode(mode), noise_sd, seed));
        },
        "n"_a, "mode"_a = "bagheri", "noise_sd"_a = 0.01, "seed"_a = 0);
  m.def("synthetic_csv",
        [](std::size_t n, const std::string& mode, double noise_sd, std::uint64_t seed) {
          return to_csv(generate_synthetic(n, parse_synthetic_mode(mode), noise_sd, seed));
        },
        "n"_a, "mode"_a = "bagheri", "noise_sd"_a = 0.01, "seed"_a = 0);
  m.def("load_csv", [](const std::string& path) { return dataset_rows(load_csv(path)); }, "path"_a);

  m.def("classical_fit_predict", &classical_fit_predict, "kind"_a, "X"_a, "y"_a, "X_test"_a,
        "seed"_a = 0);
  m.def("deep_fit_predict", &deep_fit_predict, "architecture"_a, "X"_a, "y"_a, "X_test"_a,
        "epochs"_a = 200, "seed"_a = 0);
  m.def("hybrid_average",
        [](const std::vector<double>& a, const std::vector<double>& b) {
          return experiment::hybrid_average(a, b);
        },
        "lr_oof"_a, "cgru_oof"_a);

  m.def("run_experiment", &run, "config_json"_a,
        "Runs a cross-validated experiment from a JSON config and writes its reports.");
  m.def("cli", &cli_main, "args"_a, "Runs a command line; returns (exit_code, stdout, stderr).");

  m.attr("MODELS") = std::vector<std::string>(experiment::kAllModels.begin(), experiment::kAllModels.end());
  m.attr("__version__") = "0.1.0";
}
