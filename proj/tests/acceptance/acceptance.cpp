// Acceptance checks. Each prints one PASS/FAIL line; the exit status is the
// number of failed checks.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "weirflow/classical_models.hpp"
#include "weirflow/deep_models.hpp"
#include "weirflow/experiment.hpp"
#include "weirflow/hydraulics.hpp"
#include "weirflow/metrics.hpp"
#include "weirflow/nn/layers.hpp"
#include "weirflow/nn/network.hpp"
#include "weirflow/nn/optimizer.hpp"
#include "weirflow/resampling.hpp"

using namespace weirflow;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

/// Collects failed expectations of one check.
struct Probe {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 8) failures.push_back(what);
    if (!ok && failures.size() == 8) failures.push_back("...");
  }
};

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

// ---- 1: metrics -------------------------------------------------------------

void metric_oracles(Probe& p) {
  using metrics::MetricKind;
  using metrics::compute_metric;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> val(0.05, 3.0);
  std::uniform_int_distribution<std::size_t> len(1, 50);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = len(rng);
    std::vector<double> y(n);
    std::vector<double> yhat(n);
    for (auto& v : y) v = val(rng);
    for (auto& v : yhat) v = val(rng);
    for (MetricKind k : metrics::kAllMetrics) {
      worst = std::max(worst, oracle::rel_err(compute_metric(k, y, yhat), oracle::metric(k, y, yhat)));
    }
  }
  p.expect(worst < 1e-12, fmt("oracle rel err %.3g", worst));

  const std::vector<double> a{1, 2};
  const std::vector<double> b{2, 4};
  p.expect(compute_metric(MetricKind::MSE, a, b) == 2.5, "mse hand value");
  p.expect(close(compute_metric(MetricKind::MAPE, a, b), 100.0, 1e-12), "mape hand value");
  p.expect(close(compute_metric(MetricKind::MSLE, std::vector{1.0, 2.718281828},
                                std::vector{2.718281828, 1.0}),
                 1.0, 1e-8),
           "msle hand value");
  p.expect(close(compute_metric(MetricKind::MPD, std::vector{2.0}, std::vector{1.0}), 0.7725887, 1e-7),
           "mpd hand value");
  p.expect(close(compute_metric(MetricKind::MGD, std::vector{2.0}, std::vector{1.0}), 0.6137056, 1e-7),
           "mgd hand value");
  const std::vector<double> y{0.8, 1.1, 1.4};
  for (MetricKind k : metrics::kAllMetrics) {
    p.expect(compute_metric(k, y, y) == 0.0, "perfect prediction " + std::string(metrics::metric_name(k)));
  }
}

// ---- 2: gradients -----------------------------------------------------------

void gradients(Probe& p) {
  using nn::Layer;
  using nn::LayerSpec;
  using nn::Tensor;
  struct Case {
    std::string name;
    LayerSpec spec;
    nn::Shape in;
  };
  const std::vector<Case> cases{
      {"dense", LayerSpec::dense(3), {4}},
      {"conv1d", LayerSpec::conv1d(3, 3), {6, 2}},
      {"lstm", LayerSpec::lstm(4, true), {3, 2}},
      {"lstm-last", LayerSpec::lstm(4, false), {3, 2}},
      {"gru", LayerSpec::gru(4, true), {3, 2}},
      {"gru-last", LayerSpec::gru(4, false), {3, 2}},
  };
  std::uint64_t seed = 100;
  for (const Case& c : cases) {
    Layer layer(c.spec, c.in);
    const double e = oracle::layer_gradcheck(layer, Tensor(c.in), seed++).worst();
    p.expect(e < 1e-5, c.name + fmt(" rel err %.3g", e));
  }
  nn::Network net(deep::build_architecture(deep::Architecture::CnnGru, deep::Widths{4, 4, 3}).layers,
                  {9, 1});
  const double e = oracle::network_gradcheck(net, Tensor({3, 9, 1}), seed).worst();
  p.expect(e < 1e-5, fmt("cnn-gru stack rel err %.3g", e));
}

// ---- 3: adam ----------------------------------------------------------------

void adam(Probe& p) {
  using nn::Tensor;
  nn::TrainConfig config;
  config.lr = 0.001;
  for (double g : {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0}) {
    Tensor w({1}, 0.0);
    Tensor grad({1}, g);
    std::vector<Tensor*> params{&w};
    nn::AdamState state = nn::AdamState::zeros_like(params);
    nn::adam_step(state, params, {&grad}, config);
    const double step = std::fabs(w[0]);
    p.expect(step > 0.000999 && step <= 0.001, fmt("first step %.9g for g = %g", step, g));
  }

  Tensor w({3}, std::vector<double>{2.0, -1.5, 0.7});
  const std::vector<double> target{-0.3, 0.8, 4.0};
  std::vector<Tensor*> params{&w};
  nn::AdamState state = nn::AdamState::zeros_like(params);
  Tensor g({3});
  double dist = 0.0;
  for (int step = 0; step < 20000; ++step) {
    for (std::size_t i = 0; i < 3; ++i) g[i] = 2.0 * (w[i] - target[i]);
    nn::adam_step(state, params, {&g}, config);
  }
  for (std::size_t i = 0; i < 3; ++i) dist += (w[i] - target[i]) * (w[i] - target[i]);
  p.expect(std::sqrt(dist) < 0.05, fmt("bowl distance %.4g", std::sqrt(dist)));
}

// ---- 4: partitions ----------------------------------------------------------

void partitions(Probe& p) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> nd(4, 500);
  std::uniform_int_distribution<std::size_t> kd(2, 10);
  std::uniform_int_distribution<std::uint64_t> sd;
  for (int c = 0; c < 200; ++c) {
    const std::size_t n = nd(rng);
    const std::size_t k = std::min(kd(rng), n);
    const std::uint64_t seed = sd(rng);
    const FoldPlan plan = make_folds(n, k, seed);
    const std::string tag = "n=" + std::to_string(n) + " k=" + std::to_string(k);

    std::vector<int> seen(n, 0);
    std::size_t lo = n;
    std::size_t hi = 0;
    for (std::size_t f = 0; f < k; ++f) {
      const auto idx = plan.fold(f);
      lo = std::min(lo, idx.size());
      hi = std::max(hi, idx.size());
      for (std::size_t i : idx) ++seen[i];
      const FoldSplit split = fold_indices(plan, f);
      p.expect(split.train.size() + split.test.size() == n, tag + " split sizes");
    }
    bool exact = true;
    for (int s : seen) exact = exact && s == 1;
    p.expect(exact, tag + " not a partition");
    p.expect(hi - lo <= 1, tag + " imbalance");
    p.expect(make_folds(n, k, seed).assignments() == plan.assignments(), tag + " not deterministic");
  }
}

// ---- 5: hydraulics ----------------------------------------------------------

void hydraulics_algebra(Probe& p) {
  using namespace hydraulics;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(0.01, 3.0);
  double round = 0.0;
  double combo = 0.0;
  double inversion = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double cd = pos(rng);
    const double B = pos(rng);
    const double H = pos(rng);
    round = std::max(round, oracle::rel_err(cd_from_discharge(discharge_from_cd(cd, B, H), B, H), cd));

    const double h1 = pos(rng);
    const double W = pos(rng);
    const double L = pos(rng);
    const double W1 = pos(rng);
    const double c = cd_carollo(h1, W, L, W1);
    const double A = stage_discharge_A(h1, W, L, W1);
    // A = a h1/W with a = (2/3) cd^(2/3), written out independently
    combo = std::max(combo, oracle::rel_err(2.0 / 3.0 * std::cbrt(c * c) * h1 / W, A));
    const double b = pos(rng);
    inversion = std::max(inversion, oracle::rel_err(stage_variable_A(discharge_from_cd(c, b, h1), b, W), A));
  }
  p.expect(round < 1e-12, fmt("round trip %.3g", round));
  p.expect(combo < 1e-12, fmt("combination identity %.3g", combo));
  p.expect(inversion < 1e-12, fmt("inversion identity %.3g", inversion));

  p.expect(close(discharge_from_cd(1.0, 1.0, 1.0, 9.81), 1.704895, 1e-4), "Q spot value");
  p.expect(close(cd_bagheri(1.0, 0.1, 1.0, 0.5), 0.94673, 1e-4), "bagheri spot value");
  p.expect(close(cd_bagheri(1.2, 0.4, 0.4, 0.4), 1.41282, 1e-4), "bagheri second spot value");
  p.expect(close(stage_discharge_A(0.2, 0.2, 0.2, 0.2), 0.8546, 1e-4), "stage spot value");
  p.expect(close(cd_carollo(0.2, 0.2, 0.2, 0.2), 1.45137, 1e-4), "carollo spot value");
}

// ---- 6: classical models ----------------------------------------------------

RowMatrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RowMatrix X(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) X(i, j) = u(rng);
  return X;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

std::vector<double> row(const RowMatrix& X, Eigen::Index i) {
  return {X.row(i).data(), X.row(i).data() + X.cols()};
}

void classical_oracles(Probe& p) {
  using namespace classical;
  std::mt19937_64 rng(6);

  for (int c = 0; c < 10; ++c) {
    const RowMatrix X = random_matrix(40, 9, rng);
    const std::vector<double> y = random_vector(40, rng);
    const Regressor knn = fit_knn(X, y);
    const RowMatrix Q = random_matrix(20, 9, rng);
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
      p.expect(knn.predict_row(row(Q, i)) == oracle::knn_predict(X, y, 5, row(Q, i)), "knn mismatch");
    }
  }

  for (int c = 0; c < 20; ++c) {
    const RowMatrix X = random_matrix(12, 2, rng);
    const std::vector<double> y = random_vector(12, rng);
    const Regressor dt = fit_decision_tree(X, y);
    const oracle::BruteTree brute{X, y};
    const RowMatrix Q = random_matrix(30, 2, rng);
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
      p.expect(dt.predict_row(row(Q, i)) == brute.predict(row(Q, i)), "tree mismatch on set " + std::to_string(c));
    }
  }

  {
    const RowMatrix X = random_matrix(60, 9, rng);
    const std::vector<double> y = random_vector(60, rng);
    const Regressor lr = fit_linear_regression(X, y);
    const auto pred = lr.predict(X);
    Eigen::VectorXd r(60);
    for (Eigen::Index i = 0; i < 60; ++i) r(i) = y[static_cast<std::size_t>(i)] - pred[static_cast<std::size_t>(i)];
    const double ortho = (X.transpose() * r).cwiseAbs().maxCoeff();
    p.expect(ortho < 1e-8, fmt("orthogonality %.3g", ortho));

    std::vector<double> exact(60);
    const std::vector<double> w{0.5, -1.0, 2.0, 0.0, 3.0, -0.25, 1.0, 0.1, -2.0};
    for (Eigen::Index i = 0; i < 60; ++i) {
      double s = 0.7;
      for (Eigen::Index j = 0; j < 9; ++j) s += w[static_cast<std::size_t>(j)] * X(i, j);
      exact[static_cast<std::size_t>(i)] = s;
    }
    const auto& lm = fit_linear_regression(X, exact).as<LinearModel>();
    double err = std::fabs(lm.intercept - 0.7);
    for (Eigen::Index j = 0; j < 9; ++j) err = std::max(err, std::fabs(lm.weights(j) - w[static_cast<std::size_t>(j)]));
    p.expect(err < 1e-10, fmt("exact recovery %.3g", err));
  }

  for (int c = 0; c < 5; ++c) {
    const RowMatrix X = random_matrix(8, 9, rng);
    std::vector<double> y = random_vector(8, rng);
    for (double& v : y) v *= 1.5;
    const Regressor svr = fit_svr(X, y);
    const SvrModel& s = svr.as<SvrModel>();
    const oracle::QpSolution qp = oracle::svr_dual_qp(oracle::rbf_kernel(X, s.gamma), y, s.C, s.epsilon);
    p.expect(std::fabs(s.objective - qp.objective) < 1e-3,
             fmt("svr objective %.6g vs oracle %.6g", s.objective, qp.objective));
  }
}

// ---- 7 and 8: end-to-end ----------------------------------------------------

experiment::ExperimentConfig reference_config(const fs::path& out) {
  experiment::ExperimentConfig c;
  c.seed = 7;
  c.folds = 5;
  c.models.assign(experiment::kAllModels.begin(), experiment::kAllModels.end());
  c.hybrid = experiment::HybridStrategy::Average;
  c.epochs = 200;
  c.synthetic = experiment::SyntheticSource{120, SyntheticMode::Bagheri, 0.01, 7};
  c.out = out;
  c.threads = 1;
  return c;
}

struct ReferenceRun {
  double seconds = 0.0;
  experiment::RunResult result;
};

ReferenceRun reference_run(const fs::path& out) {
  const auto start = Clock::now();
  const auto config = reference_config(out);
  const Dataset data = experiment::load_dataset(config);
  ReferenceRun r{0.0, experiment::run_experiment(config, data)};
  experiment::emit_reports(r.result, out);
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

void end_to_end(Probe& p, const ReferenceRun& run) {
  const auto& r = run.result;
  p.expect(run.seconds <= 300.0, fmt("run took %.1f s", run.seconds));
  for (const auto& m : r.models) p.expect(m.ok, m.model + " failed: " + m.error);
  if (!r.all_ok()) return;

  const double mape = r.at("lr").pooled.mape;
  p.expect(mape <= 5.0, fmt("lr pooled mape %.4g%%", mape));

  const auto& traces = r.at("cnn-gru").loss_traces;
  std::size_t dropped = 0;
  for (const auto& t : traces) {
    if (t.size() == 200 && t.back() <= t.front() / 10.0) ++dropped;
  }
  p.expect(traces.size() == 5 && dropped >= 4,
           "cnn-gru loss fell tenfold on " + std::to_string(dropped) + " of 5 folds");

  const auto& lr = r.at("lr").oof;
  const auto& cg = r.at("cnn-gru").oof;
  const auto& hy = r.at("lr-cgru").oof;
  double gap = 0.0;
  for (std::size_t i = 0; i < hy.size(); ++i) gap = std::max(gap, std::fabs(hy[i] - (lr[i] + cg[i]) / 2.0));
  p.expect(gap <= 1e-15, fmt("hybrid differs from the mean by %.3g", gap));

  double slowest_classical = 0.0;
  double fastest_deep = 1e300;
  for (const auto& m : r.models) {
    if (experiment::is_classical_model(m.model)) slowest_classical = std::max(slowest_classical, m.seconds);
    if (experiment::is_deep_model(m.model)) fastest_deep = std::min(fastest_deep, m.seconds);
  }
  p.expect(fastest_deep > slowest_classical,
           fmt("fastest deep %.4g s vs slowest classical %.4g s", fastest_deep, slowest_classical));
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void golden_files(Probe& p, const fs::path& first, const fs::path& second) {
  std::vector<std::string> names{"predictions.csv", "metrics.csv"};
  for (const auto& entry : fs::directory_iterator(first)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("yy_", 0) == 0) names.push_back(name);
  }
  p.expect(names.size() == 14, "expected 12 yy files, found " + std::to_string(names.size() - 2));
  for (const std::string& name : names) {
    const fs::path a = first / name;
    const fs::path b = second / name;
    p.expect(fs::exists(b), name + " missing from the second run");
    p.expect(!slurp(a).empty() && slurp(a) == slurp(b), name + " differs");
  }
}

int report(int id, const std::string& name, const std::function<void(Probe&)>& body) {
  Probe probe;
  const auto start = Clock::now();
  try {
    body(probe);
  } catch (const std::exception& e) {
    probe.failures.push_back(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  const bool ok = probe.failures.empty();
  std::printf("%s [%d] %s (%.2f s)\n", ok ? "PASS" : "FAIL", id, name.c_str(), secs);
  for (const std::string& f : probe.failures) std::printf("       %s\n", f.c_str());
  std::fflush(stdout);
  return ok ? 0 : 1;
}

} // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / "weirflow_acceptance";
  fs::remove_all(root);

  int failed = 0;
  failed += report(1, "metric oracle suite", [](Probe& p) {
    const auto t = Clock::now();
    metric_oracles(p);
    p.expect(std::chrono::duration<double>(Clock::now() - t).count() < 1.0, "over 1 s");
  });
  failed += report(2, "gradient suite", [](Probe& p) {
    const auto t = Clock::now();
    gradients(p);
    p.expect(std::chrono::duration<double>(Clock::now() - t).count() < 30.0, "over 30 s");
  });
  failed += report(3, "adam properties", [](Probe& p) {
    const auto t = Clock::now();
    adam(p);
    p.expect(std::chrono::duration<double>(Clock::now() - t).count() < 5.0, "over 5 s");
  });
  failed += report(4, "cross-validation partitions", [](Probe& p) {
    const auto t = Clock::now();
    partitions(p);
    p.expect(std::chrono::duration<double>(Clock::now() - t).count() < 5.0, "over 5 s");
  });
  failed += report(5, "hydraulics algebra", [](Probe& p) {
    const auto t = Clock::now();
    hydraulics_algebra(p);
    p.expect(std::chrono::duration<double>(Clock::now() - t).count() < 1.0, "over 1 s");
  });
  failed += report(6, "classical-model oracles", [](Probe& p) {
    const auto t = Clock::now();
    classical_oracles(p);
    p.expect(std::chrono::duration<double>(Clock::now() - t).count() < 60.0, "over 60 s");
  });

  std::optional<ReferenceRun> first;
  failed += report(7, "end-to-end reference run", [&](Probe& p) {
    first = reference_run(root / "first");
    end_to_end(p, *first);
  });
  failed += report(8, "determinism golden files", [&](Probe& p) {
    if (!first) first = reference_run(root / "first");
    reference_run(root / "second");
    golden_files(p, root / "first", root / "second");
  });

  std::printf("%d of 8 acceptance checks failed\n", failed);
  fs::remove_all(root);
  return failed;
}
