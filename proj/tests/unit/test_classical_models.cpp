#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "weirflow/classical_models.hpp"
#include "weirflow/errors.hpp"

using namespace weirflow;
using namespace weirflow::classical;

namespace {

RowMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                        double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  RowMatrix X(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) X(i, j) = u(rng);
  }
  return X;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0,
                                  double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

std::vector<double> row(const RowMatrix& X, Eigen::Index i) {
  return std::vector<double>(X.row(i).data(), X.row(i).data() + X.cols());
}

double training_mse(const Regressor& m, const RowMatrix& X, const std::vector<double>& y) {
  const auto p = m.predict(X);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (p[i] - y[i]) * (p[i] - y[i]);
  return s / static_cast<double>(y.size());
}

} // namespace

TEST_SUITE("classical_models") {

TEST_CASE("model tokens") {
  for (ModelKind k : {ModelKind::LR, ModelKind::RF, ModelKind::SVM, ModelKind::KNN, ModelKind::DT}) {
    CHECK(parse_model_kind(token(k)) == k);
  }
  CHECK_THROWS_AS(parse_model_kind("xgb"), ArgumentError);
}

TEST_CASE("linear regression: exact line") {
  RowMatrix X(3, 1);
  X << 0, 1, 2;
  const std::vector<double> y{1, 3, 5};
  const Regressor m = fit_linear_regression(X, y);
  const auto& lm = m.as<LinearModel>();
  CHECK(lm.weights(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(lm.intercept == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::fabs(m.predict(X)[i] - y[i]) < 1e-10);
  RowMatrix q(1, 1);
  q << 5;
  CHECK(std::fabs(m.predict(q)[0] - 11.0) < 1e-9);
}

TEST_CASE("linear regression: constant target") {
  std::mt19937_64 rng(1);
  const RowMatrix X = random_matrix(20, 9, rng);
  const std::vector<double> y(20, 0.85);
  const Regressor m = fit_linear_regression(X, y);
  CHECK(m.as<LinearModel>().weights.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(m.as<LinearModel>().intercept == doctest::Approx(0.85).epsilon(1e-12));
}

TEST_CASE("linear regression: residual orthogonality and local optimality") {
  std::mt19937_64 rng(2);
  const RowMatrix X = random_matrix(50, 9, rng);
  const std::vector<double> y = random_vector(50, rng);
  const Regressor m = fit_linear_regression(X, y);
  const auto p = m.predict(X);
  Eigen::VectorXd r(50);
  for (Eigen::Index i = 0; i < 50; ++i) r(i) = y[static_cast<std::size_t>(i)] - p[static_cast<std::size_t>(i)];
  CHECK((X.transpose() * r).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(std::fabs(r.sum()) < 1e-8);

  const double base = training_mse(m, X, y);
  const LinearModel lm = m.as<LinearModel>();
  for (Eigen::Index j = 0; j < 9; ++j) {
    for (double d : {-1e-3, 1e-3}) {
      LinearModel moved = lm;
      moved.weights(j) += d;
      const Regressor other(ModelKind::LR, 9, moved);
      CHECK(training_mse(other, X, y) >= base);
    }
  }
}

TEST_CASE("linear regression: rank deficiency and bad input") {
  std::mt19937_64 rng(3);
  RowMatrix X = random_matrix(10, 3, rng);
  X.col(2) = X.col(0); // duplicated column
  std::vector<double> y(10);
  for (Eigen::Index i = 0; i < 10; ++i) y[static_cast<std::size_t>(i)] = 2 * X(i, 0) - X(i, 1) + 0.5;
  const Regressor m = fit_linear_regression(X, y);
  const auto& w = m.as<LinearModel>().weights;
  CHECK(w(0) == doctest::Approx(1.0).epsilon(1e-10)); // minimum norm splits the weight
  CHECK(w(2) == doctest::Approx(1.0).epsilon(1e-10));
  X(0, 0) = NAN;
  CHECK_THROWS_AS(fit_linear_regression(X, y), ArgumentError);
}

TEST_CASE("knn behaviour") {
  std::mt19937_64 rng(4);
  const RowMatrix X = random_matrix(30, 9, rng);
  const std::vector<double> y = random_vector(30, rng, 0.5, 1.5);

  const Regressor one = fit_knn(X, y, {1, 2.0});
  CHECK(one.predict_row(row(X, 7)) == y[7]);

  const Regressor all = fit_knn(X, y, {30, 2.0});
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 30.0;
  CHECK(all.predict_row(row(X, 0)) == doctest::Approx(mean).epsilon(1e-14));

  const Regressor five = fit_knn(X, y);
  const RowMatrix Q = random_matrix(25, 9, rng);
  const auto preds = five.predict(Q);
  for (Eigen::Index i = 0; i < 25; ++i) {
    CHECK(preds[static_cast<std::size_t>(i)] == oracle::knn_predict(X, y, 5, row(Q, i)));
    CHECK(preds[static_cast<std::size_t>(i)] >= *std::min_element(y.begin(), y.end()));
    CHECK(preds[static_cast<std::size_t>(i)] <= *std::max_element(y.begin(), y.end()));
  }
  CHECK_THROWS_AS(fit_knn(random_matrix(3, 2, rng), std::vector<double>(3, 1.0)), ArgumentError);
}

TEST_CASE("knn ties go to the lower index") {
  RowMatrix X(3, 1);
  X << 1, -1, 1;
  const Regressor m = fit_knn(X, std::vector<double>{10, 20, 30}, {1, 2.0});
  CHECK(m.predict_row(std::vector<double>{0.0}) == 10.0);
}

TEST_CASE("decision tree: separable pair and pure root") {
  RowMatrix X(2, 1);
  X << 0, 1;
  const Regressor m = fit_decision_tree(X, std::vector<double>{0, 10});
  CHECK(m.as<DecisionTree>().leaf_count() == 2);
  CHECK(m.as<DecisionTree>().nodes[0].threshold == 0.5);
  CHECK(training_mse(m, X, {0, 10}) == 0.0);

  std::mt19937_64 rng(5);
  const RowMatrix Z = random_matrix(10, 3, rng);
  const Regressor pure = fit_decision_tree(Z, std::vector<double>(10, 0.9));
  CHECK(pure.as<DecisionTree>().nodes.size() == 1);
  CHECK(pure.predict_row(row(Z, 0)) == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("decision tree matches the exhaustive oracle") {
  std::mt19937_64 rng(6);
  for (int c = 0; c < 20; ++c) {
    const RowMatrix X = random_matrix(12, 2, rng);
    const std::vector<double> y = random_vector(12, rng);
    const Regressor m = fit_decision_tree(X, y);
    const oracle::BruteTree brute{X, y};
    for (Eigen::Index i = 0; i < 12; ++i) {
      CHECK(m.predict_row(row(X, i)) == brute.predict(row(X, i)));
      CHECK(m.predict_row(row(X, i)) == y[static_cast<std::size_t>(i)]);
    }
    const RowMatrix Q = random_matrix(20, 2, rng, -1.2, 1.2);
    for (Eigen::Index i = 0; i < 20; ++i) CHECK(m.predict_row(row(Q, i)) == brute.predict(row(Q, i)));
  }
}

TEST_CASE("decision tree honours leaf and split minimums") {
  std::mt19937_64 rng(7);
  const RowMatrix X = random_matrix(40, 3, rng);
  const std::vector<double> y = random_vector(40, rng);
  const Regressor m = fit_decision_tree(X, y, {10, 4});
  for (const TreeNode& n : m.as<DecisionTree>().nodes) {
    CHECK(n.samples >= 4);
    if (n.feature >= 0) CHECK(n.samples >= 10);
  }
  const oracle::BruteTree brute{X, y, 10, 4};
  for (Eigen::Index i = 0; i < 40; ++i) CHECK(m.predict_row(row(X, i)) == brute.predict(row(X, i)));

  // deeper trees (smaller leaves) fit the training data at least as well
  double prev = 1e300;
  for (std::size_t leaf : {20u, 10u, 5u, 2u, 1u}) {
    const double mse = training_mse(fit_decision_tree(X, y, {2, leaf}), X, y);
    CHECK(mse <= prev + 1e-15);
    prev = mse;
  }
  CHECK(prev == 0.0);
}

TEST_CASE("random forest properties") {
  std::mt19937_64 rng(8);
  const RowMatrix X = random_matrix(40, 9, rng);
  const std::vector<double> y = random_vector(40, rng);

  ForestOptions single;
  single.n_estimators = 1;
  single.bootstrap = false;
  const Regressor f1 = fit_random_forest(X, y, single);
  const Regressor dt = fit_decision_tree(X, y);
  const RowMatrix Q = random_matrix(15, 9, rng);
  CHECK(f1.predict(Q) == dt.predict(Q));

  ForestOptions opts;
  opts.seed = 99;
  const Regressor f = fit_random_forest(X, y, opts);
  const auto& forest = f.as<RandomForest>();
  CHECK(forest.trees.size() == 100);
  for (Eigen::Index i = 0; i < Q.rows(); ++i) {
    const auto q = row(Q, i);
    double sum = 0.0;
    double lo = 1e300;
    double hi = -1e300;
    for (const DecisionTree& t : forest.trees) {
      const double v = t.predict(q);
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double p = f.predict_row(q);
    CHECK(std::fabs(p - sum / 100.0) <= 1e-15);
    CHECK(p >= lo);
    CHECK(p <= hi);
  }
  const Regressor again = fit_random_forest(X, y, opts);
  CHECK(again.predict(Q) == f.predict(Q));
  opts.seed = 100;
  CHECK(fit_random_forest(X, y, opts).predict(Q) != f.predict(Q));
}

TEST_CASE("svr: flat tube solutions") {
  std::mt19937_64 rng(9);
  const RowMatrix X = random_matrix(15, 9, rng);
  const Regressor flat = fit_svr(X, std::vector<double>(15, 0.9));
  CHECK(flat.as<SvrModel>().support_count() == 0);
  const RowMatrix Q = random_matrix(5, 9, rng);
  for (double p : flat.predict(Q)) CHECK(p == doctest::Approx(0.9).epsilon(1e-12));

  std::vector<double> y = random_vector(15, rng, 0.85, 0.95);
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 15.0;
  const Regressor tube = fit_svr(X, y);
  CHECK(tube.as<SvrModel>().support_count() == 0);
  for (double p : tube.predict(Q)) {
    CHECK(p >= *std::min_element(y.begin(), y.end()) - 1e-12);
    CHECK(p <= *std::max_element(y.begin(), y.end()) + 1e-12);
  }
  (void)mean;
}

TEST_CASE("svr matches a dense QP oracle and satisfies KKT") {
  std::mt19937_64 rng(10);
  for (int c = 0; c < 4; ++c) {
    const RowMatrix X = random_matrix(8, 9, rng);
    const std::vector<double> y = random_vector(8, rng, -1.5, 1.5);
    const Regressor m = fit_svr(X, y);
    const SvrModel& s = m.as<SvrModel>();
    const Eigen::MatrixXd K = oracle::rbf_kernel(X, s.gamma);
    const oracle::QpSolution qp = oracle::svr_dual_qp(K, y, 1.0, 0.1);
    CHECK(std::fabs(s.objective - qp.objective) < 1e-3);
    CHECK(s.kkt_gap < 1e-3);
    double balance = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(s.alpha[i] >= 0.0);
      CHECK(s.alpha[i] <= 1.0);
      CHECK(s.alpha_star[i] >= 0.0);
      CHECK(s.alpha_star[i] <= 1.0);
      balance += s.coef[i];
    }
    CHECK(std::fabs(balance) < 1e-10);
    // complementarity: residuals outside the tube only at bounded multipliers
    const auto p = m.predict(X);
    for (std::size_t i = 0; i < 8; ++i) {
      const double r = y[i] - p[i];
      if (s.coef[i] == 0.0) CHECK(std::fabs(r) <= 0.1 + 1e-2);
      if (std::fabs(r) > 0.1 + 1e-2) CHECK(std::fabs(s.coef[i]) == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("svr gamma and errors") {
  RowMatrix X(2, 2);
  X << 0, 0, 2, 2;
  CHECK(scale_gamma(X) == doctest::Approx(1.0 / (2 * 1.0)));
  CHECK(scale_gamma(RowMatrix::Ones(3, 2)) == 1.0);
  SvrOptions capped;
  capped.max_iterations = 1;
  std::mt19937_64 rng(11);
  const RowMatrix Z = random_matrix(20, 3, rng);
  CHECK_THROWS_AS(fit_svr(Z, random_vector(20, rng, -3, 3), capped), ConvergenceError);
}

TEST_CASE("prediction checks the column count") {
  std::mt19937_64 rng(12);
  const RowMatrix X = random_matrix(10, 9, rng);
  const Regressor m = fit(ModelKind::LR, X, random_vector(10, rng));
  CHECK_THROWS_AS(m.predict(random_matrix(2, 8, rng)), ShapeError);
  CHECK_THROWS_AS(predict(m, random_matrix(2, 10, rng)), ShapeError);
}

} // TEST_SUITE
