#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "weirflow/data_model.hpp"

namespace weirflow::classical {

enum class ModelKind { LR, RF, SVM, KNN, DT };

/// lr, rf, svm, knn, dt
std::string_view token(ModelKind kind);
ModelKind parse_model_kind(std::string_view token);

struct LinearModel {
  Eigen::VectorXd weights;
  double intercept = 0.0;
};

struct KnnModel {
  RowMatrix X;
  std::vector<double> y;
  std::size_t k = 5;
  double p = 2.0;
};

/// Flat binary tree; a node with feature < 0 is a leaf.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0; ///< mean training target of the node
  std::size_t samples = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  std::size_t depth() const;
  std::size_t leaf_count() const;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
  std::uint64_t seed = 0;

  double predict(std::span<const double> x) const;
};

struct SvrModel {
  RowMatrix support;             ///< training rows
  std::vector<double> alpha;     ///< multipliers of the upper tube constraints
  std::vector<double> alpha_star;///< multipliers of the lower tube constraints
  std::vector<double> coef;      ///< alpha - alpha_star
  double bias = 0.0;
  double gamma = 1.0;
  double C = 1.0;
  double epsilon = 0.1;
  std::size_t iterations = 0;
  double kkt_gap = 0.0;          ///< final max violating-pair gap
  double objective = 0.0;        ///< dual objective at the solution

  std::size_t support_count() const;
  double predict(std::span<const double> x) const;
};

struct KnnOptions {
  std::size_t k = 5;
  double p = 2.0;
};

struct TreeOptions {
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
};

struct ForestOptions {
  std::size_t n_estimators = 100;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  TreeOptions tree;
};

/// Radial-basis epsilon-SVR options. `degree`, `coef0`, `shrinking` and
/// `cache_size` are accepted for configuration parity and have no effect.
struct SvrOptions {
  double C = 1.0;
  double epsilon = 0.1;
  double tol = 1e-3;
  std::optional<double> gamma; ///< empty = 1 / (features * variance of X)
  std::size_t max_iterations = 100000;
  int degree = 3;
  double coef0 = 0.0;
  bool shrinking = true;
  double cache_size = 200.0;
};

/// A fitted model of one of the five classical kinds.
class Regressor {
public:
  using Model = std::variant<LinearModel, KnnModel, DecisionTree, RandomForest, SvrModel>;

  Regressor(ModelKind kind, std::size_t features, Model model)
      : kind_(kind), features_(features), model_(std::move(model)) {}

  ModelKind kind() const noexcept { return kind_; }
  std::size_t feature_count() const noexcept { return features_; }
  const Model& model() const noexcept { return model_; }

  template <typename T>
  const T& as() const {
    return std::get<T>(model_);
  }

  double predict_row(std::span<const double> x) const;
  std::vector<double> predict(const RowMatrix& X) const;

private:
  ModelKind kind_;
  std::size_t features_;
  Model model_;
};

Regressor fit_linear_regression(const RowMatrix& X, std::span<const double> y);
Regressor fit_knn(const RowMatrix& X, std::span<const double> y, const KnnOptions& options = {});
Regressor fit_decision_tree(const RowMatrix& X, std::span<const double> y,
                            const TreeOptions& options = {});
Regressor fit_random_forest(const RowMatrix& X, std::span<const double> y,
                            const ForestOptions& options = {});
Regressor fit_svr(const RowMatrix& X, std::span<const double> y, const SvrOptions& options = {});

/// Fits the given kind with its default hyperparameters.
Regressor fit(ModelKind kind, const RowMatrix& X, std::span<const double> y,
              std::uint64_t seed = 0);

std::vector<double> predict(const Regressor& model, const RowMatrix& X);

/// Default RBF width: 1 / (columns * population variance of every entry of X).
double scale_gamma(const RowMatrix& X);

} // namespace weirflow::classical
