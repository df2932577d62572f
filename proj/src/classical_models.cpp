#include "weirflow/classical_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "weirflow/errors.hpp"

namespace weirflow::classical {

namespace {

using Eigen::Index;

Index ix(std::size_t v) { return static_cast<Index>(v); }

void check_training_data(const RowMatrix& X, std::span<const double> y, const char* who) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    throw ShapeError(std::string(who) + ": " + std::to_string(X.rows()) + " rows vs " +
                     std::to_string(y.size()) + " targets");
  }
  if (X.rows() == 0) throw ArgumentError(std::string(who) + ": no training rows");
  if (!X.allFinite() ||
      !std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); })) {
    throw ArgumentError(std::string(who) + ": non-finite input");
  }
}

// ---- decision tree --------------------------------------------------------

// Relative slack under which two split costs count as tied.
constexpr double kTieSlack = 1e-12;

class TreeBuilder {
public:
  TreeBuilder(const RowMatrix& X, std::span<const double> y, const TreeOptions& options)
      : X_(X), y_(y), options_(options) {}

  DecisionTree build(std::vector<std::size_t> rows) {
    DecisionTree tree;
    grow(tree, std::move(rows));
    return tree;
  }

private:
  int grow(DecisionTree& tree, std::vector<std::size_t> rows) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    const std::size_t n = rows.size();
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t r : rows) {
      sum += y_[r];
      lo = std::min(lo, y_[r]);
      hi = std::max(hi, y_[r]);
    }
    const double mean = sum / static_cast<double>(n);
    tree.nodes[id].value = mean;
    tree.nodes[id].samples = n;

    if (n < options_.min_samples_split || n < 2 * options_.min_samples_leaf || lo == hi) {
      return id;
    }

    double parent_sse = 0.0;
    for (std::size_t r : rows) parent_sse += (y_[r] - mean) * (y_[r] - mean);

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_sse = parent_sse;
    const double slack = kTieSlack * std::max(parent_sse, 1e-300);

    std::vector<std::size_t> sorted = rows;
    for (Index f = 0; f < X_.cols(); ++f) {
      std::stable_sort(sorted.begin(), sorted.end(),
                       [&](std::size_t a, std::size_t b) { return X_(ix(a), f) < X_(ix(b), f); });
      double left_sum = 0.0;
      double left_sq = 0.0;
      double total_sq = 0.0;
      double total_sum = 0.0;
      for (std::size_t r : sorted) {
        const double d = y_[r] - mean;
        total_sum += d;
        total_sq += d * d;
      }
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = y_[sorted[i]] - mean;
        left_sum += d;
        left_sq += d * d;
        const double x_here = X_(ix(sorted[i]), f);
        const double x_next = X_(ix(sorted[i + 1]), f);
        if (!(x_here < x_next)) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (nl < options_.min_samples_leaf || nr < options_.min_samples_leaf) continue;
        const double right_sum = total_sum - left_sum;
        const double right_sq = total_sq - left_sq;
        const double sse = (left_sq - left_sum * left_sum / static_cast<double>(nl)) +
                           (right_sq - right_sum * right_sum / static_cast<double>(nr));
        if (sse < best_sse - slack) {
          best_sse = sse;
          best_feature = static_cast<int>(f);
          double t = 0.5 * (x_here + x_next);
          if (t >= x_next) t = x_here;
          best_threshold = t;
        }
      }
    }

    if (best_feature < 0) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : rows) {
      (X_(ix(r), best_feature) <= best_threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const int l = grow(tree, std::move(left));
    const int rgt = grow(tree, std::move(right));
    TreeNode& node = tree.nodes[id];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = rgt;
    return id;
  }

  const RowMatrix& X_;
  std::span<const double> y_;
  TreeOptions options_;
};

DecisionTree build_tree(const RowMatrix& X, std::span<const double> y, const TreeOptions& options,
                        std::vector<std::size_t> rows) {
  if (options.min_samples_split < 2) throw ArgumentError("min_samples_split must be >= 2");
  if (options.min_samples_leaf < 1) throw ArgumentError("min_samples_leaf must be >= 1");
  return TreeBuilder(X, y, options).build(std::move(rows));
}

// ---- epsilon-SVR dual solver ----------------------------------------------

constexpr double kTau = 1e-12;

struct SvrSolution {
  std::vector<double> alpha; // 2l entries: first l upper, last l lower
  double rho = 0.0;
  std::size_t iterations = 0;
  double gap = 0.0;
  double objective = 0.0;
};

// Pairwise (SMO) coordinate optimisation with second-order working set
// selection on   min 1/2 a'Qa + p'a   s.t. s'a = 0, 0 <= a <= C,
// where s = (+1..., -1...) and Q_ij = s_i s_j K(i mod l, j mod l).
SvrSolution solve_svr_dual(const Eigen::MatrixXd& K, std::span<const double> y, double C,
                           double epsilon, double tol, std::size_t max_iterations) {
  const std::size_t l = y.size();
  const std::size_t m = 2 * l;
  std::vector<double> s(m);
  std::vector<double> p(m);
  for (std::size_t i = 0; i < l; ++i) {
    s[i] = 1.0;
    s[i + l] = -1.0;
    p[i] = epsilon - y[i];
    p[i + l] = epsilon + y[i];
  }
  auto kern = [&](std::size_t i, std::size_t j) { return K(ix(i % l), ix(j % l)); };
  auto Q = [&](std::size_t i, std::size_t j) { return s[i] * s[j] * kern(i, j); };

  std::vector<double> a(m, 0.0);
  std::vector<double> G = p;
  auto at_upper = [&](std::size_t t) { return a[t] >= C; };
  auto at_lower = [&](std::size_t t) { return a[t] <= 0.0; };

  SvrSolution sol;
  std::size_t iter = 0;
  double gap = 0.0;
  while (true) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i_sel = -1;
    for (std::size_t t = 0; t < m; ++t) {
      if (s[t] > 0) {
        if (!at_upper(t) && -G[t] >= gmax) {
          gmax = -G[t];
          i_sel = static_cast<std::ptrdiff_t>(t);
        }
      } else if (!at_lower(t) && G[t] >= gmax) {
        gmax = G[t];
        i_sel = static_cast<std::ptrdiff_t>(t);
      }
    }
    std::ptrdiff_t j_sel = -1;
    double obj_min = std::numeric_limits<double>::infinity();
    if (i_sel >= 0) {
      const std::size_t i = static_cast<std::size_t>(i_sel);
      for (std::size_t t = 0; t < m; ++t) {
        if (s[t] > 0) {
          if (at_lower(t)) continue;
          const double diff = gmax + G[t];
          gmax2 = std::max(gmax2, G[t]);
          if (diff > 0) {
            double quad = kern(i, i) + kern(t, t) - 2.0 * s[i] * Q(i, t);
            if (quad <= 0) quad = kTau;
            const double obj = -(diff * diff) / quad;
            if (obj <= obj_min) {
              obj_min = obj;
              j_sel = static_cast<std::ptrdiff_t>(t);
            }
          }
        } else {
          if (at_upper(t)) continue;
          const double diff = gmax - G[t];
          gmax2 = std::max(gmax2, -G[t]);
          if (diff > 0) {
            double quad = kern(i, i) + kern(t, t) + 2.0 * s[i] * Q(i, t);
            if (quad <= 0) quad = kTau;
            const double obj = -(diff * diff) / quad;
            if (obj <= obj_min) {
              obj_min = obj;
              j_sel = static_cast<std::ptrdiff_t>(t);
            }
          }
        }
      }
    }
    gap = gmax + gmax2;
    if (i_sel < 0 || j_sel < 0 || gap < tol) break;
    if (iter >= max_iterations) {
      throw ConvergenceError("svr: no convergence after " + std::to_string(max_iterations) +
                             " iterations (gap " + std::to_string(gap) + ")");
    }
    ++iter;

    const std::size_t i = static_cast<std::size_t>(i_sel);
    const std::size_t j = static_cast<std::size_t>(j_sel);
    const double old_i = a[i];
    const double old_j = a[j];
    if (s[i] != s[j]) {
      double quad = kern(i, i) + kern(j, j) + 2.0 * Q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) {
          a[j] = 0;
          a[i] = diff;
        }
      } else if (a[i] < 0) {
        a[i] = 0;
        a[j] = -diff;
      }
      if (diff > 0) {
        if (a[i] > C) {
          a[i] = C;
          a[j] = C - diff;
        }
      } else if (a[j] > C) {
        a[j] = C;
        a[i] = C + diff;
      }
    } else {
      double quad = kern(i, i) + kern(j, j) - 2.0 * Q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > C) {
        if (a[i] > C) {
          a[i] = C;
          a[j] = sum - C;
        }
      } else if (a[j] < 0) {
        a[j] = 0;
        a[i] = sum;
      }
      if (sum > C) {
        if (a[j] > C) {
          a[j] = C;
          a[i] = sum - C;
        }
      } else if (a[i] < 0) {
        a[i] = 0;
        a[j] = sum;
      }
    }
    const double di = a[i] - old_i;
    const double dj = a[j] - old_j;
    for (std::size_t t = 0; t < m; ++t) G[t] += Q(i, t) * di + Q(j, t) * dj;
  }

  // Offset from free multipliers, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -ub;
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < m; ++t) {
    const double yg = s[t] * G[t];
    if (at_upper(t)) {
      if (s[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (s[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  sol.rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (ub + lb);

  double obj = 0.0;
  for (std::size_t t = 0; t < m; ++t) obj += a[t] * (G[t] + p[t]);
  sol.objective = 0.5 * obj;
  sol.alpha = std::move(a);
  sol.iterations = iter;
  sol.gap = gap;
  return sol;
}

double rbf(std::span<const double> a, const RowMatrix& X, Index row, double gamma) {
  double d2 = 0.0;
  for (Index j = 0; j < X.cols(); ++j) {
    const double d = a[static_cast<std::size_t>(j)] - X(row, j);
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

} // namespace

std::string_view token(ModelKind kind) {
  switch (kind) {
  case ModelKind::LR: return "lr";
  case ModelKind::RF: return "rf";
  case ModelKind::SVM: return "svm";
  case ModelKind::KNN: return "knn";
  case ModelKind::DT: return "dt";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view t) {
  for (ModelKind k : {ModelKind::LR, ModelKind::RF, ModelKind::SVM, ModelKind::KNN, ModelKind::DT}) {
    if (token(k) == t) return k;
  }
  throw ArgumentError("unknown classical model '" + std::string(t) + "'");
}

double DecisionTree::predict(std::span<const double> x) const {
  if (nodes.empty()) throw ArgumentError("decision tree has no nodes");
  std::size_t id = 0;
  while (nodes[id].feature >= 0) {
    const TreeNode& node = nodes[id];
    id = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold
                                      ? node.left
                                      : node.right);
  }
  return nodes[id].value;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> depth(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, depth[i]);
    if (nodes[i].feature >= 0) {
      depth[static_cast<std::size_t>(nodes[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes[i].right)] = depth[i] + 1;
    }
  }
  return best;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

double RandomForest::predict(std::span<const double> x) const {
  double sum = 0.0;
  for (const DecisionTree& t : trees) sum += t.predict(x);
  return sum / static_cast<double>(trees.size());
}

std::size_t SvrModel::support_count() const {
  return static_cast<std::size_t>(
      std::count_if(coef.begin(), coef.end(), [](double c) { return c != 0.0; }));
}

double SvrModel::predict(std::span<const double> x) const {
  double out = bias;
  for (std::size_t i = 0; i < coef.size(); ++i) {
    if (coef[i] != 0.0) out += coef[i] * rbf(x, support, ix(i), gamma);
  }
  return out;
}

double Regressor::predict_row(std::span<const double> x) const {
  if (x.size() != features_) {
    throw ShapeError("predict: expected " + std::to_string(features_) + " columns, got " +
                     std::to_string(x.size()));
  }
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LinearModel>) {
          double out = m.intercept;
          for (std::size_t j = 0; j < x.size(); ++j) out += m.weights(ix(j)) * x[j];
          return out;
        } else if constexpr (std::is_same_v<M, KnnModel>) {
          std::vector<std::pair<double, std::size_t>> dist(m.y.size());
          for (std::size_t i = 0; i < m.y.size(); ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) {
              acc += std::pow(std::abs(x[j] - m.X(ix(i), ix(j))), m.p);
            }
            dist[i] = {std::pow(acc, 1.0 / m.p), i};
          }
          std::partial_sort(dist.begin(), dist.begin() + ix(m.k), dist.end());
          double sum = 0.0;
          for (std::size_t i = 0; i < m.k; ++i) sum += m.y[dist[i].second];
          return sum / static_cast<double>(m.k);
        } else {
          return m.predict(x);
        }
      },
      model_);
}

std::vector<double> Regressor::predict(const RowMatrix& X) const {
  if (static_cast<std::size_t>(X.cols()) != features_) {
    throw ShapeError("predict: expected " + std::to_string(features_) + " columns, got " +
                     std::to_string(X.cols()));
  }
  std::vector<double> out(static_cast<std::size_t>(X.rows()));
  std::vector<double> row(features_);
  for (Index i = 0; i < X.rows(); ++i) {
    for (std::size_t j = 0; j < features_; ++j) row[j] = X(i, ix(j));
    out[static_cast<std::size_t>(i)] = predict_row(row);
  }
  return out;
}

std::vector<double> predict(const Regressor& model, const RowMatrix& X) { return model.predict(X); }

Regressor fit_linear_regression(const RowMatrix& X, std::span<const double> y) {
  check_training_data(X, y, "linear regression");
  // owned copy: a map over caller memory would make the reduction order
  // depend on the buffer's alignment
  const Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(y.data(), ix(y.size()));
  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const double y_mean = target.mean();
  const Eigen::MatrixXd centered = X.rowwise() - x_mean;
  const Eigen::VectorXd yc = target.array() - y_mean;

  LinearModel model;
  model.weights = centered.completeOrthogonalDecomposition().solve(yc);
  model.intercept = y_mean - x_mean.dot(model.weights);
  return Regressor(ModelKind::LR, static_cast<std::size_t>(X.cols()), std::move(model));
}

Regressor fit_knn(const RowMatrix& X, std::span<const double> y, const KnnOptions& options) {
  check_training_data(X, y, "knn");
  if (options.k < 1) throw ArgumentError("knn: k must be >= 1");
  if (y.size() < options.k) {
    throw ArgumentError("knn: " + std::to_string(y.size()) + " samples fewer than k = " +
                        std::to_string(options.k));
  }
  if (!(options.p >= 1.0)) throw ArgumentError("knn: Minkowski p must be >= 1");
  KnnModel model{X, std::vector<double>(y.begin(), y.end()), options.k, options.p};
  return Regressor(ModelKind::KNN, static_cast<std::size_t>(X.cols()), std::move(model));
}

Regressor fit_decision_tree(const RowMatrix& X, std::span<const double> y,
                            const TreeOptions& options) {
  check_training_data(X, y, "decision tree");
  std::vector<std::size_t> rows(y.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return Regressor(ModelKind::DT, static_cast<std::size_t>(X.cols()),
                   build_tree(X, y, options, std::move(rows)));
}

Regressor fit_random_forest(const RowMatrix& X, std::span<const double> y,
                            const ForestOptions& options) {
  check_training_data(X, y, "random forest");
  if (y.size() < 2) throw ArgumentError("random forest: needs at least 2 samples");
  if (options.n_estimators < 1) throw ArgumentError("random forest: n_estimators must be >= 1");
  const std::size_t n = y.size();
  RandomForest forest;
  forest.seed = options.seed;
  forest.trees.reserve(options.n_estimators);
  for (std::size_t t = 0; t < options.n_estimators; ++t) {
    std::vector<std::size_t> rows(n);
    if (options.bootstrap) {
      std::seed_seq seq{options.seed, static_cast<std::uint64_t>(t)};
      std::mt19937_64 rng(seq);
      std::uniform_int_distribution<std::size_t> draw(0, n - 1);
      for (std::size_t& r : rows) r = draw(rng);
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    forest.trees.push_back(build_tree(X, y, options.tree, std::move(rows)));
  }
  return Regressor(ModelKind::RF, static_cast<std::size_t>(X.cols()), std::move(forest));
}

double scale_gamma(const RowMatrix& X) {
  const double mean = X.mean();
  const double var = (X.array() - mean).square().mean();
  return var > 0.0 ? 1.0 / (static_cast<double>(X.cols()) * var) : 1.0;
}

Regressor fit_svr(const RowMatrix& X, std::span<const double> y, const SvrOptions& options) {
  check_training_data(X, y, "svr");
  if (!(options.C > 0.0)) throw ArgumentError("svr: C must be > 0");
  if (!(options.epsilon >= 0.0)) throw ArgumentError("svr: epsilon must be >= 0");
  if (!(options.tol > 0.0)) throw ArgumentError("svr: tol must be > 0");
  const double gamma = options.gamma.value_or(scale_gamma(X));
  if (!(gamma > 0.0)) throw ArgumentError("svr: gamma must be > 0");

  const Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  for (Index i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (Index j = 0; j < i; ++j) {
      const double v = std::exp(-gamma * (X.row(i) - X.row(j)).squaredNorm());
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  SvrSolution sol =
      solve_svr_dual(K, y, options.C, options.epsilon, options.tol, options.max_iterations);

  SvrModel model;
  model.support = X;
  const std::size_t l = y.size();
  model.alpha.assign(sol.alpha.begin(), sol.alpha.begin() + ix(l));
  model.alpha_star.assign(sol.alpha.begin() + ix(l), sol.alpha.end());
  model.coef.resize(l);
  for (std::size_t i = 0; i < l; ++i) model.coef[i] = model.alpha[i] - model.alpha_star[i];
  model.bias = -sol.rho;
  model.gamma = gamma;
  model.C = options.C;
  model.epsilon = options.epsilon;
  model.iterations = sol.iterations;
  model.kkt_gap = sol.gap;
  model.objective = sol.objective;
  return Regressor(ModelKind::SVM, static_cast<std::size_t>(X.cols()), std::move(model));
}

Regressor fit(ModelKind kind, const RowMatrix& X, std::span<const double> y, std::uint64_t seed) {
  switch (kind) {
  case ModelKind::LR: return fit_linear_regression(X, y);
  case ModelKind::RF: {
    ForestOptions opts;
    opts.seed = seed;
    return fit_random_forest(X, y, opts);
  }
  case ModelKind::SVM: return fit_svr(X, y);
  case ModelKind::KNN: return fit_knn(X, y);
  case ModelKind::DT: return fit_decision_tree(X, y);
  }
  throw ArgumentError("unknown model kind");
}

} // namespace weirflow::classical
