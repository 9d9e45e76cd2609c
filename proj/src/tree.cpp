#include "enersave/tree.hpp"

#include <algorithm>
#include <cmath>

#include "enersave/error.hpp"
#include "enersave/text.hpp"

namespace enersave {

void validate(const TreeParams& p) {
  if (p.max_depth < 1 || p.max_depth > 32)
    throw ConfigError("tree: max_depth must be in [1, 32]");
  if (p.min_samples_split < 2) throw ConfigError("tree: min_samples_split must be >= 2");
  if (p.min_samples_leaf < 1) throw ConfigError("tree: min_samples_leaf must be >= 1");
  if (p.min_impurity_decrease < 0.0)
    throw ConfigError("tree: min_impurity_decrease must be >= 0");
}

std::size_t TreeModel::depth() const {
  if (nodes.empty()) return 0;
  std::size_t max_depth = 0;
  // nodes are emitted parent-before-child, so a forward scan can carry depths
  std::vector<std::size_t> depth(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) {
      max_depth = std::max(max_depth, depth[i]);
      continue;
    }
    depth[static_cast<std::size_t>(nodes[i].left)] = depth[i] + 1;
    depth[static_cast<std::size_t>(nodes[i].right)] = depth[i] + 1;
  }
  return max_depth;
}

std::size_t TreeModel::leaf_count() const {
  std::size_t c = 0;
  for (const auto& n : nodes) c += n.is_leaf() ? 1 : 0;
  return c;
}

std::optional<SplitChoice> best_split(const Matrix& X, const std::vector<double>& y,
                                      const std::vector<std::size_t>& node_indices,
                                      const TreeParams& params,
                                      const std::vector<std::size_t>& candidate_features) {
  const std::size_t n = node_indices.size();
  if (n < params.min_samples_split) return std::nullopt;

  double total_sum = 0.0, total_sq = 0.0;
  for (std::size_t i : node_indices) {
    total_sum += y[i];
    total_sq += y[i] * y[i];
  }
  const double parent_score = total_sum * total_sum / static_cast<double>(n);

  std::vector<std::size_t> all;
  if (candidate_features.empty()) {
    all.resize(X.cols());
    for (std::size_t c = 0; c < X.cols(); ++c) all[c] = c;
  }
  const std::vector<std::size_t>& features = candidate_features.empty() ? all : candidate_features;

  std::optional<SplitChoice> best;
  std::vector<std::pair<double, double>> order(n);  // (x value, y value)

  for (std::size_t f : features) {
    for (std::size_t i = 0; i < n; ++i)
      order[i] = {X.at(node_indices[i], f), y[node_indices[i]]};
    std::sort(order.begin(), order.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    double left_sum = 0.0;
    std::size_t left_n = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_sum += order[i].second;
      ++left_n;
      if (order[i].first == order[i + 1].first) continue;  // not a boundary
      if (left_n < params.min_samples_leaf || n - left_n < params.min_samples_leaf) continue;

      double right_sum = total_sum - left_sum;
      // SSE decrease = sum_l^2/n_l + sum_r^2/n_r - sum^2/n (the Sum(y^2) terms cancel)
      double decrease = left_sum * left_sum / static_cast<double>(left_n) +
                        right_sum * right_sum / static_cast<double>(n - left_n) - parent_score;

      double threshold = (order[i].first + order[i + 1].first) / 2.0;
      if (threshold <= order[i].first) threshold = order[i + 1].first;  // adjacent doubles

      bool better = false;
      if (!best) {
        better = true;
      } else if (decrease > best->sse_decrease) {
        better = true;
      } else if (decrease == best->sse_decrease) {
        if (f < best->feature || (f == best->feature && threshold < best->threshold))
          better = true;
      }
      if (better) best = SplitChoice{f, threshold, decrease};
    }
  }

  if (!best) return std::nullopt;
  if (best->sse_decrease <= 0.0) return std::nullopt;
  if (best->sse_decrease < params.min_impurity_decrease) return std::nullopt;
  return best;
}

namespace {

struct Grower {
  const Matrix& X;
  const std::vector<double>& y;
  const TreeParams& params;
  std::size_t mtry;
  Rng* rng;  // null when mtry == d
  TreeModel model;

  int grow(std::vector<std::size_t>& indices, std::size_t depth) {
    const std::size_t node_id = model.nodes.size();
    model.nodes.emplace_back();

    double sum = 0.0;
    for (std::size_t i : indices) sum += y[i];
    model.nodes[node_id].n = indices.size();
    model.nodes[node_id].prediction = sum / static_cast<double>(indices.size());

    if (depth >= params.max_depth) return static_cast<int>(node_id);

    std::optional<SplitChoice> choice;
    if (rng != nullptr && mtry < X.cols()) {
      auto candidates = sample_distinct(X.cols(), mtry, *rng);
      std::sort(candidates.begin(), candidates.end());
      choice = best_split(X, y, indices, params, candidates);
    } else {
      choice = best_split(X, y, indices, params);
    }
    if (!choice) return static_cast<int>(node_id);

    std::vector<std::size_t> left, right;
    left.reserve(indices.size());
    right.reserve(indices.size());
    for (std::size_t i : indices) {
      if (X.at(i, choice->feature) < choice->threshold) left.push_back(i);
      else right.push_back(i);
    }
    indices.clear();
    indices.shrink_to_fit();

    model.nodes[node_id].feature = static_cast<int>(choice->feature);
    model.nodes[node_id].threshold = choice->threshold;
    int left_id = grow(left, depth + 1);
    int right_id = grow(right, depth + 1);
    model.nodes[node_id].left = left_id;
    model.nodes[node_id].right = right_id;
    return static_cast<int>(node_id);
  }
};

}  // namespace

TreeModel fit_tree(const Matrix& X, const std::vector<double>& y, const TreeParams& params) {
  validate(params);
  if (X.rows() == 0) throw Error("fit_tree: empty data");
  if (X.rows() != y.size()) throw Error("fit_tree: X/y length mismatch");
  for (double v : X.data())
    if (!std::isfinite(v)) throw Error("fit_tree: non-finite input");
  for (double v : y)
    if (!std::isfinite(v)) throw Error("fit_tree: non-finite input");

  Grower grower{X, y, params, X.cols(), nullptr, {}};
  grower.model.params = params;
  grower.model.n_features = X.cols();
  std::vector<std::size_t> indices(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) indices[i] = i;
  grower.grow(indices, 0);
  return std::move(grower.model);
}

TreeModel fit_tree_sampled(const Matrix& X, const std::vector<double>& y,
                           const TreeParams& params, std::size_t mtry, Rng& rng) {
  validate(params);
  if (X.rows() == 0) throw Error("fit_tree: empty data");
  if (mtry < 1 || mtry > X.cols()) throw Error("fit_tree: mtry out of range");

  Grower grower{X, y, params, mtry, &rng, {}};
  grower.model.params = params;
  grower.model.n_features = X.cols();
  std::vector<std::size_t> indices(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) indices[i] = i;
  grower.grow(indices, 0);
  return std::move(grower.model);
}

std::vector<double> tree_predict(const TreeModel& m, const Matrix& X) {
  if (X.cols() != m.n_features) throw Error("tree_predict: dimension mismatch");
  std::vector<double> out(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    std::size_t node = 0;
    while (!m.nodes[node].is_leaf()) {
      double v = X.at(r, static_cast<std::size_t>(m.nodes[node].feature));
      if (!std::isfinite(v)) throw Error("tree_predict: non-finite input");
      node = static_cast<std::size_t>(v < m.nodes[node].threshold ? m.nodes[node].left
                                                                  : m.nodes[node].right);
    }
    out[r] = m.nodes[node].prediction;
  }
  return out;
}

namespace {

void outline_node(const TreeModel& m, std::size_t node, std::size_t indent,
                  const std::vector<std::string>& names, std::string& out) {
  const TreeNode& n = m.nodes[node];
  out.append(indent * 2, ' ');
  if (n.is_leaf()) {
    out += "leaf (n=" + std::to_string(n.n) + ", mean=" + format_double(n.prediction) + ")\n";
    return;
  }
  std::string fname = static_cast<std::size_t>(n.feature) < names.size()
                          ? names[static_cast<std::size_t>(n.feature)]
                          : "f" + std::to_string(n.feature);
  out += "split " + fname + " < " + format_double(n.threshold) + "  (n=" +
         std::to_string(n.n) + ", mean=" + format_double(n.prediction) + ")\n";
  outline_node(m, static_cast<std::size_t>(n.left), indent + 1, names, out);
  outline_node(m, static_cast<std::size_t>(n.right), indent + 1, names, out);
}

}  // namespace

std::string tree_outline(const TreeModel& m, const std::vector<std::string>& feature_names) {
  std::string out;
  if (!m.nodes.empty()) outline_node(m, 0, 0, feature_names, out);
  return out;
}

}  // namespace enersave
