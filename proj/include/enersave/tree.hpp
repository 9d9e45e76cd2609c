#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "enersave/matrix.hpp"
#include "enersave/rng.hpp"

namespace enersave {

struct TreeParams {
  std::size_t max_depth = 32;  // hard cap 32
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  double min_impurity_decrease = 0.0;
};

void validate(const TreeParams& p);

// Flat node storage; root at index 0. Leaves have left == -1.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double prediction = 0.0;  // mean of training targets routed here
  std::size_t n = 0;        // training sample count

  bool is_leaf() const { return left < 0; }
};

struct TreeModel {
  std::vector<TreeNode> nodes;
  TreeParams params;
  std::size_t n_features = 0;

  std::size_t depth() const;
  std::size_t leaf_count() const;
};

struct SplitChoice {
  std::size_t feature = 0;
  double threshold = 0.0;
  double sse_decrease = 0.0;
};

// Exhaustive search over midpoints of consecutive distinct sorted feature
// values, maximizing the weighted SSE decrease subject to min_samples_leaf.
// Ties break to the lowest feature index, then the lowest threshold.
// Returns nothing when no split achieves a positive decrease of at least
// min_impurity_decrease. `candidate_features` restricts the search (used
// for per-split subsampling in forests); empty means all features.
std::optional<SplitChoice> best_split(const Matrix& X, const std::vector<double>& y,
                                      const std::vector<std::size_t>& node_indices,
                                      const TreeParams& params,
                                      const std::vector<std::size_t>& candidate_features = {});

TreeModel fit_tree(const Matrix& X, const std::vector<double>& y, const TreeParams& params);

// Forest internals: grows a tree whose splits draw `mtry` candidate
// features per split from `rng` (no subsampling when mtry == d).
TreeModel fit_tree_sampled(const Matrix& X, const std::vector<double>& y,
                           const TreeParams& params, std::size_t mtry, Rng& rng);

// Routing: value < threshold goes left, >= goes right.
std::vector<double> tree_predict(const TreeModel& m, const Matrix& X);

// Indented text outline with per-node sample counts and means. Feature
// names fall back to f<i> when not supplied.
std::string tree_outline(const TreeModel& m, const std::vector<std::string>& feature_names = {});

}  // namespace enersave
