#pragma once

#include <cstdint>
#include <vector>

#include "enersave/tree.hpp"

namespace enersave {

struct ForestParams {
  std::size_t n_trees = 100;
  bool bootstrap = true;
  double max_features_fraction = 1.0;  // per-split candidate fraction, in (0, 1]
  TreeParams tree;
  std::uint64_t seed = 0;
};

void validate(const ForestParams& p);

// Bagged regression trees. Prediction is the unweighted mean of the member
// trees. Per-tree seeds derive from the forest seed with derive_seed(seed,
// tree_index), so parallel and serial builds produce the same model.
struct ForestModel {
  std::vector<TreeModel> trees;
  ForestParams params;
  std::size_t n_features = 0;
};

ForestModel fit_forest(const Matrix& X, const std::vector<double>& y,
                       const ForestParams& params, int threads = 1);

std::vector<double> forest_predict(const ForestModel& m, const Matrix& X);

}  // namespace enersave
