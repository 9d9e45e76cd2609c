#include "enersave/forest.hpp"

#include <cmath>

#include "enersave/error.hpp"
#include "enersave/parallel.hpp"

namespace enersave {

void validate(const ForestParams& p) {
  if (p.n_trees < 1) throw ConfigError("forest: n_trees must be >= 1");
  if (!(p.max_features_fraction > 0.0 && p.max_features_fraction <= 1.0))
    throw ConfigError("forest: max_features_fraction must be in (0, 1]");
  validate(p.tree);
}

ForestModel fit_forest(const Matrix& X, const std::vector<double>& y,
                       const ForestParams& params, int threads) {
  validate(params);
  if (X.rows() == 0) throw Error("fit_forest: empty data");
  if (X.rows() != y.size()) throw Error("fit_forest: X/y length mismatch");

  const std::size_t d = X.cols();
  const std::size_t mtry = std::min<std::size_t>(
      d, static_cast<std::size_t>(std::ceil(params.max_features_fraction * static_cast<double>(d))));

  ForestModel model;
  model.params = params;
  model.n_features = d;
  model.trees.resize(params.n_trees);

  parallel_for(params.n_trees, threads, [&](std::size_t t) {
    Rng rng(derive_seed(params.seed, t));
    if (params.bootstrap) {
      const std::size_t n = X.rows();
      std::vector<std::size_t> sample(n);
      for (std::size_t i = 0; i < n; ++i)
        sample[i] = static_cast<std::size_t>(rng.next_below(n));
      Matrix Xb = subset_rows(X, sample);
      std::vector<double> yb = subset(y, sample);
      model.trees[t] = fit_tree_sampled(Xb, yb, params.tree, mtry, rng);
    } else {
      model.trees[t] = fit_tree_sampled(X, y, params.tree, mtry, rng);
    }
  });
  return model;
}

std::vector<double> forest_predict(const ForestModel& m, const Matrix& X) {
  if (X.cols() != m.n_features) throw Error("forest_predict: dimension mismatch");
  std::vector<double> out(X.rows(), 0.0);
  for (const auto& tree : m.trees) {
    auto p = tree_predict(tree, X);
    for (std::size_t r = 0; r < X.rows(); ++r) out[r] += p[r];
  }
  for (double& v : out) v /= static_cast<double>(m.trees.size());
  return out;
}

}  // namespace enersave
