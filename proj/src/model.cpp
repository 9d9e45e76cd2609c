#include "enersave/model.hpp"

#include <json.hpp>

#include "enersave/error.hpp"

namespace enersave {

using json = nlohmann::ordered_json;

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::lasso: return "lasso";
    case ModelKind::tree: return "tree";
    case ModelKind::forest: return "forest";
  }
  return "lasso";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "lasso") return ModelKind::lasso;
  if (s == "tree") return ModelKind::tree;
  if (s == "forest") return ModelKind::forest;
  throw ConfigError("unknown model kind: " + s);
}

ModelKind TrainedModel::kind() const {
  if (std::holds_alternative<LassoModel>(value)) return ModelKind::lasso;
  if (std::holds_alternative<TreeModel>(value)) return ModelKind::tree;
  return ModelKind::forest;
}

std::vector<double> predict(const TrainedModel& m, const Matrix& X) {
  if (const auto* lasso = std::get_if<LassoModel>(&m.value)) return lasso_predict(*lasso, X);
  if (const auto* tree = std::get_if<TreeModel>(&m.value)) return tree_predict(*tree, X);
  return forest_predict(std::get<ForestModel>(m.value), X);
}

namespace {

json tree_params_json(const TreeParams& p) {
  return json{{"max_depth", p.max_depth},
              {"min_samples_split", p.min_samples_split},
              {"min_samples_leaf", p.min_samples_leaf},
              {"min_impurity_decrease", p.min_impurity_decrease}};
}

TreeParams tree_params_from(const json& j) {
  TreeParams p;
  p.max_depth = j.at("max_depth").get<std::size_t>();
  p.min_samples_split = j.at("min_samples_split").get<std::size_t>();
  p.min_samples_leaf = j.at("min_samples_leaf").get<std::size_t>();
  p.min_impurity_decrease = j.at("min_impurity_decrease").get<double>();
  return p;
}

json node_json(const TreeModel& m, std::size_t idx) {
  const TreeNode& n = m.nodes[idx];
  if (n.is_leaf())
    return json{{"type", "leaf"}, {"n", n.n}, {"prediction", n.prediction}};
  return json{{"type", "split"},
              {"feature", n.feature},
              {"threshold", n.threshold},
              {"n", n.n},
              {"mean", n.prediction},
              {"left", node_json(m, static_cast<std::size_t>(n.left))},
              {"right", node_json(m, static_cast<std::size_t>(n.right))}};
}

int node_from(const json& j, TreeModel& m) {
  int idx = static_cast<int>(m.nodes.size());
  m.nodes.emplace_back();
  if (j.at("type") == "leaf") {
    m.nodes[static_cast<std::size_t>(idx)].n = j.at("n").get<std::size_t>();
    m.nodes[static_cast<std::size_t>(idx)].prediction = j.at("prediction").get<double>();
    return idx;
  }
  m.nodes[static_cast<std::size_t>(idx)].feature = j.at("feature").get<int>();
  m.nodes[static_cast<std::size_t>(idx)].threshold = j.at("threshold").get<double>();
  m.nodes[static_cast<std::size_t>(idx)].n = j.at("n").get<std::size_t>();
  m.nodes[static_cast<std::size_t>(idx)].prediction = j.at("mean").get<double>();
  int left = node_from(j.at("left"), m);
  int right = node_from(j.at("right"), m);
  m.nodes[static_cast<std::size_t>(idx)].left = left;
  m.nodes[static_cast<std::size_t>(idx)].right = right;
  return idx;
}

json tree_json(const TreeModel& t) {
  return json{{"params", tree_params_json(t.params)},
              {"n_features", t.n_features},
              {"root", node_json(t, 0)}};
}

TreeModel tree_from(const json& j) {
  TreeModel t;
  t.params = tree_params_from(j.at("params"));
  t.n_features = j.at("n_features").get<std::size_t>();
  node_from(j.at("root"), t);
  return t;
}

}  // namespace

std::string model_to_json(const TrainedModel& m) {
  json j;
  j["kind"] = to_string(m.kind());
  if (!m.feature_names.empty()) j["feature_names"] = m.feature_names;

  if (const auto* lasso = std::get_if<LassoModel>(&m.value)) {
    j["lambda"] = lasso->lambda;
    j["intercept"] = lasso->intercept;
    j["coefficients"] = lasso->coefficients;
    j["standardization"] = json{{"mean", lasso->feature_mean}, {"scale", lasso->feature_scale}};
  } else if (const auto* tree = std::get_if<TreeModel>(&m.value)) {
    j["tree"] = tree_json(*tree);
  } else {
    const auto& forest = std::get<ForestModel>(m.value);
    j["params"] = json{{"n_trees", forest.params.n_trees},
                       {"bootstrap", forest.params.bootstrap},
                       {"max_features_fraction", forest.params.max_features_fraction},
                       {"seed", forest.params.seed},
                       {"tree", tree_params_json(forest.params.tree)}};
    j["n_features"] = forest.n_features;
    json trees = json::array();
    for (const auto& t : forest.trees) trees.push_back(tree_json(t));
    j["trees"] = std::move(trees);
  }
  return j.dump(2);
}

TrainedModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("model json: ") + e.what());
  }
  TrainedModel out;
  try {
    if (j.contains("feature_names"))
      out.feature_names = j.at("feature_names").get<std::vector<std::string>>();

    ModelKind kind = model_kind_from_string(j.at("kind").get<std::string>());
    if (kind == ModelKind::lasso) {
      LassoModel m;
      m.lambda = j.at("lambda").get<double>();
      m.intercept = j.at("intercept").get<double>();
      m.coefficients = j.at("coefficients").get<std::vector<double>>();
      m.feature_mean = j.at("standardization").at("mean").get<std::vector<double>>();
      m.feature_scale = j.at("standardization").at("scale").get<std::vector<double>>();
      out.value = std::move(m);
    } else if (kind == ModelKind::tree) {
      out.value = tree_from(j.at("tree"));
    } else {
      ForestModel m;
      m.params.n_trees = j.at("params").at("n_trees").get<std::size_t>();
      m.params.bootstrap = j.at("params").at("bootstrap").get<bool>();
      m.params.max_features_fraction = j.at("params").at("max_features_fraction").get<double>();
      m.params.seed = j.at("params").at("seed").get<std::uint64_t>();
      m.params.tree = tree_params_from(j.at("params").at("tree"));
      m.n_features = j.at("n_features").get<std::size_t>();
      for (const auto& t : j.at("trees")) m.trees.push_back(tree_from(t));
      out.value = std::move(m);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("model json: ") + e.what());
  }
  return out;
}

}  // namespace enersave
