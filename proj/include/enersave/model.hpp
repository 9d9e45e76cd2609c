#pragma once

#include <string>
#include <variant>
#include <vector>

#include "enersave/forest.hpp"
#include "enersave/lasso.hpp"
#include "enersave/tree.hpp"

namespace enersave {

enum class ModelKind { lasso, tree, forest };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct LassoParams {
  double lambda = 0.1;
  double tol = 1e-6;
  std::size_t max_iter = 1000;
};

// One trained regressor behind a common predict contract.
struct TrainedModel {
  std::variant<LassoModel, TreeModel, ForestModel> value;
  std::vector<std::string> feature_names;  // optional; used by reports

  ModelKind kind() const;
};

std::vector<double> predict(const TrainedModel& m, const Matrix& X);

// JSON document round-trip; deserialized models reproduce identical
// predictions bit for bit.
std::string model_to_json(const TrainedModel& m);
TrainedModel model_from_json(const std::string& text);

}  // namespace enersave
