#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "enersave/evaluation.hpp"
#include "enersave/features.hpp"
#include "enersave/model.hpp"
#include "enersave/selection.hpp"
#include "enersave/table.hpp"
#include "enersave/tuning.hpp"

namespace enersave {

struct ForwardParams {
  std::size_t max_features = 0;  // 0 means all features
  double rel_tol = 1e-3;
};

struct ModelDefaults {
  LassoParams lasso;
  TreeParams tree;
  ForestParams forest;  // seed field ignored; derived from the pipeline seed
};

struct GroupedPair {
  std::string group;
  std::string value;
};

struct ScatterSpec {
  std::string x;
  std::string y;
  std::vector<std::string> hues;
};

// Everything a run needs; parsed from the JSON config file. All randomness
// downstream derives from `seed` via derive_seed with documented labels.
struct PipelineConfig {
  std::string input;
  std::map<std::string, ColumnKind> schema_overrides;
  CleaningRules cleaning;
  TransformSpec transform;
  std::vector<std::string> targets;
  std::size_t top_k = 10;
  SplitRatios ratios;
  std::uint64_t seed = 42;
  double threshold_tau = 0.0;

  std::vector<std::string> selectors = {"forward", "ga", "pso"};
  ForwardParams forward;
  GaSelectParams ga_select;
  PsoSelectParams pso_select;
  std::optional<std::uint64_t> fitness_budget;

  std::vector<std::string> models = {"lasso", "tree", "forest"};
  ModelDefaults model_params;

  std::string tuner = "grid";  // grid | ga | none
  std::map<std::string, HyperSpace> grids;  // per model kind; defaults apply when absent
  GaTuneParams ga_tune;
  std::size_t grid_cap = 10000;

  std::string aic_set = "validation";  // train | validation | test
  std::size_t cv_folds = 5;            // 0 disables cross-validation
  double overfit_ratio = 0.25;

  std::string out_dir = "run_out";
  int threads = 0;  // 0 = hardware concurrency; never affects results

  std::vector<GroupedPair> grouped;   // explore: grouped-mean pairs
  std::vector<ScatterSpec> scatters;  // explore: scatter extracts
  bool corr_include_targets = true;
};

PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::string& path);
std::string config_to_json(const PipelineConfig& config);

// FNV-1a over the canonical re-serialized config; changes iff a field does.
std::string config_hash(const PipelineConfig& config);

// Default hyperparameter spaces searched by the tuner.
HyperSpace default_space(ModelKind kind);

// How far `run` executes. Each stage implies the ones before it.
enum class RunStage { prep, select, tune, train, compare };

struct ComboArtifact {
  std::string selector;
  std::string model;
  FeatureMask mask;  // over the full encoded feature list
  double validation_rmse = 0.0;
  double aic = 0.0;
};

struct RunArtifacts {
  std::string out_dir;
  std::string manifest_path;
  std::vector<std::string> comparison_csvs;  // one per target
  std::vector<ComboArtifact> combos;
};

RunArtifacts run(const PipelineConfig& config, RunStage until = RunStage::compare);

// Exploration artifacts (summary, grouped means, correlation matrix,
// scatter extracts) under <out_dir>/explore.
std::vector<std::string> run_explore(const PipelineConfig& config);

// Deterministic demo dataset: mixed categorical/numeric columns, a date
// column, sparse missing cells and three linearly-plus-tree-structured
// targets with noise.
std::string synthetic_csv(std::size_t rows, std::uint64_t seed);
void write_synthetic_csv(const std::string& path, std::size_t rows, std::uint64_t seed);

// Prepared matrix for a config: load, correct, transform, encode.
FeatureMatrix prepare(const PipelineConfig& config);

}  // namespace enersave
