#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "enersave/error.hpp"
#include "enersave/model.hpp"
#include "enersave/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int threads = -1;
  std::string target;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Pipeline config JSON")->required();
  cmd->add_option("--seed", opts.seed, "Override the config seed");
  cmd->add_option("--out", opts.out_dir, "Override the output directory");
  cmd->add_option("--threads", opts.threads, "Worker thread cap (0 = hardware)");
  cmd->add_option("--target", opts.target, "Run a single target column");
}

enersave::PipelineConfig load_with_overrides(const CommonOpts& opts) {
  enersave::PipelineConfig config = enersave::load_config(opts.config_path);
  if (opts.seed) config.seed = *opts.seed;
  if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
  if (opts.threads >= 0) config.threads = opts.threads;
  if (!opts.target.empty()) {
    bool known = false;
    for (const auto& t : config.targets) known = known || t == opts.target;
    if (!known) throw enersave::ConfigError("--target: '" + opts.target + "' not in config targets");
    config.targets = {opts.target};
  }
  return config;
}

int run_stage(const CommonOpts& opts, enersave::RunStage stage) {
  auto config = load_with_overrides(opts);
  auto artifacts = enersave::run(config, stage);
  std::cout << "artifacts written to " << artifacts.out_dir << "\n";
  for (const auto& p : artifacts.comparison_csvs) std::cout << "comparison: " << p << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"enersave - building energy savings regression pipeline"};
  app.require_subcommand(1);

  CommonOpts prep_opts, explore_opts, select_opts, tune_opts, train_opts, compare_opts, run_opts;
  add_common(app.add_subcommand("prep", "Prepare the dataset: clean, encode, split"), prep_opts);
  add_common(app.add_subcommand("explore", "Emit exploration statistics as CSV"), explore_opts);
  add_common(app.add_subcommand("select", "Run feature selection and emit traces"), select_opts);
  add_common(app.add_subcommand("tune", "Run selection and hyperparameter tuning"), tune_opts);
  add_common(app.add_subcommand("train", "Train and evaluate the selected models"), train_opts);
  add_common(app.add_subcommand("compare", "Full pipeline with the ranked comparison"),
             compare_opts);
  add_common(app.add_subcommand("run", "Full pipeline (alias of compare)"), run_opts);

  auto* synth = app.add_subcommand("synth", "Write the bundled synthetic demo dataset");
  std::string synth_out = "synthetic.csv";
  std::size_t synth_rows = 500;
  std::uint64_t synth_seed = 7;
  synth->add_option("--out", synth_out, "Output CSV path");
  synth->add_option("--rows", synth_rows, "Row count")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "Generator seed");

  auto* inspect = app.add_subcommand("inspect-tree", "Render a fitted tree model as text");
  std::string inspect_model;
  std::string inspect_out;
  inspect->add_option("--model", inspect_model, "Serialized model JSON")->required();
  inspect->add_option("--out", inspect_out, "Write the outline here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      enersave::write_synthetic_csv(synth_out, synth_rows, synth_seed);
      std::cout << "wrote " << synth_rows << " rows to " << synth_out << "\n";
      return 0;
    }
    if (inspect->parsed()) {
      std::ifstream in(inspect_model);
      if (!in) throw enersave::DataError("cannot open model file: " + inspect_model);
      std::ostringstream buf;
      buf << in.rdbuf();
      auto model = enersave::model_from_json(buf.str());
      if (model.kind() != enersave::ModelKind::tree)
        throw enersave::DataError("inspect-tree: model is a " +
                                  enersave::to_string(model.kind()) + ", expected a tree");
      std::string outline = enersave::tree_outline(std::get<enersave::TreeModel>(model.value),
                                                   model.feature_names);
      if (inspect_out.empty()) {
        std::cout << outline;
      } else {
        std::ofstream out(inspect_out, std::ios::binary);
        if (!out) throw enersave::Error("cannot write " + inspect_out);
        out << outline;
      }
      return 0;
    }
    if (app.get_subcommand("prep")->parsed())
      return run_stage(prep_opts, enersave::RunStage::prep);
    if (app.get_subcommand("explore")->parsed()) {
      auto config = load_with_overrides(explore_opts);
      for (const auto& p : enersave::run_explore(config)) std::cout << "wrote " << p << "\n";
      return 0;
    }
    if (app.get_subcommand("select")->parsed())
      return run_stage(select_opts, enersave::RunStage::select);
    if (app.get_subcommand("tune")->parsed())
      return run_stage(tune_opts, enersave::RunStage::tune);
    if (app.get_subcommand("train")->parsed())
      return run_stage(train_opts, enersave::RunStage::train);
    if (app.get_subcommand("compare")->parsed())
      return run_stage(compare_opts, enersave::RunStage::compare);
    if (app.get_subcommand("run")->parsed())
      return run_stage(run_opts, enersave::RunStage::compare);
  } catch (const enersave::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const enersave::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
