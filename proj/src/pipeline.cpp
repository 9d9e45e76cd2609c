#include "enersave/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "enersave/error.hpp"
#include "enersave/explore.hpp"
#include "enersave/parallel.hpp"
#include "enersave/rng.hpp"
#include "enersave/text.hpp"

namespace enersave {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// config parsing

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config." + key + ": " + e.what());
  }
}

CleaningRules parse_cleaning(const json& j) {
  CleaningRules out;
  if (!j.contains("cleaning")) return out;
  const json& c = j.at("cleaning");
  for (const auto& m : c.value("case_merges", json::array()))
    out.case_merges.push_back({m.at("column"), m.at("from"), m.at("to")});
  for (const auto& m : c.value("anomaly_remaps", json::array()))
    out.anomaly_remaps.push_back({m.at("column"), m.at("from"), m.at("to")});
  for (const auto& m : c.value("missing_fills", json::array()))
    out.missing_fills.push_back({m.at("column"), m.at("fill")});
  out.drop_columns = c.value("drop_columns", std::vector<std::string>{});
  return out;
}

TransformSpec parse_transform(const json& j) {
  TransformSpec out;
  if (!j.contains("transform")) return out;
  const json& t = j.at("transform");
  for (const auto& name : t.value("date_year_columns", std::vector<std::string>{}))
    out.date_year_columns.push_back({name});
  for (const auto& b : t.value("binary_columns", json::array()))
    out.binary_columns.push_back({b.at("column"), b.at("one_category")});
  return out;
}

void parse_ga_select(const json& j, GaSelectParams& p) {
  p.population_size = get_or<std::size_t>(j, "population_size", p.population_size);
  p.generations = get_or<std::size_t>(j, "generations", p.generations);
  p.crossover_prob = get_or<double>(j, "crossover_prob", p.crossover_prob);
  p.per_bit_mutation_prob = get_or<double>(j, "per_bit_mutation_prob", p.per_bit_mutation_prob);
  p.tournament_size = get_or<std::size_t>(j, "tournament_size", p.tournament_size);
  p.elitism_count = get_or<std::size_t>(j, "elitism_count", p.elitism_count);
}

void parse_pso_select(const json& j, PsoSelectParams& p) {
  p.swarm_size = get_or<std::size_t>(j, "swarm_size", p.swarm_size);
  p.iterations = get_or<std::size_t>(j, "iterations", p.iterations);
  p.inertia = get_or<double>(j, "inertia", p.inertia);
  p.cognitive = get_or<double>(j, "cognitive", p.cognitive);
  p.social = get_or<double>(j, "social", p.social);
  p.velocity_clamp = get_or<double>(j, "velocity_clamp", p.velocity_clamp);
}

void parse_ga_tune(const json& j, GaTuneParams& p) {
  p.population_size = get_or<std::size_t>(j, "population_size", p.population_size);
  p.generations = get_or<std::size_t>(j, "generations", p.generations);
  p.crossover_prob = get_or<double>(j, "crossover_prob", p.crossover_prob);
  p.mutation_prob = get_or<double>(j, "mutation_prob", p.mutation_prob);
  p.tournament_size = get_or<std::size_t>(j, "tournament_size", p.tournament_size);
  p.elitism_count = get_or<std::size_t>(j, "elitism_count", p.elitism_count);
}

void validate_config(const PipelineConfig& c) {
  if (c.input.empty()) throw ConfigError("config.input: required");
  if (c.targets.empty()) throw ConfigError("config.targets: at least one target");
  if (c.models.empty()) throw ConfigError("config.models: at least one model");
  if (c.selectors.empty()) throw ConfigError("config.selectors: at least one selector");
  for (const auto& m : c.models)
    model_kind_from_string(m);  // throws on unknown
  for (const auto& s : c.selectors)
    if (s != "forward" && s != "ga" && s != "pso")
      throw ConfigError("config.selectors: unknown selector '" + s + "'");
  if (c.tuner != "grid" && c.tuner != "ga" && c.tuner != "none")
    throw ConfigError("config.tuner: must be grid, ga or none");
  if (c.aic_set != "train" && c.aic_set != "validation" && c.aic_set != "test")
    throw ConfigError("config.aic_set: must be train, validation or test");
  if (c.top_k < 1) throw ConfigError("config.top_k: must be >= 1");
  for (double r : {c.ratios.train, c.ratios.validation, c.ratios.test})
    if (!(r > 0.0 && r < 1.0)) throw ConfigError("config.split.ratios: each must be in (0,1)");
  if (std::abs(c.ratios.train + c.ratios.validation + c.ratios.test - 1.0) > 1e-9)
    throw ConfigError("config.split.ratios: must sum to 1");
  if (c.threshold_tau < 0.0) throw ConfigError("config.threshold_tau: must be >= 0");
  if (c.overfit_ratio <= 0.0) throw ConfigError("config.overfit_ratio: must be > 0");
  if (c.cv_folds == 1) throw ConfigError("config.cv_folds: must be 0 or >= 2");
}

}  // namespace

PipelineConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }

  PipelineConfig c;
  c.input = get_or<std::string>(j, "input", "");
  if (j.contains("schema_overrides"))
    for (const auto& [name, kind] : j.at("schema_overrides").items())
      c.schema_overrides[name] = column_kind_from_string(kind.get<std::string>());
  c.cleaning = parse_cleaning(j);
  c.transform = parse_transform(j);
  c.targets = get_or<std::vector<std::string>>(j, "targets", {});
  c.top_k = get_or<std::size_t>(j, "top_k", c.top_k);
  if (j.contains("split")) {
    const json& s = j.at("split");
    c.seed = get_or<std::uint64_t>(s, "seed", c.seed);
    if (s.contains("ratios")) {
      auto r = s.at("ratios").get<std::vector<double>>();
      if (r.size() != 3) throw ConfigError("config.split.ratios: need exactly 3 values");
      c.ratios = {r[0], r[1], r[2]};
    }
  }
  c.threshold_tau = get_or<double>(j, "threshold_tau", c.threshold_tau);
  c.selectors = get_or<std::vector<std::string>>(j, "selectors", c.selectors);
  if (j.contains("selector_params")) {
    const json& sp = j.at("selector_params");
    if (sp.contains("forward")) {
      c.forward.max_features =
          get_or<std::size_t>(sp.at("forward"), "max_features", c.forward.max_features);
      c.forward.rel_tol = get_or<double>(sp.at("forward"), "rel_tol", c.forward.rel_tol);
    }
    if (sp.contains("ga")) parse_ga_select(sp.at("ga"), c.ga_select);
    if (sp.contains("pso")) parse_pso_select(sp.at("pso"), c.pso_select);
  }
  if (j.contains("fitness_budget") && !j.at("fitness_budget").is_null())
    c.fitness_budget = j.at("fitness_budget").get<std::uint64_t>();
  c.models = get_or<std::vector<std::string>>(j, "models", c.models);
  if (j.contains("model_params")) {
    const json& mp = j.at("model_params");
    if (mp.contains("lasso")) {
      const json& l = mp.at("lasso");
      c.model_params.lasso.lambda = get_or<double>(l, "lambda", c.model_params.lasso.lambda);
      c.model_params.lasso.tol = get_or<double>(l, "tol", c.model_params.lasso.tol);
      c.model_params.lasso.max_iter =
          get_or<std::size_t>(l, "max_iter", c.model_params.lasso.max_iter);
    }
    if (mp.contains("tree")) {
      const json& t = mp.at("tree");
      TreeParams& p = c.model_params.tree;
      p.max_depth = get_or<std::size_t>(t, "max_depth", p.max_depth);
      p.min_samples_split = get_or<std::size_t>(t, "min_samples_split", p.min_samples_split);
      p.min_samples_leaf = get_or<std::size_t>(t, "min_samples_leaf", p.min_samples_leaf);
      p.min_impurity_decrease =
          get_or<double>(t, "min_impurity_decrease", p.min_impurity_decrease);
    }
    if (mp.contains("forest")) {
      const json& f = mp.at("forest");
      ForestParams& p = c.model_params.forest;
      p.n_trees = get_or<std::size_t>(f, "n_trees", p.n_trees);
      p.bootstrap = get_or<bool>(f, "bootstrap", p.bootstrap);
      p.max_features_fraction =
          get_or<double>(f, "max_features_fraction", p.max_features_fraction);
      if (f.contains("tree")) {
        const json& t = f.at("tree");
        TreeParams& tp = p.tree;
        tp.max_depth = get_or<std::size_t>(t, "max_depth", tp.max_depth);
        tp.min_samples_split = get_or<std::size_t>(t, "min_samples_split", tp.min_samples_split);
        tp.min_samples_leaf = get_or<std::size_t>(t, "min_samples_leaf", tp.min_samples_leaf);
        tp.min_impurity_decrease =
            get_or<double>(t, "min_impurity_decrease", tp.min_impurity_decrease);
      }
    }
  }
  c.tuner = get_or<std::string>(j, "tuner", c.tuner);
  if (j.contains("grids")) {
    for (const auto& [model, genes] : j.at("grids").items()) {
      HyperSpace space;
      for (const auto& [name, values] : genes.items())
        space.genes.push_back({name, values.get<std::vector<double>>()});
      c.grids[model] = std::move(space);
    }
  }
  if (j.contains("ga_tune")) parse_ga_tune(j.at("ga_tune"), c.ga_tune);
  c.grid_cap = get_or<std::size_t>(j, "grid_cap", c.grid_cap);
  c.aic_set = get_or<std::string>(j, "aic_set", c.aic_set);
  c.cv_folds = get_or<std::size_t>(j, "cv_folds", c.cv_folds);
  c.overfit_ratio = get_or<double>(j, "overfit_ratio", c.overfit_ratio);
  c.out_dir = get_or<std::string>(j, "out_dir", c.out_dir);
  c.threads = get_or<int>(j, "threads", c.threads);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  if (j.contains("explore")) {
    const json& e = j.at("explore");
    for (const auto& g : e.value("grouped", json::array()))
      c.grouped.push_back({g.at("group"), g.at("value")});
    for (const auto& s : e.value("scatter", json::array()))
      c.scatters.push_back(
          {s.at("x"), s.at("y"), s.value("hues", std::vector<std::string>{})});
    c.corr_include_targets = get_or<bool>(e, "corr_include_targets", c.corr_include_targets);
  }

  validate_config(c);
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const PipelineConfig& c) {
  json j;
  j["input"] = c.input;
  json schema = json::object();
  for (const auto& [name, kind] : c.schema_overrides) schema[name] = to_string(kind);
  j["schema_overrides"] = schema;
  json cleaning;
  cleaning["case_merges"] = json::array();
  for (const auto& m : c.cleaning.case_merges)
    cleaning["case_merges"].push_back({{"column", m.column}, {"from", m.from_text}, {"to", m.to_text}});
  cleaning["anomaly_remaps"] = json::array();
  for (const auto& m : c.cleaning.anomaly_remaps)
    cleaning["anomaly_remaps"].push_back(
        {{"column", m.column}, {"from", m.from_value}, {"to", m.to_value}});
  cleaning["missing_fills"] = json::array();
  for (const auto& m : c.cleaning.missing_fills)
    cleaning["missing_fills"].push_back({{"column", m.column}, {"fill", m.fill_text}});
  cleaning["drop_columns"] = c.cleaning.drop_columns;
  j["cleaning"] = cleaning;
  json transform;
  transform["date_year_columns"] = json::array();
  for (const auto& d : c.transform.date_year_columns)
    transform["date_year_columns"].push_back(d.column);
  transform["binary_columns"] = json::array();
  for (const auto& b : c.transform.binary_columns)
    transform["binary_columns"].push_back(
        {{"column", b.column}, {"one_category", b.one_category}});
  j["transform"] = transform;
  j["targets"] = c.targets;
  j["top_k"] = c.top_k;
  j["split"] = {{"seed", c.seed}, {"ratios", {c.ratios.train, c.ratios.validation, c.ratios.test}}};
  j["threshold_tau"] = c.threshold_tau;
  j["selectors"] = c.selectors;
  j["selector_params"] = {
      {"forward", {{"max_features", c.forward.max_features}, {"rel_tol", c.forward.rel_tol}}},
      {"ga",
       {{"population_size", c.ga_select.population_size},
        {"generations", c.ga_select.generations},
        {"crossover_prob", c.ga_select.crossover_prob},
        {"per_bit_mutation_prob", c.ga_select.per_bit_mutation_prob},
        {"tournament_size", c.ga_select.tournament_size},
        {"elitism_count", c.ga_select.elitism_count}}},
      {"pso",
       {{"swarm_size", c.pso_select.swarm_size},
        {"iterations", c.pso_select.iterations},
        {"inertia", c.pso_select.inertia},
        {"cognitive", c.pso_select.cognitive},
        {"social", c.pso_select.social},
        {"velocity_clamp", c.pso_select.velocity_clamp}}}};
  if (c.fitness_budget) j["fitness_budget"] = *c.fitness_budget;
  else j["fitness_budget"] = nullptr;
  j["models"] = c.models;
  j["model_params"] = {
      {"lasso",
       {{"lambda", c.model_params.lasso.lambda},
        {"tol", c.model_params.lasso.tol},
        {"max_iter", c.model_params.lasso.max_iter}}},
      {"tree",
       {{"max_depth", c.model_params.tree.max_depth},
        {"min_samples_split", c.model_params.tree.min_samples_split},
        {"min_samples_leaf", c.model_params.tree.min_samples_leaf},
        {"min_impurity_decrease", c.model_params.tree.min_impurity_decrease}}},
      {"forest",
       {{"n_trees", c.model_params.forest.n_trees},
        {"bootstrap", c.model_params.forest.bootstrap},
        {"max_features_fraction", c.model_params.forest.max_features_fraction},
        {"tree",
         {{"max_depth", c.model_params.forest.tree.max_depth},
          {"min_samples_split", c.model_params.forest.tree.min_samples_split},
          {"min_samples_leaf", c.model_params.forest.tree.min_samples_leaf},
          {"min_impurity_decrease", c.model_params.forest.tree.min_impurity_decrease}}}}}};
  j["tuner"] = c.tuner;
  json grids = json::object();
  for (const auto& [model, space] : c.grids) {
    json genes = json::object();
    for (const auto& g : space.genes) genes[g.name] = g.values;
    grids[model] = genes;
  }
  j["grids"] = grids;
  j["ga_tune"] = {{"population_size", c.ga_tune.population_size},
                  {"generations", c.ga_tune.generations},
                  {"crossover_prob", c.ga_tune.crossover_prob},
                  {"mutation_prob", c.ga_tune.mutation_prob},
                  {"tournament_size", c.ga_tune.tournament_size},
                  {"elitism_count", c.ga_tune.elitism_count}};
  j["grid_cap"] = c.grid_cap;
  j["aic_set"] = c.aic_set;
  j["cv_folds"] = c.cv_folds;
  j["overfit_ratio"] = c.overfit_ratio;
  j["out_dir"] = c.out_dir;
  j["threads"] = c.threads;
  json explore;
  explore["grouped"] = json::array();
  for (const auto& g : c.grouped)
    explore["grouped"].push_back({{"group", g.group}, {"value", g.value}});
  explore["scatter"] = json::array();
  for (const auto& s : c.scatters)
    explore["scatter"].push_back({{"x", s.x}, {"y", s.y}, {"hues", s.hues}});
  explore["corr_include_targets"] = c.corr_include_targets;
  j["explore"] = explore;
  return j.dump(2);
}

std::string config_hash(const PipelineConfig& config) {
  // FNV-1a over the canonical re-serialization, so every field participates.
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_to_json(config))));
  return std::string(buf);
}

HyperSpace default_space(ModelKind kind) {
  switch (kind) {
    case ModelKind::lasso: {
      std::vector<double> lambdas;
      for (int i = 0; i < 10; ++i)
        lambdas.push_back(std::pow(10.0, -4.0 + 6.0 * static_cast<double>(i) / 9.0));
      return HyperSpace{{{"lambda", lambdas}}};
    }
    case ModelKind::tree:
      return HyperSpace{{{"max_depth", {3, 5, 8, 12, 32}},
                         {"min_samples_split", {2, 10, 40}},
                         {"min_samples_leaf", {1, 5, 20, 50}},
                         {"min_impurity_decrease", {0.0, 1e-4, 1e-2}}}};
    case ModelKind::forest:
      return HyperSpace{{{"n_trees", {50, 100, 200}},
                         {"max_features_fraction", {0.33, 0.5, 1.0}}}};
  }
  throw Error("default_space: unreachable");
}

// ---------------------------------------------------------------------------
// synthetic demo dataset

namespace {

double gaussian(Rng& rng) {
  // Box-Muller; consumes exactly two draws.
  double u1 = rng.next_double();
  double u2 = rng.next_double();
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

std::string money(double v) {
  return format_double(std::round(v * 100.0) / 100.0);
}

}  // namespace

std::string synthetic_csv(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  std::string out =
      "region,program,financed,fuel,completed,units,size_sqft,cost,incentive,"
      "kwh_saved,mmbtu_saved,usd_saved\n";

  const char* programs[] = {"retrofit", "audit", "envelope", "heating"};
  const char* fuels[] = {"electric", "gas", "oil"};

  for (std::size_t r = 0; r < rows; ++r) {
    // 12 regions with geometric-ish frequencies so top-10 encoding truncates.
    std::size_t region = 0;
    while (region < 11 && rng.next_double() < 0.65) ++region;
    std::size_t program = static_cast<std::size_t>(rng.next_below(4));
    bool financed = rng.next_double() < 0.55;
    bool financed_missing = !financed && rng.next_double() < 0.2;
    std::size_t fuel = static_cast<std::size_t>(rng.next_below(3));
    // occasional lowercase variant, cleaned up by the demo config
    bool fuel_lower = fuel == 1 && rng.next_double() < 0.3;
    int year = 2012 + static_cast<int>(rng.next_below(9));
    int month = 1 + static_cast<int>(rng.next_below(12));
    int day = 1 + static_cast<int>(rng.next_below(28));
    int units = 1 + static_cast<int>(std::floor(3.0 * std::pow(rng.next_double(), 3.0)));
    double size_sqft = 400.0 + 2600.0 * rng.next_double();
    double cost = 2000.0 + 28000.0 * std::pow(rng.next_double(), 1.5);
    double incentive = (financed ? 0.25 : 0.08) * cost * (0.8 + 0.4 * rng.next_double());

    double fuel_kwh[] = {2400.0, 300.0, 260.0};
    double kwh = fuel_kwh[fuel] + 0.05 * cost + 120.0 * units +
                 (size_sqft > 1700.0 ? 350.0 : 0.0) + 180.0 * gaussian(rng);
    double fuel_mmbtu[] = {-4.0, 9.0, 18.0};
    double mmbtu = fuel_mmbtu[fuel] + 0.0016 * cost + (year < 2016 ? 5.0 : 0.0) +
                   (size_sqft > 540.0 ? 6.0 : 0.0) + 3.5 * gaussian(rng);
    double usd = 0.045 * cost + 0.4 * incentive + (financed ? 120.0 : 0.0) +
                 (fuel == 2 ? 210.0 : 0.0) + 55.0 * gaussian(rng);

    out += "R" + std::to_string(region + 1);
    out += ',';
    out += programs[program];
    out += ',';
    out += financed_missing ? "" : (financed ? "yes" : "no");
    out += ',';
    out += fuel_lower ? "natural gas" : (fuel == 1 ? "Natural Gas" : fuels[fuel]);
    char date[16];
    std::snprintf(date, sizeof(date), ",%04d-%02d-%02d,", year, month, day);
    out += date;
    out += std::to_string(units);
    out += ',' + format_double(std::round(size_sqft));
    out += ',' + money(cost);
    out += ',' + money(incentive);
    out += ',' + money(kwh);
    out += ',' + money(mmbtu);
    out += ',' + money(usd);
    out += '\n';
  }
  return out;
}

void write_synthetic_csv(const std::string& path, std::size_t rows, std::uint64_t seed) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << synthetic_csv(rows, seed);
}

// ---------------------------------------------------------------------------
// orchestration

FeatureMatrix prepare(const PipelineConfig& config) {
  Table raw = load_csv(config.input, config.schema_overrides);
  Table cleaned = apply_corrections(raw, config.cleaning);
  Table transformed = transform(cleaned, config.transform);
  for (const auto& target : config.targets)
    if (!transformed.has_column(target))
      throw ConfigError("config.targets: column '" + target + "' not present after preparation");
  return encode_dummies(transformed, config.top_k, config.targets);
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

std::string iso_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

json split_json(const SplitIndices& s) {
  return json{{"seed", s.seed},
              {"train", s.train},
              {"validation", s.validation},
              {"test", s.test}};
}

json metrics_json(const MetricsReport& m) {
  json j{{"n", m.n}, {"mse", m.mse}, {"rmse", m.rmse}, {"mae", m.mae}};
  if (m.r2) j["r2"] = *m.r2;
  else j["r2"] = nullptr;
  return j;
}

// Applies one tuned setting onto the model parameter block by gene name.
void apply_setting(ModelKind kind, ModelDefaults& params, const std::string& name, double value) {
  TreeParams* tree = nullptr;
  if (kind == ModelKind::tree) tree = &params.tree;
  if (kind == ModelKind::forest) tree = &params.forest.tree;
  if (kind == ModelKind::lasso) {
    if (name == "lambda") {
      params.lasso.lambda = value;
      return;
    }
  } else if (tree != nullptr) {
    if (name == "max_depth") {
      tree->max_depth = static_cast<std::size_t>(value);
      return;
    }
    if (name == "min_samples_split") {
      tree->min_samples_split = static_cast<std::size_t>(value);
      return;
    }
    if (name == "min_samples_leaf") {
      tree->min_samples_leaf = static_cast<std::size_t>(value);
      return;
    }
    if (name == "min_impurity_decrease") {
      tree->min_impurity_decrease = value;
      return;
    }
    if (kind == ModelKind::forest) {
      if (name == "n_trees") {
        params.forest.n_trees = static_cast<std::size_t>(value);
        return;
      }
      if (name == "max_features_fraction") {
        params.forest.max_features_fraction = value;
        return;
      }
      if (name == "bootstrap") {
        params.forest.bootstrap = value != 0.0;
        return;
      }
    }
  }
  throw ConfigError("grids: unknown gene '" + name + "' for model " + to_string(kind));
}

TrainedModel fit_model(ModelKind kind, const ModelDefaults& params, const Matrix& X,
                       const std::vector<double>& y, std::uint64_t forest_seed, int threads) {
  TrainedModel out;
  switch (kind) {
    case ModelKind::lasso:
      out.value = fit_lasso(X, y, params.lasso.lambda, params.lasso.tol, params.lasso.max_iter);
      break;
    case ModelKind::tree:
      out.value = fit_tree(X, y, params.tree);
      break;
    case ModelKind::forest: {
      ForestParams fp = params.forest;
      fp.seed = forest_seed;
      out.value = fit_forest(X, y, fp, threads);
      break;
    }
  }
  return out;
}

// Validation-RMSE fitness of the wrapped model retrained on the masked
// training columns. Masks address the threshold-filtered feature subspace.
class WrappedModelEvaluator final : public FitnessEvaluator {
 public:
  WrappedModelEvaluator(ModelKind kind, const ModelDefaults& params, const Matrix& X_train,
                        const std::vector<double>& y_train, const Matrix& X_val,
                        const std::vector<double>& y_val, std::uint64_t model_seed,
                        std::optional<std::uint64_t> budget)
      : FitnessEvaluator(budget),
        kind_(kind),
        params_(params),
        X_train_(X_train),
        y_train_(y_train),
        X_val_(X_val),
        y_val_(y_val),
        model_seed_(model_seed) {}

 protected:
  double compute(const FeatureMask& mask) override {
    auto cols = mask.indices();
    Matrix Xtr = subset_cols(X_train_, cols);
    Matrix Xva = subset_cols(X_val_, cols);
    TrainedModel m = fit_model(kind_, params_, Xtr, y_train_, model_seed_, 1);
    return metrics(y_val_, predict(m, Xva)).rmse;
  }

 private:
  ModelKind kind_;
  ModelDefaults params_;
  const Matrix& X_train_;
  const std::vector<double>& y_train_;
  const Matrix& X_val_;
  const std::vector<double>& y_val_;
  std::uint64_t model_seed_;
};

struct Manifest {
  json stages = json::array();
  std::string started_at;
  std::string hash;
  std::uint64_t seed = 0;
  fs::path path;

  void stage_done(const std::string& name) {
    stages.push_back({{"name", name}, {"status", "done"}});
    flush("running");
  }

  void flush(const std::string& status) {
    json j{{"version", "0.1.0"},
           {"config_hash", hash},
           {"seed", seed},
           {"started_at", started_at},
           {"finished_at", status == "running" ? json(nullptr) : json(iso_now())},
           {"status", status},
           {"stages", stages}};
    write_file(path, j.dump(2) + "\n");
  }
};

std::string aic_text(double v) {
  if (std::isinf(v) && v < 0) return "-inf";
  return format_double(v);
}

}  // namespace

RunArtifacts run(const PipelineConfig& config, RunStage until) {
  const fs::path out_dir(config.out_dir.empty() ? "run_out" : config.out_dir);
  fs::create_directories(out_dir);
  const int threads = resolve_threads(config.threads);

  Manifest manifest;
  manifest.path = out_dir / "manifest.json";
  manifest.hash = config_hash(config);
  manifest.seed = config.seed;
  manifest.started_at = iso_now();
  manifest.flush("running");

  RunArtifacts artifacts;
  artifacts.out_dir = out_dir.string();
  artifacts.manifest_path = manifest.path.string();

  try {
    write_file(out_dir / "config.json", config_to_json(config) + "\n");

    FeatureMatrix fm = prepare(config);
    write_file(out_dir / "prepared.csv", feature_matrix_csv(fm));
    manifest.stage_done("prepare");

    SplitIndices idx = split(fm, config.ratios, derive_seed(config.seed, "split"));
    write_file(out_dir / "split.json", split_json(idx).dump(2) + "\n");
    manifest.stage_done("split");

    if (until == RunStage::prep) {
      manifest.flush("ok");
      return artifacts;
    }

    FeatureMatrix train = fm.rows(idx.train);
    FeatureMatrix validation = fm.rows(idx.validation);
    FeatureMatrix test = fm.rows(idx.test);

    for (const auto& target_name : config.targets) {
      const std::string tslug = slugify(target_name);
      const fs::path tdir = out_dir / ("target_" + tslug);

      // Threshold pre-filter on training rows; selectors work inside the
      // retained subspace.
      FeatureMask base = threshold_filter(train, target_name, config.threshold_tau);
      if (!base.any())
        throw DataError("threshold_filter removed every feature for target " + target_name);
      const auto kept = base.indices();
      Matrix Xtr = subset_cols(train.X, kept);
      Matrix Xva = subset_cols(validation.X, kept);
      Matrix Xte = subset_cols(test.X, kept);
      const auto& ytr = train.target(target_name);
      const auto& yva = validation.target(target_name);
      const auto& yte = test.target(target_name);
      std::vector<std::string> kept_names = subset(fm.feature_names, kept);
      write_file(tdir / "threshold_mask.csv", [&] {
        std::string s = "feature,kept\n";
        for (std::size_t i = 0; i < fm.feature_names.size(); ++i)
          s += csv_field(fm.feature_names[i]) + "," + (base.test(i) ? "1" : "0") + "\n";
        return s;
      }());

      std::vector<ComparisonRow> rows;
      for (const auto& selector : config.selectors) {
        for (const auto& model_name : config.models) {
          const ModelKind kind = model_kind_from_string(model_name);
          const std::string combo = selector + ":" + model_name + ":" + target_name;
          const std::string fslug = slugify(selector) + "_" + slugify(model_name);

          WrappedModelEvaluator evaluator(kind, config.model_params, Xtr, ytr, Xva, yva,
                                          derive_seed(config.seed, "eval:" + combo),
                                          config.fitness_budget);

          SelectionResult selected;
          if (selector == "forward") {
            std::size_t cap = config.forward.max_features == 0 ? kept.size()
                                                               : config.forward.max_features;
            selected = forward_select(evaluator, kept.size(), cap, config.forward.rel_tol,
                                      threads);
          } else if (selector == "ga") {
            GaSelectParams p = config.ga_select;
            p.seed = derive_seed(config.seed, "ga:" + combo);
            selected = ga_select(evaluator, kept.size(), p, threads);
          } else {
            PsoSelectParams p = config.pso_select;
            p.seed = derive_seed(config.seed, "pso:" + combo);
            selected = pso_select(evaluator, kept.size(), p, threads);
          }
          write_file(tdir / ("trace_" + fslug + ".csv"), trace_csv(selected.trace));

          auto cols = selected.mask.indices();
          Matrix Xtr_sel = subset_cols(Xtr, cols);
          Matrix Xva_sel = subset_cols(Xva, cols);
          Matrix Xte_sel = subset_cols(Xte, cols);
          std::vector<std::string> sel_names = subset(kept_names, cols);

          if (until == RunStage::select) continue;

          // Hyperparameter tuning on the selected columns.
          ModelDefaults tuned = config.model_params;
          if (config.tuner != "none") {
            HyperSpace space;
            auto it = config.grids.find(model_name);
            space = it != config.grids.end() ? it->second : default_space(kind);
            std::uint64_t tune_model_seed = derive_seed(config.seed, "tunefit:" + combo);
            SettingsEvaluator tune_eval = [&](const Settings& settings) {
              ModelDefaults p = config.model_params;
              for (std::size_t g = 0; g < space.genes.size(); ++g)
                apply_setting(kind, p, space.genes[g].name, settings[g]);
              TrainedModel m = fit_model(kind, p, Xtr_sel, ytr, tune_model_seed, 1);
              return metrics(yva, predict(m, Xva_sel)).mse;
            };
            Settings best;
            if (config.tuner == "grid") {
              GridResult grid = grid_search(space, tune_eval, config.grid_cap, threads);
              write_file(tdir / ("tune_" + fslug + ".csv"), grid_csv(space, grid));
              best = grid.best;
            } else {
              GaTuneParams p = config.ga_tune;
              p.seed = derive_seed(config.seed, "tune:" + combo);
              TuneResult tune = ga_tune(space, tune_eval, p, threads);
              write_file(tdir / ("tune_" + fslug + ".csv"), tune_trace_csv(tune));
              best = tune.best;
            }
            for (std::size_t g = 0; g < space.genes.size(); ++g)
              apply_setting(kind, tuned, space.genes[g].name, best[g]);
          }

          if (until == RunStage::tune) continue;

          TrainedModel final_model = fit_model(kind, tuned, Xtr_sel, ytr,
                                               derive_seed(config.seed, "fit:" + combo), threads);
          final_model.feature_names = sel_names;
          write_file(tdir / ("model_" + fslug + ".json"), model_to_json(final_model) + "\n");
          if (kind == ModelKind::tree)
            write_file(tdir / ("tree_" + fslug + ".txt"),
                       tree_outline(std::get<TreeModel>(final_model.value), sel_names));

          MetricsReport m_train = metrics(ytr, predict(final_model, Xtr_sel));
          MetricsReport m_val = metrics(yva, predict(final_model, Xva_sel));
          MetricsReport m_test = metrics(yte, predict(final_model, Xte_sel));
          OverfitGap gap = overfit_gap(m_train, m_val, m_test, config.overfit_ratio);

          json mj{{"selector", selector},
                  {"model", model_name},
                  {"target", target_name},
                  {"selected_features", sel_names},
                  {"train", metrics_json(m_train)},
                  {"validation", metrics_json(m_val)},
                  {"test", metrics_json(m_test)},
                  {"overfit",
                   {{"validation_gap", gap.severe ? json("severe") : json(gap.validation_gap)},
                    {"test_gap", gap.severe ? json("severe") : json(gap.test_gap)},
                    {"flagged", gap.flagged}}},
                  {"selection_truncated", selected.truncated}};

          if (config.cv_folds >= 2) {
            std::uint64_t cv_model_seed = derive_seed(config.seed, "cvfit:" + combo);
            ModelFitter fitter = [&](const Matrix& Xf, const std::vector<double>& yf) {
              TrainedModel fold_model = fit_model(kind, tuned, Xf, yf, cv_model_seed, 1);
              return [fold_model](const Matrix& Xp) { return predict(fold_model, Xp); };
            };
            CvResult cv = kfold_cv(Xtr_sel, ytr, config.cv_folds, fitter,
                                   derive_seed(config.seed, "cv:" + combo), threads);
            json folds = json::array();
            for (const auto& f : cv.folds)
              folds.push_back(
                  {{"train", metrics_json(f.train)}, {"holdout", metrics_json(f.holdout)}});
            mj["cross_validation"] = {{"folds", folds},
                                      {"mean_train", metrics_json(cv.mean_train)},
                                      {"mean_holdout", metrics_json(cv.mean_holdout)}};
          }

          const MetricsReport& aic_m = config.aic_set == "train"
                                           ? m_train
                                           : (config.aic_set == "test" ? m_test : m_val);
          double aic_value = aic(aic_m.n, aic_m.mse, selected.mask.count());
          mj["aic"] = std::isinf(aic_value) ? json("-inf") : json(aic_value);
          write_file(tdir / ("metrics_" + fslug + ".json"), mj.dump(2) + "\n");

          rows.push_back({selector, model_name, m_val.rmse, selected.mask.count(), aic_value});

          FeatureMask full_mask(fm.feature_names.size());
          for (std::size_t i : cols) full_mask.set(kept[i]);
          artifacts.combos.push_back(
              {selector, model_name, full_mask, m_val.rmse, aic_value});
        }
      }

      if (until == RunStage::compare && !rows.empty()) {
        ComparisonReport report = compare(rows);
        std::string csv = "selector,model,rmse,features,aic\n";
        json jrows = json::array();
        for (const auto& r : report.rows) {
          csv += r.selector + "," + r.model + "," + format_double(r.rmse) + "," +
                 std::to_string(r.feature_count) + "," + aic_text(r.aic) + "\n";
          jrows.push_back({{"selector", r.selector},
                           {"model", r.model},
                           {"rmse", r.rmse},
                           {"features", r.feature_count},
                           {"aic", std::isinf(r.aic) ? json("-inf") : json(r.aic)}});
        }
        json jreport{{"target", target_name},
                     {"rows", jrows},
                     {"winner", jrows.empty() ? json(nullptr) : jrows.front()}};
        write_file(tdir / "comparison.csv", csv);
        write_file(tdir / "comparison.json", jreport.dump(2) + "\n");
        artifacts.comparison_csvs.push_back((tdir / "comparison.csv").string());
      }
      manifest.stage_done("target:" + tslug);
    }
    manifest.flush("ok");
  } catch (...) {
    manifest.flush("failed");
    throw;
  }
  return artifacts;
}

std::vector<std::string> run_explore(const PipelineConfig& config) {
  const fs::path out_dir = fs::path(config.out_dir.empty() ? "run_out" : config.out_dir) / "explore";
  fs::create_directories(out_dir);
  std::vector<std::string> written;

  Table raw = load_csv(config.input, config.schema_overrides);
  Table cleaned = apply_corrections(raw, config.cleaning);
  Table transformed = transform(cleaned, config.transform);

  write_file(out_dir / "summary.csv", summary_csv(summarize(transformed)));
  written.push_back((out_dir / "summary.csv").string());

  for (const auto& pair : config.grouped) {
    auto gm = grouped_mean(transformed, pair.group, pair.value);
    fs::path p = out_dir / ("grouped_" + slugify(pair.group) + "_" + slugify(pair.value) + ".csv");
    write_file(p, grouped_csv(gm));
    written.push_back(p.string());
  }

  FeatureMatrix fm = encode_dummies(transformed, config.top_k, config.targets);
  CorrMatrix cm = correlation_matrix(fm, config.corr_include_targets);
  write_file(out_dir / "corr_matrix.csv", corr_matrix_csv(cm));
  written.push_back((out_dir / "corr_matrix.csv").string());

  for (const auto& s : config.scatters) {
    auto rows = scatter_extract(transformed, s.x, s.y, s.hues);
    fs::path p = out_dir / ("scatter_" + slugify(s.x) + "_" + slugify(s.y) + ".csv");
    write_file(p, scatter_csv(rows));
    written.push_back(p.string());
  }
  return written;
}

}  // namespace enersave
