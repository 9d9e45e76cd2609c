#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <variant>

#include "enersave/evaluation.hpp"
#include "enersave/explore.hpp"
#include "enersave/model.hpp"
#include "enersave/pipeline.hpp"
#include "enersave/selection.hpp"
#include "enersave/tuning.hpp"

namespace py = pybind11;
using namespace enersave;

namespace {

Matrix to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2) throw py::value_error("X must be a 2-d array");
  Matrix m(static_cast<std::size_t>(arr.shape(0)), static_cast<std::size_t>(arr.shape(1)));
  std::copy(arr.data(), arr.data() + arr.size(), m.data().begin());
  return m;
}

std::vector<double> to_vector(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 1) throw py::value_error("y must be a 1-d array");
  return std::vector<double>(arr.data(), arr.data() + arr.size());
}

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>({static_cast<py::ssize_t>(v.size())},
                             {static_cast<py::ssize_t>(sizeof(double))}, v.data());
}

py::dict metrics_dict(const MetricsReport& m) {
  py::dict d;
  d["n"] = m.n;
  d["mse"] = m.mse;
  d["rmse"] = m.rmse;
  d["mae"] = m.mae;
  d["r2"] = m.r2 ? py::cast(*m.r2) : py::none();
  return d;
}

py::dict selection_dict(const SelectionResult& r) {
  py::dict d;
  std::vector<bool> bits(r.mask.bits.begin(), r.mask.bits.end());
  d["mask"] = bits;
  d["fitness"] = r.fitness;
  d["truncated"] = r.truncated;
  py::list trace;
  for (const auto& p : r.trace)
    trace.append(py::make_tuple(p.step, p.best_fitness, p.feature_count));
  d["trace"] = trace;
  return d;
}

FeatureMask mask_from_list(const std::vector<bool>& bits) {
  FeatureMask m(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) m.set(i, bits[i]);
  return m;
}

// Python-callable fitness; evaluations stay on the calling thread.
class PyEvaluator final : public FitnessEvaluator {
 public:
  PyEvaluator(py::function fn, std::optional<std::uint64_t> budget)
      : FitnessEvaluator(budget), fn_(std::move(fn)) {}

 protected:
  double compute(const FeatureMask& mask) override {
    std::vector<bool> bits(mask.bits.begin(), mask.bits.end());
    return fn_(bits).cast<double>();
  }

 private:
  py::function fn_;
};

HyperSpace space_from_pairs(const std::vector<std::pair<std::string, std::vector<double>>>& genes) {
  HyperSpace space;
  for (const auto& [name, values] : genes) space.genes.push_back({name, values});
  return space;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Regression pipeline core: data preparation, models, wrapper "
            "feature selection, tuning and evaluation";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

  py::class_<TrainedModel>(m, "Model")
      .def_property_readonly("kind", [](const TrainedModel& t) { return to_string(t.kind()); })
      .def_property_readonly("feature_names",
                             [](const TrainedModel& t) { return t.feature_names; })
      .def("predict",
           [](const TrainedModel& t,
              const py::array_t<double, py::array::c_style | py::array::forcecast>& X) {
             return to_array(predict(t, to_matrix(X)));
           })
      .def("to_json", [](const TrainedModel& t) { return model_to_json(t); })
      .def_property_readonly("coefficients",
                             [](const TrainedModel& t) -> py::object {
                               if (const auto* l = std::get_if<LassoModel>(&t.value))
                                 return to_array(l->coefficients);
                               return py::none();
                             })
      .def_property_readonly("intercept",
                             [](const TrainedModel& t) -> py::object {
                               if (const auto* l = std::get_if<LassoModel>(&t.value))
                                 return py::cast(l->intercept);
                               return py::none();
                             })
      .def("outline", [](const TrainedModel& t) {
        if (const auto* tree = std::get_if<TreeModel>(&t.value))
          return tree_outline(*tree, t.feature_names);
        throw DataError("outline: not a tree model");
      });

  m.def(
      "fit_lasso",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& X,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& y, double lam,
         double tol, std::size_t max_iter) {
        TrainedModel t;
        t.value = fit_lasso(to_matrix(X), to_vector(y), lam, tol, max_iter);
        return t;
      },
      py::arg("X"), py::arg("y"), py::arg("lambda_") = 0.1, py::arg("tol") = 1e-6,
      py::arg("max_iter") = 1000);

  m.def(
      "fit_tree",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& X,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& y,
         std::size_t max_depth, std::size_t min_samples_split, std::size_t min_samples_leaf,
         double min_impurity_decrease) {
        TreeParams p{max_depth, min_samples_split, min_samples_leaf, min_impurity_decrease};
        TrainedModel t;
        t.value = fit_tree(to_matrix(X), to_vector(y), p);
        return t;
      },
      py::arg("X"), py::arg("y"), py::arg("max_depth") = 32, py::arg("min_samples_split") = 2,
      py::arg("min_samples_leaf") = 1, py::arg("min_impurity_decrease") = 0.0);

  m.def(
      "fit_forest",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& X,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& y,
         std::size_t n_trees, bool bootstrap, double max_features_fraction, std::uint64_t seed,
         std::size_t max_depth, int threads) {
        ForestParams p;
        p.n_trees = n_trees;
        p.bootstrap = bootstrap;
        p.max_features_fraction = max_features_fraction;
        p.seed = seed;
        p.tree.max_depth = max_depth;
        TrainedModel t;
        t.value = fit_forest(to_matrix(X), to_vector(y), p, threads);
        return t;
      },
      py::arg("X"), py::arg("y"), py::arg("n_trees") = 100, py::arg("bootstrap") = true,
      py::arg("max_features_fraction") = 1.0, py::arg("seed") = 0, py::arg("max_depth") = 32,
      py::arg("threads") = 1);

  m.def("load_model", [](const std::string& text) { return model_from_json(text); },
        py::arg("json_text"));

  m.def(
      "metrics",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& y_true,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& y_pred) {
        return metrics_dict(metrics(to_vector(y_true), to_vector(y_pred)));
      },
      py::arg("y_true"), py::arg("y_pred"));

  m.def("aic", &aic, py::arg("n"), py::arg("mse"), py::arg("k"));

  m.def(
      "pearson",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& y) -> py::object {
        auto r = pearson(to_vector(x), to_vector(y));
        return r ? py::cast(*r) : py::none();
      },
      py::arg("x"), py::arg("y"));

  m.def(
      "split_indices",
      [](std::size_t n, std::uint64_t seed, double train, double validation, double test) {
        auto s = split(n, SplitRatios{train, validation, test}, seed);
        return py::make_tuple(s.train, s.validation, s.test);
      },
      py::arg("n"), py::arg("seed"), py::arg("train") = 0.6, py::arg("validation") = 0.2,
      py::arg("test") = 0.2);

  m.def(
      "forward_select",
      [](py::function evaluator, std::size_t d, std::size_t max_features, double rel_tol,
         std::optional<std::uint64_t> budget) {
        PyEvaluator e(std::move(evaluator), budget);
        return selection_dict(forward_select(e, d, max_features == 0 ? d : max_features, rel_tol));
      },
      py::arg("evaluator"), py::arg("d"), py::arg("max_features") = 0, py::arg("rel_tol") = 1e-3,
      py::arg("budget") = py::none());

  m.def(
      "ga_select",
      [](py::function evaluator, std::size_t d, std::size_t population_size,
         std::size_t generations, double crossover_prob, double per_bit_mutation_prob,
         std::size_t tournament_size, std::size_t elitism_count, std::uint64_t seed,
         std::optional<std::uint64_t> budget) {
        GaSelectParams p{population_size, generations,     crossover_prob,
                         per_bit_mutation_prob, tournament_size, elitism_count, seed};
        PyEvaluator e(std::move(evaluator), budget);
        return selection_dict(ga_select(e, d, p));
      },
      py::arg("evaluator"), py::arg("d"), py::arg("population_size") = 30,
      py::arg("generations") = 40, py::arg("crossover_prob") = 0.8,
      py::arg("per_bit_mutation_prob") = 0.0, py::arg("tournament_size") = 3,
      py::arg("elitism_count") = 1, py::arg("seed") = 0, py::arg("budget") = py::none());

  m.def(
      "pso_select",
      [](py::function evaluator, std::size_t d, std::size_t swarm_size, std::size_t iterations,
         double inertia, double cognitive, double social, double velocity_clamp,
         std::uint64_t seed, std::optional<std::uint64_t> budget) {
        PsoSelectParams p{swarm_size, iterations, inertia, cognitive, social, velocity_clamp,
                          seed};
        PyEvaluator e(std::move(evaluator), budget);
        return selection_dict(pso_select(e, d, p));
      },
      py::arg("evaluator"), py::arg("d"), py::arg("swarm_size") = 30, py::arg("iterations") = 40,
      py::arg("inertia") = 0.7, py::arg("cognitive") = 1.5, py::arg("social") = 1.5,
      py::arg("velocity_clamp") = 4.0, py::arg("seed") = 0, py::arg("budget") = py::none());

  m.def(
      "grid_search",
      [](const std::vector<std::pair<std::string, std::vector<double>>>& genes,
         py::function evaluator, std::size_t cap) {
        HyperSpace space = space_from_pairs(genes);
        auto result = grid_search(
            space, [&](const Settings& s) { return evaluator(s).cast<double>(); }, cap);
        py::dict d;
        d["best"] = result.best;
        d["best_metric"] = result.best_metric;
        return d;
      },
      py::arg("space"), py::arg("evaluator"), py::arg("cap") = 10000);

  m.def(
      "ga_tune",
      [](const std::vector<std::pair<std::string, std::vector<double>>>& genes,
         py::function evaluator, std::size_t population_size, std::size_t generations,
         double crossover_prob, double mutation_prob, std::size_t tournament_size,
         std::size_t elitism_count, std::uint64_t seed) {
        HyperSpace space = space_from_pairs(genes);
        GaTuneParams p{population_size, generations,   crossover_prob,
                       mutation_prob,   tournament_size, elitism_count, seed};
        auto result =
            ga_tune(space, [&](const Settings& s) { return evaluator(s).cast<double>(); }, p);
        py::dict d;
        d["best"] = result.best;
        d["best_metric"] = result.best_metric;
        py::list trace;
        for (const auto& t : result.trace) trace.append(py::make_tuple(t.generation, t.best_metric));
        d["trace"] = trace;
        return d;
      },
      py::arg("space"), py::arg("evaluator"), py::arg("population_size") = 20,
      py::arg("generations") = 25, py::arg("crossover_prob") = 0.8,
      py::arg("mutation_prob") = 0.3, py::arg("tournament_size") = 3,
      py::arg("elitism_count") = 1, py::arg("seed") = 0);

  m.def("write_synthetic_csv", &write_synthetic_csv, py::arg("path"), py::arg("rows") = 500,
        py::arg("seed") = 7);

  m.def(
      "run_pipeline",
      [](const std::string& config_json, const std::string& out_dir,
         std::optional<std::uint64_t> seed, int threads) {
        PipelineConfig config = parse_config(config_json);
        if (!out_dir.empty()) config.out_dir = out_dir;
        if (seed) config.seed = *seed;
        if (threads >= 0) config.threads = threads;
        auto artifacts = run(config);
        py::dict d;
        d["out_dir"] = artifacts.out_dir;
        d["manifest"] = artifacts.manifest_path;
        d["comparisons"] = artifacts.comparison_csvs;
        return d;
      },
      py::arg("config_json"), py::arg("out_dir") = "", py::arg("seed") = py::none(),
      py::arg("threads") = -1);

  m.def(
      "evaluate_mask_rmse",
      [](py::function evaluator, const std::vector<bool>& bits) {
        PyEvaluator e(std::move(evaluator), std::nullopt);
        return e.evaluate(mask_from_list(bits));
      },
      py::arg("evaluator"), py::arg("mask"));

#ifdef ENERSAVE_VERSION
  m.attr("__version__") = ENERSAVE_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
