#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "enersave/rng.hpp"

namespace enersave {

// One gene per hyperparameter: a name and its finite list of admissible
// values (numeric; integers are represented exactly).
struct Gene {
  std::string name;
  std::vector<double> values;
};

struct HyperSpace {
  std::vector<Gene> genes;

  std::size_t combination_count() const;
  void validate() const;  // nonempty genes, unique names
};

// One chosen value index per gene.
struct Chromosome {
  std::vector<std::size_t> alleles;
  std::optional<double> fitness;  // validation MSE
};

using Settings = std::vector<double>;  // one value per gene, in gene order

Settings settings_of(const HyperSpace& space, const std::vector<std::size_t>& alleles);

// Evaluates a settings vector to a validation metric (lower is better).
// Throwing marks the combination as failed.
using SettingsEvaluator = std::function<double(const Settings&)>;

struct GridRow {
  std::vector<std::size_t> indices;
  Settings settings;
  double metric = 0.0;
  bool failed = false;
  std::string error;
};

struct GridResult {
  Settings best;
  double best_metric = 0.0;
  std::vector<GridRow> rows;  // enumeration order: lexicographic over indices
};

// Evaluates every combination exactly once; ties break to the earliest
// enumeration order. Failed combinations are recorded and excluded; it is
// an error only when every combination fails or the product exceeds `cap`.
GridResult grid_search(const HyperSpace& space, const SettingsEvaluator& evaluator,
                       std::size_t cap = 10000, int threads = 1);

// Lowest-fitness individual among k distinct draws; every individual must
// already carry a fitness.
const Chromosome& tournament_select(const std::vector<Chromosome>& population, std::size_t k,
                                    Rng& rng);

// Resamples one uniformly chosen gene from its other admissible values
// (no-op on single-valued genes); fitness is cleared either way.
Chromosome mutate_one_gene(const Chromosome& c, const HyperSpace& space, Rng& rng);

struct GaTuneParams {
  std::size_t population_size = 20;
  std::size_t generations = 25;
  double crossover_prob = 0.8;
  double mutation_prob = 0.3;  // per individual
  std::size_t tournament_size = 3;
  std::size_t elitism_count = 1;
  std::uint64_t seed = 0;
};

struct TunePoint {
  std::size_t generation = 0;
  double best_metric = 0.0;
};

struct TuneResult {
  Settings best;
  double best_metric = 0.0;
  std::vector<TunePoint> trace;  // best-ever per generation, non-increasing
};

TuneResult ga_tune(const HyperSpace& space, const SettingsEvaluator& evaluator,
                   const GaTuneParams& params, int threads = 1);

// Grid results as CSV: one settings column per gene plus the metric.
std::string grid_csv(const HyperSpace& space, const GridResult& result);
std::string tune_trace_csv(const TuneResult& result);

}  // namespace enersave
