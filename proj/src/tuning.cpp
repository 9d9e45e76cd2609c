#include "enersave/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "enersave/error.hpp"
#include "enersave/parallel.hpp"
#include "enersave/text.hpp"

namespace enersave {

std::size_t HyperSpace::combination_count() const {
  std::size_t n = 1;
  for (const auto& g : genes) {
    if (!g.values.empty() && n > std::numeric_limits<std::size_t>::max() / g.values.size())
      return std::numeric_limits<std::size_t>::max();
    n *= g.values.size();
  }
  return n;
}

void HyperSpace::validate() const {
  if (genes.empty()) throw ConfigError("hyperspace: no genes");
  std::set<std::string> names;
  for (const auto& g : genes) {
    if (g.values.empty()) throw ConfigError("hyperspace: gene '" + g.name + "' has no values");
    if (!names.insert(g.name).second)
      throw ConfigError("hyperspace: duplicate gene name '" + g.name + "'");
  }
}

Settings settings_of(const HyperSpace& space, const std::vector<std::size_t>& alleles) {
  Settings out(space.genes.size());
  for (std::size_t g = 0; g < space.genes.size(); ++g) {
    if (alleles[g] >= space.genes[g].values.size())
      throw Error("chromosome allele out of range for gene " + space.genes[g].name);
    out[g] = space.genes[g].values[alleles[g]];
  }
  return out;
}

GridResult grid_search(const HyperSpace& space, const SettingsEvaluator& evaluator,
                       std::size_t cap, int threads) {
  space.validate();
  const std::size_t total = space.combination_count();
  if (total > cap)
    throw ConfigError("grid_search: " + std::to_string(total) + " combinations exceed cap " +
                      std::to_string(cap));

  GridResult result;
  result.rows.resize(total);

  // Lexicographic enumeration over gene value indices, last gene fastest.
  std::vector<std::size_t> radix(space.genes.size());
  for (std::size_t g = 0; g < space.genes.size(); ++g) radix[g] = space.genes[g].values.size();

  parallel_for(total, threads, [&](std::size_t i) {
    GridRow& row = result.rows[i];
    row.indices.resize(space.genes.size());
    std::size_t rem = i;
    for (std::size_t g = space.genes.size(); g-- > 0;) {
      row.indices[g] = rem % radix[g];
      rem /= radix[g];
    }
    row.settings = settings_of(space, row.indices);
    try {
      row.metric = evaluator(row.settings);
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  });

  std::size_t best = total;
  for (std::size_t i = 0; i < total; ++i) {
    if (result.rows[i].failed) continue;
    if (best == total || result.rows[i].metric < result.rows[best].metric) best = i;
  }
  if (best == total) throw Error("grid_search: every combination failed");
  result.best = result.rows[best].settings;
  result.best_metric = result.rows[best].metric;
  return result;
}

const Chromosome& tournament_select(const std::vector<Chromosome>& population, std::size_t k,
                                    Rng& rng) {
  if (population.empty()) throw Error("tournament_select: empty population");
  if (k < 1 || k > population.size()) throw Error("tournament_select: k out of range");
  for (const auto& c : population)
    if (!c.fitness) throw Error("tournament_select: individual lacks a fitness value");

  auto picks = sample_distinct(population.size(), k, rng);
  std::size_t best = picks[0];
  for (std::size_t i = 1; i < picks.size(); ++i)
    if (*population[picks[i]].fitness < *population[best].fitness) best = picks[i];
  return population[best];
}

Chromosome mutate_one_gene(const Chromosome& c, const HyperSpace& space, Rng& rng) {
  if (c.alleles.size() != space.genes.size())
    throw Error("mutate_one_gene: chromosome does not match space");
  Chromosome out = c;
  out.fitness.reset();
  std::size_t g = static_cast<std::size_t>(rng.next_below(space.genes.size()));
  std::size_t n_values = space.genes[g].values.size();
  if (n_values < 2) return out;
  // Uniform over the other values of the chosen gene.
  std::size_t shift = 1 + static_cast<std::size_t>(rng.next_below(n_values - 1));
  out.alleles[g] = (c.alleles[g] + shift) % n_values;
  return out;
}

TuneResult ga_tune(const HyperSpace& space, const SettingsEvaluator& evaluator,
                   const GaTuneParams& params, int threads) {
  space.validate();
  if (params.population_size < 2) throw ConfigError("ga_tune: population_size must be >= 2");
  if (params.tournament_size < 1 || params.tournament_size > params.population_size)
    throw ConfigError("ga_tune: tournament_size out of range");
  if (params.crossover_prob < 0.0 || params.crossover_prob > 1.0)
    throw ConfigError("ga_tune: crossover_prob must be in [0,1]");
  if (params.mutation_prob < 0.0 || params.mutation_prob > 1.0)
    throw ConfigError("ga_tune: mutation_prob must be in [0,1]");

  Rng rng(params.seed);
  const std::size_t g_count = space.genes.size();

  std::vector<Chromosome> population(params.population_size);
  for (auto& c : population) {
    c.alleles.resize(g_count);
    for (std::size_t g = 0; g < g_count; ++g)
      c.alleles[g] = static_cast<std::size_t>(rng.next_below(space.genes[g].values.size()));
  }

  // Evaluator failures count as infinite fitness.
  auto evaluate_all = [&](std::vector<Chromosome>& pop) {
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < pop.size(); ++i)
      if (!pop[i].fitness) todo.push_back(i);
    parallel_for(todo.size(), threads, [&](std::size_t t) {
      Chromosome& c = pop[todo[t]];
      try {
        c.fitness = evaluator(settings_of(space, c.alleles));
      } catch (const std::exception&) {
        c.fitness = std::numeric_limits<double>::infinity();
      }
    });
  };

  TuneResult result;
  result.best_metric = std::numeric_limits<double>::infinity();

  for (std::size_t gen = 0;; ++gen) {
    evaluate_all(population);
    for (const auto& c : population) {
      if (*c.fitness < result.best_metric) {
        result.best_metric = *c.fitness;
        result.best = settings_of(space, c.alleles);
      }
    }
    result.trace.push_back({gen, result.best_metric});
    if (gen == params.generations) break;

    std::vector<std::size_t> order(population.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return *population[a].fitness < *population[b].fitness;
    });

    std::vector<Chromosome> next;
    next.reserve(params.population_size);
    for (std::size_t e = 0; e < params.elitism_count && e < order.size(); ++e)
      next.push_back(population[order[e]]);

    while (next.size() < params.population_size) {
      Chromosome child = tournament_select(population, params.tournament_size, rng);
      if (rng.next_double() < params.crossover_prob) {
        const Chromosome& other = tournament_select(population, params.tournament_size, rng);
        for (std::size_t g = 0; g < g_count; ++g)
          if (rng.next_bool()) child.alleles[g] = other.alleles[g];
        child.fitness.reset();
      }
      if (rng.next_double() < params.mutation_prob) child = mutate_one_gene(child, space, rng);
      next.push_back(std::move(child));
    }
    population = std::move(next);
  }

  if (result.best.empty()) throw Error("ga_tune: no chromosome evaluated");
  return result;
}

std::string grid_csv(const HyperSpace& space, const GridResult& result) {
  std::string out;
  for (const auto& g : space.genes) {
    out += csv_field(g.name);
    out += ',';
  }
  out += "metric,status\n";
  for (const auto& row : result.rows) {
    for (double v : row.settings) {
      out += format_double(v);
      out += ',';
    }
    if (row.failed) {
      out += ",failed";
    } else {
      out += format_double(row.metric);
      out += ",ok";
    }
    out += '\n';
  }
  return out;
}

std::string tune_trace_csv(const TuneResult& result) {
  std::string out = "generation,best_metric\n";
  for (const auto& p : result.trace) {
    out += std::to_string(p.generation);
    out += ',';
    out += format_double(p.best_metric);
    out += '\n';
  }
  return out;
}

}  // namespace enersave
