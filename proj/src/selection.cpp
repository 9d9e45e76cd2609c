#include "enersave/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "enersave/parallel.hpp"
#include "enersave/rng.hpp"
#include "enersave/text.hpp"

namespace enersave {

double FitnessEvaluator::evaluate(const FeatureMask& mask) {
  if (!mask.any()) throw Error("fitness: empty mask");
  auto key = mask.key();
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  if (budget_ && calls_ >= *budget_) throw BudgetExhausted();
  ++calls_;
  double fitness = compute(mask);
  memo_.emplace(std::move(key), fitness);
  return fitness;
}

void FitnessEvaluator::prefetch(const std::vector<FeatureMask>& batch, int threads) {
  // Admit distinct uncached masks in first-appearance order up to the budget.
  std::vector<const FeatureMask*> todo;
  std::vector<std::string> keys;
  for (const auto& mask : batch) {
    if (!mask.any()) continue;
    auto key = mask.key();
    if (memo_.count(key)) continue;
    if (std::find(keys.begin(), keys.end(), key) != keys.end()) continue;
    if (budget_ && calls_ + keys.size() >= *budget_) break;
    keys.push_back(std::move(key));
    todo.push_back(&mask);
  }
  std::vector<double> results(todo.size());
  parallel_for(todo.size(), threads, [&](std::size_t i) { results[i] = compute(*todo[i]); });
  for (std::size_t i = 0; i < todo.size(); ++i) {
    memo_.emplace(std::move(keys[i]), results[i]);
    ++calls_;
  }
}

std::string trace_csv(const std::vector<TracePoint>& trace) {
  std::string out = "step,best_fitness,feature_count\n";
  for (const auto& p : trace) {
    out += std::to_string(p.step);
    out += ',';
    out += format_double(p.best_fitness);
    out += ',';
    out += std::to_string(p.feature_count);
    out += '\n';
  }
  return out;
}

SelectionResult forward_select(FitnessEvaluator& evaluator, std::size_t d,
                               std::size_t max_features, double rel_tol, int threads) {
  if (d < 1) throw ConfigError("forward_select: need at least one feature");
  if (max_features < 1) throw ConfigError("forward_select: max_features must be >= 1");
  if (rel_tol < 0.0) throw ConfigError("forward_select: rel_tol must be >= 0");

  SelectionResult result;
  result.mask = FeatureMask(d);
  double current = std::numeric_limits<double>::infinity();

  std::size_t step = 0;
  while (result.mask.count() < std::min(max_features, d)) {
    std::vector<FeatureMask> candidates;
    for (std::size_t f = 0; f < d; ++f) {
      if (result.mask.test(f)) continue;
      FeatureMask c = result.mask;
      c.set(f);
      candidates.push_back(std::move(c));
    }
    evaluator.prefetch(candidates, threads);

    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = candidates.size();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      try {
        double fitness = evaluator.evaluate(candidates[i]);
        if (fitness < best) {
          best = fitness;
          best_i = i;
        }
      } catch (const BudgetExhausted&) {
        result.truncated = true;
        break;
      }
    }

    bool accept = best_i < candidates.size();
    if (accept && std::isfinite(current)) {
      if (current <= 0.0) break;  // nothing left to improve
      double improvement = (current - best) / current;
      if (improvement < rel_tol) accept = false;
    }
    if (accept) {
      result.mask = candidates[best_i];
      current = best;
      result.trace.push_back({step++, current, result.mask.count()});
    }
    if (result.truncated || !accept) break;
  }

  if (!result.mask.any()) throw Error("forward_select: no feature accepted");
  result.fitness = current;
  return result;
}

namespace {

FeatureMask random_mask(std::size_t d, Rng& rng) {
  FeatureMask mask(d);
  for (std::size_t i = 0; i < d; ++i)
    if (rng.next_bool()) mask.set(i);
  return mask;
}

// Empty masks are repaired by setting one random bit.
void repair(FeatureMask& mask, Rng& rng) {
  if (!mask.any()) mask.set(static_cast<std::size_t>(rng.next_below(mask.size())));
}

// Lowest fitness among k distinct individuals; ties go to the first drawn.
std::size_t tournament(const std::vector<double>& fitness, std::size_t k, Rng& rng) {
  auto picks = sample_distinct(fitness.size(), k, rng);
  std::size_t best = picks[0];
  for (std::size_t i = 1; i < picks.size(); ++i)
    if (fitness[picks[i]] < fitness[best]) best = picks[i];
  return best;
}

std::vector<std::size_t> sorted_by_fitness(const std::vector<double>& fitness) {
  std::vector<std::size_t> order(fitness.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });
  return order;
}

}  // namespace

SelectionResult ga_select(FitnessEvaluator& evaluator, std::size_t d,
                          const GaSelectParams& params, int threads) {
  if (d < 1) throw ConfigError("ga_select: need at least one feature");
  if (params.population_size < 2) throw ConfigError("ga_select: population_size must be >= 2");
  if (params.tournament_size < 1 || params.tournament_size > params.population_size)
    throw ConfigError("ga_select: tournament_size out of range");
  if (params.crossover_prob < 0.0 || params.crossover_prob > 1.0)
    throw ConfigError("ga_select: crossover_prob must be in [0,1]");
  if (params.per_bit_mutation_prob < 0.0 || params.per_bit_mutation_prob > 1.0)
    throw ConfigError("ga_select: per_bit_mutation_prob must be in [0,1]");

  const double bit_mutation =
      params.per_bit_mutation_prob > 0.0 ? params.per_bit_mutation_prob : 1.0 / static_cast<double>(d);
  Rng rng(params.seed);

  std::vector<FeatureMask> population;
  population.reserve(params.population_size);
  while (population.size() < params.population_size) {
    FeatureMask mask = random_mask(d, rng);
    if (!mask.any()) continue;  // re-draw empty masks
    population.push_back(std::move(mask));
  }

  SelectionResult result;
  result.fitness = std::numeric_limits<double>::infinity();

  try {
    for (std::size_t gen = 0;; ++gen) {
      evaluator.prefetch(population, threads);
      std::vector<double> fitness(population.size());
      for (std::size_t i = 0; i < population.size(); ++i)
        fitness[i] = evaluator.evaluate(population[i]);

      for (std::size_t i = 0; i < population.size(); ++i) {
        if (fitness[i] < result.fitness) {
          result.fitness = fitness[i];
          result.mask = population[i];
        }
      }
      result.trace.push_back({gen, result.fitness, result.mask.count()});
      if (gen == params.generations) break;

      std::vector<FeatureMask> next;
      next.reserve(params.population_size);
      auto order = sorted_by_fitness(fitness);
      for (std::size_t e = 0; e < params.elitism_count && e < order.size(); ++e)
        next.push_back(population[order[e]]);

      while (next.size() < params.population_size) {
        std::size_t p1 = tournament(fitness, params.tournament_size, rng);
        std::size_t p2 = tournament(fitness, params.tournament_size, rng);
        FeatureMask child = population[p1];
        if (rng.next_double() < params.crossover_prob) {
          for (std::size_t b = 0; b < d; ++b)
            if (rng.next_bool()) child.bits[b] = population[p2].bits[b];
        }
        for (std::size_t b = 0; b < d; ++b)
          if (rng.next_double() < bit_mutation) child.bits[b] ^= 1;
        repair(child, rng);
        next.push_back(std::move(child));
      }
      population = std::move(next);
    }
  } catch (const BudgetExhausted&) {
    result.truncated = true;
  }

  if (!result.mask.any()) throw Error("ga_select: search ended without a usable mask");
  return result;
}

SelectionResult pso_select(FitnessEvaluator& evaluator, std::size_t d,
                           const PsoSelectParams& params, int threads) {
  if (d < 1) throw ConfigError("pso_select: need at least one feature");
  if (params.swarm_size < 2) throw ConfigError("pso_select: swarm_size must be >= 2");
  if (!(params.velocity_clamp > 0.0)) throw ConfigError("pso_select: velocity_clamp must be > 0");

  Rng rng(params.seed);
  const std::size_t m = params.swarm_size;

  std::vector<FeatureMask> position;
  position.reserve(m);
  while (position.size() < m) {
    FeatureMask mask = random_mask(d, rng);
    if (!mask.any()) continue;
    position.push_back(std::move(mask));
  }
  std::vector<std::vector<double>> velocity(m, std::vector<double>(d, 0.0));
  std::vector<FeatureMask> pbest = position;
  std::vector<double> pbest_fitness(m, std::numeric_limits<double>::infinity());

  SelectionResult result;
  result.fitness = std::numeric_limits<double>::infinity();

  auto sigmoid = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };

  try {
    for (std::size_t iter = 0;; ++iter) {
      evaluator.prefetch(position, threads);
      for (std::size_t i = 0; i < m; ++i) {
        double fitness = evaluator.evaluate(position[i]);
        if (fitness < pbest_fitness[i]) {
          pbest_fitness[i] = fitness;
          pbest[i] = position[i];
        }
        if (fitness < result.fitness) {
          result.fitness = fitness;
          result.mask = position[i];
        }
      }
      result.trace.push_back({iter, result.fitness, result.mask.count()});
      if (iter == params.iterations) break;

      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t b = 0; b < d; ++b) {
          double x = position[i].test(b) ? 1.0 : 0.0;
          double r1 = rng.next_double();
          double r2 = rng.next_double();
          double v = params.inertia * velocity[i][b] +
                     params.cognitive * r1 * ((pbest[i].test(b) ? 1.0 : 0.0) - x) +
                     params.social * r2 * ((result.mask.test(b) ? 1.0 : 0.0) - x);
          v = std::clamp(v, -params.velocity_clamp, params.velocity_clamp);
          velocity[i][b] = v;
          position[i].set(b, rng.next_double() < sigmoid(v));
        }
        repair(position[i], rng);
      }
    }
  } catch (const BudgetExhausted&) {
    result.truncated = true;
  }

  if (!result.mask.any()) throw Error("pso_select: search ended without a usable mask");
  return result;
}

}  // namespace enersave
