#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "enersave/error.hpp"
#include "enersave/features.hpp"

namespace enersave {

struct BudgetExhausted : Error {
  BudgetExhausted() : Error("fitness evaluation budget exhausted") {}
};

// Wrapper fitness: validation RMSE of the downstream model retrained on the
// masked features; lower is better. Evaluations are memoized, so each
// distinct mask costs at most one model fit, and an optional budget caps
// the number of distinct evaluations. Empty masks are rejected before the
// model is ever trained.
class FitnessEvaluator {
 public:
  explicit FitnessEvaluator(std::optional<std::uint64_t> call_budget = std::nullopt)
      : budget_(call_budget) {}
  virtual ~FitnessEvaluator() = default;

  double evaluate(const FeatureMask& mask);

  // Fills the memo cache for a batch. New masks are admitted against the
  // budget in first-appearance order, then computed (possibly in
  // parallel), so results never depend on the thread count.
  void prefetch(const std::vector<FeatureMask>& batch, int threads = 1);

  std::uint64_t distinct_calls() const { return calls_; }
  std::optional<std::uint64_t> budget() const { return budget_; }

 protected:
  virtual double compute(const FeatureMask& mask) = 0;

 private:
  std::optional<std::uint64_t> budget_;
  std::uint64_t calls_ = 0;
  std::unordered_map<std::string, double> memo_;
};

// Fitness backed by a plain function; used by tests and the bindings.
class CallbackEvaluator final : public FitnessEvaluator {
 public:
  CallbackEvaluator(std::function<double(const FeatureMask&)> fn,
                    std::optional<std::uint64_t> call_budget = std::nullopt)
      : FitnessEvaluator(call_budget), fn_(std::move(fn)) {}

 protected:
  double compute(const FeatureMask& mask) override { return fn_(mask); }

 private:
  std::function<double(const FeatureMask&)> fn_;
};

struct TracePoint {
  std::size_t step = 0;        // step / generation / iteration index
  double best_fitness = 0.0;   // best-ever fitness after this step
  std::size_t feature_count = 0;
};

struct SelectionResult {
  FeatureMask mask;
  double fitness = 0.0;
  std::vector<TracePoint> trace;
  bool truncated = false;  // budget ran out mid-search
};

// Greedy wrapper: each step evaluates every single-feature addition and
// adds the best; stops when the relative improvement drops below rel_tol,
// max_features is reached, or no features remain.
SelectionResult forward_select(FitnessEvaluator& evaluator, std::size_t d,
                               std::size_t max_features, double rel_tol, int threads = 1);

struct GaSelectParams {
  std::size_t population_size = 30;
  std::size_t generations = 40;
  double crossover_prob = 0.8;
  double per_bit_mutation_prob = 0.0;  // 0 means 1/d
  std::size_t tournament_size = 3;
  std::size_t elitism_count = 1;
  std::uint64_t seed = 0;
};

SelectionResult ga_select(FitnessEvaluator& evaluator, std::size_t d,
                          const GaSelectParams& params, int threads = 1);

struct PsoSelectParams {
  std::size_t swarm_size = 30;
  std::size_t iterations = 40;
  double inertia = 0.7;
  double cognitive = 1.5;  // c1
  double social = 1.5;     // c2
  double velocity_clamp = 4.0;
  std::uint64_t seed = 0;
};

// Binary PSO: real velocities v <- w*v + c1*r1*(pbest-x) + c2*r2*(gbest-x)
// clamped to +/- velocity_clamp; bit set iff a uniform draw < sigmoid(v).
SelectionResult pso_select(FitnessEvaluator& evaluator, std::size_t d,
                           const PsoSelectParams& params, int threads = 1);

// Selector trace as CSV: step,best_fitness,feature_count.
std::string trace_csv(const std::vector<TracePoint>& trace);

}  // namespace enersave
