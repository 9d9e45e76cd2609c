#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "enersave/selection.hpp"
#include "test_support.hpp"

using namespace enersave;

namespace {

// d - popcount: the all-ones mask is the unique optimum with fitness 0.
double ones_deficit(const FeatureMask& mask) {
  return static_cast<double>(mask.size() - mask.count());
}

struct CountingEvaluator final : FitnessEvaluator {
  explicit CountingEvaluator(std::optional<std::uint64_t> budget = std::nullopt)
      : FitnessEvaluator(budget) {}
  std::size_t computed = 0;

 protected:
  double compute(const FeatureMask& mask) override {
    ++computed;
    return ones_deficit(mask);
  }
};

// Exact validation RMSE of least squares restricted to the mask; the target
// is 3 * x1 with no noise, so {x1} alone already has fitness zero. The true
// value of a perfect fit is exactly 0, so sub-noise residuals are snapped.
class PlantedEvaluator final : public FitnessEvaluator {
 public:
  PlantedEvaluator(Matrix X, std::vector<double> y) : X_(std::move(X)), y_(std::move(y)) {}

 protected:
  double compute(const FeatureMask& mask) override {
    Matrix sub = subset_cols(X_, mask.indices());
    auto [beta, b] = testsupport::least_squares(sub, y_);
    double sse = 0.0;
    for (std::size_t r = 0; r < sub.rows(); ++r) {
      double pred = b;
      for (std::size_t c = 0; c < sub.cols(); ++c) pred += sub.at(r, c) * beta[c];
      sse += (y_[r] - pred) * (y_[r] - pred);
    }
    double rmse = std::sqrt(sse / static_cast<double>(sub.rows()));
    return rmse < 1e-12 ? 0.0 : rmse;
  }

 private:
  Matrix X_;
  std::vector<double> y_;
};

}  // namespace

TEST_CASE("evaluator memoizes and rejects empty masks") {
  CountingEvaluator e;
  FeatureMask m(4);
  m.set(1);
  CHECK(e.evaluate(m) == 3.0);
  CHECK(e.evaluate(m) == 3.0);
  CHECK(e.computed == 1);
  CHECK(e.distinct_calls() == 1);

  FeatureMask empty(4);
  CHECK_THROWS_AS(e.evaluate(empty), Error);
}

TEST_CASE("evaluator budget throws when exhausted") {
  CountingEvaluator e(2);
  FeatureMask a(3), b(3), c(3);
  a.set(0);
  b.set(1);
  c.set(2);
  e.evaluate(a);
  e.evaluate(b);
  e.evaluate(a);  // cached, free
  CHECK_THROWS_AS(e.evaluate(c), BudgetExhausted);
  CHECK(e.distinct_calls() == 2);
}

TEST_CASE("evaluator prefetch admits within budget in batch order") {
  CountingEvaluator e(3);
  std::vector<FeatureMask> batch;
  for (std::size_t i = 0; i < 5; ++i) {
    FeatureMask m(5);
    m.set(i);
    batch.push_back(m);
  }
  batch.push_back(batch[0]);  // duplicate, not double counted
  e.prefetch(batch, 4);
  CHECK(e.distinct_calls() == 3);
  CHECK(e.evaluate(batch[0]) == 4.0);
  CHECK(e.evaluate(batch[2]) == 4.0);
  CHECK_THROWS_AS(e.evaluate(batch[3]), BudgetExhausted);
}

TEST_CASE("forward selection finds a planted feature in one step") {
  Rng rng(41);
  Matrix X = testsupport::random_matrix(40, 5, rng);
  std::vector<double> y(40);
  for (std::size_t i = 0; i < 40; ++i) y[i] = 3.0 * X.at(i, 1);

  PlantedEvaluator e(X, y);
  auto result = forward_select(e, 5, 5, 1e-3);
  CHECK(result.mask.count() == 1);
  CHECK(result.mask.test(1));
  CHECK(result.fitness == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(result.trace.size() == 1);
  CHECK_FALSE(result.truncated);
}

TEST_CASE("forward selection parameter bounds") {
  CountingEvaluator e;
  CHECK_THROWS_AS(forward_select(e, 5, 0, 1e-3), ConfigError);
  CHECK_THROWS_AS(forward_select(e, 0, 1, 1e-3), ConfigError);
  CHECK_THROWS_AS(forward_select(e, 5, 1, -1.0), ConfigError);
}

TEST_CASE("forward selection with one feature evaluates once") {
  CountingEvaluator e;
  auto result = forward_select(e, 1, 1, 0.0);
  CHECK(result.mask.count() == 1);
  CHECK(e.computed == 1);
}

TEST_CASE("forward selection trace strictly improves") {
  // fitness = distance from the all-ones mask; every added bit improves
  CountingEvaluator e;
  auto result = forward_select(e, 6, 6, 0.0);
  CHECK(result.mask.count() == 6);
  for (std::size_t i = 1; i < result.trace.size(); ++i)
    CHECK(result.trace[i].best_fitness < result.trace[i - 1].best_fitness);
}

TEST_CASE("forward selection truncates on budget exhaustion") {
  CountingEvaluator e(7);  // step 1 needs 5, step 2 exhausts after 2 more
  auto result = forward_select(e, 5, 5, 0.0);
  CHECK(result.truncated);
  CHECK(result.mask.any());
  CHECK(e.distinct_calls() <= 7);
}

TEST_CASE("ga_select solves ones-deficit") {
  CountingEvaluator e;
  GaSelectParams p;
  p.generations = 40;
  p.seed = 7;
  auto result = ga_select(e, 8, p);
  CHECK(result.fitness == 0.0);
  CHECK(result.mask.count() == 8);
}

TEST_CASE("ga_select single feature") {
  CountingEvaluator e;
  GaSelectParams p;
  p.generations = 2;
  auto result = ga_select(e, 1, p);
  CHECK(result.mask.count() == 1);
}

TEST_CASE("ga_select with full elitism freezes the population") {
  CountingEvaluator e;
  GaSelectParams p;
  p.population_size = 6;
  p.elitism_count = 6;
  p.generations = 10;
  p.seed = 3;
  auto result = ga_select(e, 10, p);
  // best fitness settles after the first generation and never changes
  double after_first = result.trace[1].best_fitness;
  for (std::size_t g = 1; g < result.trace.size(); ++g)
    CHECK(result.trace[g].best_fitness == after_first);
}

TEST_CASE("ga_select best-ever fitness is monotone and deterministic") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    CountingEvaluator e1, e2;
    GaSelectParams p;
    p.generations = 15;
    p.seed = seed;
    auto a = ga_select(e1, 10, p);
    auto b = ga_select(e2, 10, p);
    CHECK(a.mask == b.mask);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t g = 0; g < a.trace.size(); ++g) {
      CHECK(a.trace[g].best_fitness == b.trace[g].best_fitness);
      if (g > 0) CHECK(a.trace[g].best_fitness <= a.trace[g - 1].best_fitness);
    }
    CHECK(a.mask.any());
  }
}

TEST_CASE("ga_select parameter validation") {
  CountingEvaluator e;
  GaSelectParams p;
  p.population_size = 1;
  CHECK_THROWS_AS(ga_select(e, 4, p), ConfigError);
  p.population_size = 10;
  p.tournament_size = 11;
  CHECK_THROWS_AS(ga_select(e, 4, p), ConfigError);
  p.tournament_size = 3;
  p.per_bit_mutation_prob = 1.5;
  CHECK_THROWS_AS(ga_select(e, 4, p), ConfigError);
  p.per_bit_mutation_prob = 0.0;
  p.crossover_prob = -0.2;
  CHECK_THROWS_AS(ga_select(e, 4, p), ConfigError);
}

TEST_CASE("pso_select solves ones-deficit") {
  CountingEvaluator e;
  PsoSelectParams p;
  p.swarm_size = 20;
  p.iterations = 60;
  p.seed = 11;
  auto result = pso_select(e, 8, p);
  CHECK(result.fitness == 0.0);
  CHECK(result.mask.count() == 8);
}

TEST_CASE("pso_select validation and determinism") {
  CountingEvaluator e;
  PsoSelectParams bad;
  bad.velocity_clamp = 0.0;
  CHECK_THROWS_AS(pso_select(e, 4, bad), ConfigError);

  PsoSelectParams p;
  p.iterations = 12;
  p.seed = 21;
  CountingEvaluator e1, e2;
  auto a = pso_select(e1, 9, p);
  auto b = pso_select(e2, 9, p);
  CHECK(a.mask == b.mask);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].best_fitness == b.trace[i].best_fitness);
    if (i > 0) CHECK(a.trace[i].best_fitness <= a.trace[i - 1].best_fitness);
  }
  CHECK(a.mask.any());
}

TEST_CASE("selector evaluations stay within budget") {
  for (int which = 0; which < 2; ++which) {
    CountingEvaluator e(30);
    SelectionResult result;
    if (which == 0) {
      GaSelectParams p;
      p.generations = 50;
      p.seed = 1;
      result = ga_select(e, 10, p);
    } else {
      PsoSelectParams p;
      p.iterations = 50;
      p.seed = 1;
      result = pso_select(e, 10, p);
    }
    CHECK(result.truncated);
    CHECK(e.distinct_calls() <= 30);
    CHECK(result.mask.any());
  }
}

TEST_CASE("trace csv rendering") {
  std::vector<TracePoint> trace = {{0, 2.5, 3}, {1, 1.25, 4}};
  CHECK(trace_csv(trace) == "step,best_fitness,feature_count\n0,2.5,3\n1,1.25,4\n");
}
