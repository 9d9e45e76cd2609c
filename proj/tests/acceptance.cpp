// Acceptance suite: one line per criterion, [PASS]/[FAIL]/[SKIP], nonzero
// exit when anything fails. Oracles come from test_support.hpp and stay
// independent of the library code they check.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <cctype>

#include "enersave/error.hpp"
#include "enersave/evaluation.hpp"
#include "enersave/explore.hpp"
#include "enersave/model.hpp"
#include "enersave/pipeline.hpp"
#include "enersave/selection.hpp"
#include "enersave/text.hpp"
#include "enersave/tuning.hpp"
#include "test_support.hpp"

using namespace enersave;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("enersave_acceptance_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------
// 1. best_split equals the exhaustive oracle on 200 seeded instances

bool criterion_split_oracle(std::string& detail) {
  auto start = Clock::now();
  Rng rng(1001);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 5 + rng.next_below(196);   // n <= 200
    std::size_t d = 1 + rng.next_below(8);     // d <= 8
    Matrix X(n, d);
    bool coarse = rng.next_bool();  // half the instances have repeated values
    for (auto& v : X.data())
      v = coarse ? std::floor(rng.next_double() * 16.0) : rng.next_double() * 10.0;
    std::vector<double> y(n);
    for (auto& v : y) v = 10.0 * testsupport::gaussian(rng);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;

    TreeParams params;
    params.min_samples_leaf = 1 + rng.next_below(3);

    auto mine = best_split(X, y, idx, params);
    auto oracle = testsupport::brute_force_split(X, y, idx, params.min_samples_split,
                                                 params.min_samples_leaf,
                                                 params.min_impurity_decrease);
    bool ok = mine.has_value() == oracle.best.has_value();
    if (ok && mine) {
      testsupport::OracleSplit got{mine->feature, mine->threshold, mine->sse_decrease};
      ok = testsupport::split_matches_oracle(got, oracle);
      if (oracle.near_optimal.size() == 1)
        ok = ok && mine->feature == oracle.best->feature &&
             mine->threshold == oracle.best->threshold;
    }
    if (!ok) ++mismatches;
  }
  double elapsed = seconds_since(start);
  detail = "200 instances, " + std::to_string(mismatches) + " mismatches, " +
           format_double(elapsed) + " s";
  return mismatches == 0 && elapsed < 10.0;
}

// ---------------------------------------------------------------------------
// 2. lasso KKT conditions, monotone objective, least-squares agreement

bool criterion_lasso_kkt(std::string& detail) {
  Rng rng(1002);
  int kkt_fail = 0, mono_fail = 0, ls_fail = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 20 + rng.next_below(81);  // n <= 100
    std::size_t d = 2 + rng.next_below(9);    // d <= 10
    Matrix X = testsupport::random_matrix(n, d, rng, 1.0 + rng.next_double());
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i)
      y[i] = 2.0 * X.at(i, 0) - 1.5 * X.at(i, d / 2) + 0.5 * testsupport::gaussian(rng);

    for (double lambda : {0.01, 0.1, 1.0}) {
      auto m = fit_lasso(X, y, lambda, 1e-9, 10000);
      if (testsupport::lasso_kkt_violation(X, y, m.coefficients, m.intercept, lambda) > 1e-4)
        ++kkt_fail;
      for (std::size_t s = 1; s < m.objective_trace.size(); ++s)
        if (m.objective_trace[s] > m.objective_trace[s - 1] + 1e-12) ++mono_fail;
    }

    auto unpenalized = fit_lasso(X, y, 0.0, 1e-12, 50000);
    auto [beta, intercept] = testsupport::least_squares(X, y);
    for (std::size_t c = 0; c < d; ++c)
      if (std::abs(unpenalized.coefficients[c] - beta[c]) >
          1e-6 * std::max(1.0, std::abs(beta[c])))
        ++ls_fail;
    if (std::abs(unpenalized.intercept - intercept) > 1e-6 * std::max(1.0, std::abs(intercept)))
      ++ls_fail;
  }
  detail = "kkt violations " + std::to_string(kkt_fail) + ", objective increases " +
           std::to_string(mono_fail) + ", least-squares mismatches " + std::to_string(ls_fail);
  return kkt_fail == 0 && mono_fail == 0 && ls_fail == 0;
}

// ---------------------------------------------------------------------------
// 3. forest degeneracy and variance reduction

bool criterion_forest(std::string& detail) {
  Rng rng(1003);
  Matrix X = testsupport::random_matrix(400, 5, rng);
  std::vector<double> y(400);
  for (std::size_t i = 0; i < 400; ++i)
    y[i] = (X.at(i, 0) > 0 ? 4.0 : -1.0) + 2.0 * X.at(i, 1) +
           1.5 * testsupport::gaussian(rng);
  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i = 0; i < 400; ++i) (i < 300 ? train_idx : test_idx).push_back(i);
  Matrix Xtr = subset_rows(X, train_idx);
  Matrix Xte = subset_rows(X, test_idx);
  std::vector<double> ytr = subset(y, train_idx);
  std::vector<double> yte = subset(y, test_idx);

  // degenerate forest == single tree, bit for bit
  ForestParams degenerate;
  degenerate.n_trees = 1;
  degenerate.bootstrap = false;
  degenerate.max_features_fraction = 1.0;
  degenerate.seed = 777;
  auto forest1 = fit_forest(Xtr, ytr, degenerate);
  auto tree = fit_tree(Xtr, ytr, degenerate.tree);
  auto pf = forest_predict(forest1, Xte);
  auto pt = tree_predict(tree, Xte);
  bool identical = pf == pt;

  // 100-tree bagged forest beats (or ties) the single deep tree out of sample
  ForestParams bagged = degenerate;
  bagged.n_trees = 100;
  bagged.bootstrap = true;
  bagged.max_features_fraction = 0.6;
  auto forest100 = fit_forest(Xtr, ytr, bagged, 2);
  double mse_tree = metrics(yte, pt).mse;
  double mse_forest = metrics(yte, forest_predict(forest100, Xte)).mse;

  detail = "degenerate identical=" + std::string(identical ? "yes" : "no") +
           ", tree mse " + format_double(mse_tree) + " vs forest mse " +
           format_double(mse_forest);
  return identical && mse_forest <= mse_tree;
}

// ---------------------------------------------------------------------------
// 4. GA/PSO recover the brute-force optimal mask; forward finds a plant

class HoldoutLeastSquaresEvaluator final : public FitnessEvaluator {
 public:
  HoldoutLeastSquaresEvaluator(Matrix Xtr, std::vector<double> ytr, Matrix Xva,
                               std::vector<double> yva)
      : Xtr_(std::move(Xtr)), ytr_(std::move(ytr)), Xva_(std::move(Xva)), yva_(std::move(yva)) {}

 protected:
  double compute(const FeatureMask& mask) override {
    auto cols = mask.indices();
    Matrix A = subset_cols(Xtr_, cols);
    auto [beta, b] = testsupport::least_squares(A, ytr_);
    Matrix V = subset_cols(Xva_, cols);
    double sse = 0.0;
    for (std::size_t r = 0; r < V.rows(); ++r) {
      double pred = b;
      for (std::size_t c = 0; c < V.cols(); ++c) pred += V.at(r, c) * beta[c];
      sse += (yva_[r] - pred) * (yva_[r] - pred);
    }
    double rmse = std::sqrt(sse / static_cast<double>(V.rows()));
    return rmse < 1e-12 ? 0.0 : rmse;  // a perfect fit is exactly zero
  }

 private:
  Matrix Xtr_;
  std::vector<double> ytr_;
  Matrix Xva_;
  std::vector<double> yva_;
};

bool criterion_selector_optimality(std::string& detail) {
  int ga_hits = 0, pso_hits = 0;
  bool forward_ok = true;

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(9000 + seed);
    std::size_t d = 10 + seed % 3;  // 10..12
    std::size_t n_train = 60, n_val = 40;
    Matrix Xtr = testsupport::random_matrix(n_train, d, rng);
    Matrix Xva = testsupport::random_matrix(n_val, d, rng);
    // plant 3 informative features, add noise so extras hurt on holdout
    std::vector<std::size_t> planted = {1, d / 2, d - 1};
    auto target = [&](const Matrix& X, std::size_t r, double noise) {
      double v = noise;
      for (std::size_t p : planted) v += 2.0 * X.at(r, p);
      return v;
    };
    std::vector<double> ytr(n_train), yva(n_val);
    for (std::size_t i = 0; i < n_train; ++i)
      ytr[i] = target(Xtr, i, 1.0 * testsupport::gaussian(rng));
    for (std::size_t i = 0; i < n_val; ++i)
      yva[i] = target(Xva, i, 1.0 * testsupport::gaussian(rng));

    // brute force over all 2^d - 1 masks
    HoldoutLeastSquaresEvaluator brute(Xtr, ytr, Xva, yva);
    double best_fitness = std::numeric_limits<double>::infinity();
    for (std::uint64_t bits = 1; bits < (1ULL << d); ++bits) {
      FeatureMask mask(d);
      for (std::size_t b = 0; b < d; ++b)
        if (bits & (1ULL << b)) mask.set(b);
      best_fitness = std::min(best_fitness, brute.evaluate(mask));
    }

    HoldoutLeastSquaresEvaluator ga_eval(Xtr, ytr, Xva, yva);
    GaSelectParams gp;
    gp.generations = 50;
    gp.seed = seed;
    auto ga = ga_select(ga_eval, d, gp);
    if (ga.fitness <= best_fitness + 1e-9) ++ga_hits;

    HoldoutLeastSquaresEvaluator pso_eval(Xtr, ytr, Xva, yva);
    PsoSelectParams pp;
    pp.iterations = 50;
    pp.seed = seed;
    auto pso = pso_select(pso_eval, d, pp);
    if (pso.fitness <= best_fitness + 1e-9) ++pso_hits;
  }

  // forward selection: noise-free single plant found in exactly one step
  {
    Rng rng(9100);
    Matrix X = testsupport::random_matrix(50, 8, rng);
    std::vector<double> y(50);
    for (std::size_t i = 0; i < 50; ++i) y[i] = 3.0 * X.at(i, 4);
    HoldoutLeastSquaresEvaluator eval(X, y, X, y);
    auto fwd = forward_select(eval, 8, 8, 1e-3);
    forward_ok = fwd.mask.count() == 1 && fwd.mask.test(4) && fwd.trace.size() == 1 &&
                 fwd.fitness <= 1e-9;
  }

  detail = "ga " + std::to_string(ga_hits) + "/10, pso " + std::to_string(pso_hits) +
           "/10, forward one-step " + (forward_ok ? "yes" : "no");
  return ga_hits >= 9 && pso_hits >= 9 && forward_ok;
}

// ---------------------------------------------------------------------------
// 5. ga_tune at least matches a coarse 24-point subgrid

bool criterion_tuning_direction(std::string& detail) {
  HyperSpace full = default_space(ModelKind::tree);
  HyperSpace coarse{{{"max_depth", {3, 12}},
                     {"min_samples_split", {2, 40}},
                     {"min_samples_leaf", {1, 5, 50}},
                     {"min_impurity_decrease", {0.0, 1e-2}}}};
  if (coarse.combination_count() != 24) {
    detail = "coarse subgrid misconfigured";
    return false;
  }

  std::ostringstream log;
  bool all_ok = true;
  for (std::uint64_t ds = 1; ds <= 3; ++ds) {
    Rng rng(5000 + ds);
    std::size_t n = 360;
    Matrix X = testsupport::random_matrix(n, 5, rng, 2.0);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double step = (X.at(i, 0) > 0.5 ? 6.0 : 0.0) + (X.at(i, 2) > -1.0 ? 2.0 : -3.0);
      y[i] = step + 0.8 * X.at(i, 1) + 1.2 * testsupport::gaussian(rng);
    }
    std::vector<std::size_t> tr, va;
    for (std::size_t i = 0; i < n; ++i) (i < 240 ? tr : va).push_back(i);
    Matrix Xtr = subset_rows(X, tr);
    Matrix Xva = subset_rows(X, va);
    std::vector<double> ytr = subset(y, tr);
    std::vector<double> yva = subset(y, va);

    SettingsEvaluator eval = [&](const Settings& s) {
      TreeParams p;
      p.max_depth = static_cast<std::size_t>(s[0]);
      p.min_samples_split = static_cast<std::size_t>(s[1]);
      p.min_samples_leaf = static_cast<std::size_t>(s[2]);
      p.min_impurity_decrease = s[3];
      auto tree = fit_tree(Xtr, ytr, p);
      return metrics(yva, tree_predict(tree, Xva)).mse;
    };

    auto grid = grid_search(coarse, eval);
    GaTuneParams gp;
    gp.seed = 42 + ds;
    auto tuned = ga_tune(full, eval, gp);

    log << " ds" << ds << ": ga " << format_double(tuned.best_metric) << " vs grid "
        << format_double(grid.best_metric) << ";";
    if (!(tuned.best_metric <= grid.best_metric + 1e-12)) all_ok = false;
  }
  detail = log.str();
  return all_ok;
}

// ---------------------------------------------------------------------------
// 6. metrics identities

bool criterion_metrics(std::string& detail) {
  Rng rng(1006);
  int fails = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t n = 2 + rng.next_below(50);
    std::vector<double> y(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = 20.0 * testsupport::gaussian(rng);
      p[i] = 20.0 * testsupport::gaussian(rng);
    }
    auto m = metrics(y, p);
    if (m.rmse != std::sqrt(m.mse)) ++fails;
    if (m.mae > m.rmse + 1e-12) ++fails;

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    auto mp = metrics(y, std::vector<double>(n, mean));
    if (mp.r2 && *mp.r2 != 0.0) ++fails;

    std::size_t an = 1 + rng.next_below(500);
    double mse1 = 0.01 + rng.next_double();
    double mse2 = mse1 * (1.0 + rng.next_double());
    std::size_t k = rng.next_below(40);
    if (!(aic(an, mse1, k) < aic(an, mse2, k))) ++fails;
    if (!(aic(an, mse1, k) < aic(an, mse1, k + 1))) ++fails;
  }

  // hand-derived cases
  auto hand = metrics({1, 3}, {2, 2});
  if (std::abs(hand.mse - 1.0) > 1e-15 || std::abs(hand.mae - 1.0) > 1e-15 ||
      !hand.r2 || std::abs(*hand.r2) > 1e-15)
    ++fails;
  if (aic(10, 1.0, 0) != 0.0) ++fails;
  if (std::abs(aic(100, std::exp(2.0), 3) - 206.0) > 1e-9) ++fails;
  auto perfect = metrics({1, 2, 3}, {1, 2, 3});
  if (perfect.mse != 0.0 || !perfect.r2 || *perfect.r2 != 1.0) ++fails;
  auto undefined = metrics({5, 5}, {1, 9});
  if (undefined.r2.has_value()) ++fails;

  detail = std::to_string(fails) + " violations over 1000 random vectors + hand cases";
  return fails == 0;
}

// ---------------------------------------------------------------------------
// 7. full pipeline: 9 rows per target, < 5 min, byte-identical reruns

bool files_match(const fs::path& a, const fs::path& b, std::string& first_diff) {
  // manifest.json (timestamps) and config.json (echo of the invocation,
  // including out_dir/threads) are run metadata, not numeric artifacts
  auto is_metadata = [](const fs::path& p) {
    return p.filename() == "manifest.json" || p.filename() == "config.json";
  };
  std::map<std::string, fs::path> left, right;
  for (auto& entry : fs::recursive_directory_iterator(a))
    if (entry.is_regular_file() && !is_metadata(entry.path()))
      left[fs::relative(entry.path(), a).string()] = entry.path();
  for (auto& entry : fs::recursive_directory_iterator(b))
    if (entry.is_regular_file() && !is_metadata(entry.path()))
      right[fs::relative(entry.path(), b).string()] = entry.path();
  if (left.size() != right.size()) {
    first_diff = "artifact counts differ";
    return false;
  }
  for (const auto& [rel, path] : left) {
    auto it = right.find(rel);
    if (it == right.end()) {
      first_diff = "missing " + rel;
      return false;
    }
    if (read_file(path) != read_file(it->second)) {
      first_diff = rel;
      return false;
    }
  }
  return true;
}

bool criterion_pipeline(std::string& detail) {
  fs::path dir = fresh_dir("pipeline");
  fs::path csv = dir / "synthetic.csv";
  write_synthetic_csv(csv.string(), 500, 7);

  fs::path config_path = fs::path(ENERSAVE_SOURCE_DIR) / "configs" / "synthetic.json";
  PipelineConfig config = load_config(config_path.string());
  config.input = csv.string();

  auto start = Clock::now();
  config.out_dir = (dir / "run_a").string();
  config.threads = 1;
  auto a = run(config);
  double first_run_seconds = seconds_since(start);

  config.out_dir = (dir / "run_b").string();
  auto b = run(config);

  config.out_dir = (dir / "run_c").string();
  config.threads = 8;
  auto c = run(config);

  bool nine_rows = a.comparison_csvs.size() == 3;
  for (const auto& path : a.comparison_csvs) {
    std::string text = read_file(path);
    std::size_t lines = 0;
    for (char ch : text) lines += ch == '\n' ? 1 : 0;
    nine_rows = nine_rows && lines == 10;  // header + 9 rows
  }

  std::string diff_ab, diff_ac;
  bool rerun_identical = files_match(dir / "run_a", dir / "run_b", diff_ab);
  bool threads_identical = files_match(dir / "run_a", dir / "run_c", diff_ac);

  detail = format_double(first_run_seconds) + " s, 3 targets x 9 rows=" +
           (nine_rows ? "yes" : "no") + ", rerun=" +
           (rerun_identical ? "identical" : "differs at " + diff_ab) + ", threads 1 vs 8=" +
           (threads_identical ? "identical" : "differs at " + diff_ac);
  return first_run_seconds < 300.0 && nine_rows && rerun_identical && threads_identical;
}

// ---------------------------------------------------------------------------
// 8. dataset-conditional checks against the real snapshot

bool criterion_dataset(std::string& detail, bool& skipped) {
  const char* env = std::getenv("ENERSAVE_NY_CSV");
  if (env == nullptr || !fs::exists(env)) {
    skipped = true;
    detail = "set ENERSAVE_NY_CSV to the dataset snapshot to enable";
    return true;
  }

  fs::path config_path = fs::path(ENERSAVE_SOURCE_DIR) / "configs" / "ny_dataset.json";
  PipelineConfig config = load_config(config_path.string());
  config.input = env;

  Table raw = load_csv(config.input, config.schema_overrides);
  bool rows_ok = raw.row_count == 57925 && raw.columns.size() == 26;

  Table cleaned = apply_corrections(raw, config.cleaning);

  // split sizes on the prepared matrix
  FeatureMatrix fm = prepare(config);
  SplitIndices idx = split(fm, config.ratios, derive_seed(config.seed, "split"));
  bool split_ok = idx.train.size() == 34755 && idx.validation.size() == 11585 &&
                  idx.test.size() == 11585;

  auto col = [&](const std::string& name) {
    const Column& c = cleaned.column(name);
    std::vector<double> out;
    for (const auto& cell : c.values)
      out.push_back(cell ? parse_double(*cell).value_or(0.0) : 0.0);
    return out;
  };
  auto fuel_cost = pearson(col("Estimated Annual MMBtu Savings"),
                           col("First Year Energy Savings $ Estimate"));
  auto cost_loan = pearson(col("Total Project Cost"), col("Amount Financed Through Program"));
  bool corr_ok = fuel_cost && std::abs(*fuel_cost - 0.64) <= 0.02 && cost_loan &&
                 std::abs(*cost_loan - 0.65) <= 0.02;

  auto grouped = grouped_mean(cleaned, "Customer Type", "Total Incentives");
  double assisted = 0.0, market = 0.0;
  for (const auto& g : grouped.groups) {
    std::string lower;
    for (char ch : g.group) lower += static_cast<char>(std::tolower(ch));
    if (lower == "assisted") assisted = g.mean;
    if (lower == "market") market = g.mean;
  }
  double ratio = market != 0.0 ? assisted / market : 0.0;
  bool ratio_ok = std::abs(ratio - 5.0) <= 1.0;

  detail = "rows=" + std::to_string(raw.row_count) + ", split " +
           std::to_string(idx.train.size()) + "/" + std::to_string(idx.validation.size()) + "/" +
           std::to_string(idx.test.size()) + ", corr(fuel,cost)=" +
           (fuel_cost ? format_double(*fuel_cost) : "undef") + ", corr(cost,loan)=" +
           (cost_loan ? format_double(*cost_loan) : "undef") + ", incentives ratio=" +
           format_double(ratio);
  return rows_ok && split_ok && corr_ok && ratio_ok;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    std::function<bool(std::string&, bool&)> fn;
  };

  auto wrap = [](bool (*fn)(std::string&)) {
    return [fn](std::string& detail, bool& skipped) {
      skipped = false;
      return fn(detail);
    };
  };

  std::vector<Criterion> criteria = {
      {1, "split-finder matches the exhaustive oracle", wrap(criterion_split_oracle)},
      {2, "lasso subgradient conditions and least-squares agreement", wrap(criterion_lasso_kkt)},
      {3, "forest degeneracy and variance reduction", wrap(criterion_forest)},
      {4, "GA/PSO recover the brute-force optimal mask", wrap(criterion_selector_optimality)},
      {5, "ga_tune matches or beats the coarse grid", wrap(criterion_tuning_direction)},
      {6, "metrics identities", wrap(criterion_metrics)},
      {7, "pipeline shape, runtime and byte-identical reruns", wrap(criterion_pipeline)},
      {8, "dataset-conditional exploration checks",
       [](std::string& detail, bool& skipped) { return criterion_dataset(detail, skipped); }},
  };

  int failures = 0;
  for (auto& c : criteria) {
    std::string detail;
    bool skipped = false;
    bool ok = false;
    try {
      ok = c.fn(detail, skipped);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
      ok = false;
    }
    const char* tag = skipped ? "[SKIP]" : (ok ? "[PASS]" : "[FAIL]");
    std::cout << tag << " " << c.id << ". " << c.name;
    if (!detail.empty()) std::cout << " -- " << detail;
    std::cout << std::endl;
    if (!ok && !skipped) ++failures;
  }
  return failures;
}
