#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "enersave/matrix.hpp"

namespace enersave {

struct MetricsReport {
  std::size_t n = 0;
  double mse = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  // Unset when the true values are constant (zero total variance).
  std::optional<double> r2;
};

// mse = mean squared residual, mae = mean absolute residual,
// r2 = 1 - SSE/SST with SST about the mean of y_true.
MetricsReport metrics(const std::vector<double>& y_true, const std::vector<double>& y_pred);

// aic = n * ln(mse) + 2k. mse == 0 returns -infinity (perfect fit).
double aic(std::size_t n, double mse, std::size_t k);

struct ComparisonRow {
  std::string selector;
  std::string model;
  double rmse = 0.0;
  std::size_t feature_count = 0;
  double aic = 0.0;
};

struct ComparisonReport {
  // Ascending by aic; ties broken by lower feature count, then by
  // (selector, model) lexicographically. rows[0] is the winner.
  std::vector<ComparisonRow> rows;
};

ComparisonReport compare(std::vector<ComparisonRow> rows);

// Strict weak order used by compare(); exposed for tests.
bool comparison_row_less(const ComparisonRow& a, const ComparisonRow& b);

struct FoldReport {
  MetricsReport train;
  MetricsReport holdout;
};

struct CvResult {
  std::vector<FoldReport> folds;
  MetricsReport mean_train;    // field-wise mean over folds, n summed
  MetricsReport mean_holdout;
};

// Fits on (X, y) and returns a predictor for arbitrary rows.
using ModelFitter = std::function<std::function<std::vector<double>(const Matrix&)>(
    const Matrix&, const std::vector<double>&)>;

// Seeded shuffle, contiguous folds with sizes differing by at most one,
// each fold held out once, model refit from scratch per fold.
CvResult kfold_cv(const Matrix& X, const std::vector<double>& y, std::size_t folds,
                  const ModelFitter& fit, std::uint64_t seed, int threads = 1);

// Exposed for tests: the fold assignment used by kfold_cv.
std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t folds,
                                                      std::uint64_t seed);

struct OverfitGap {
  double validation_gap = 0.0;  // (validation.rmse - train.rmse) / train.rmse
  double test_gap = 0.0;
  bool flagged = false;
  bool severe = false;  // train rmse exactly 0 while another set is not
};

OverfitGap overfit_gap(const MetricsReport& train, const MetricsReport& validation,
                       const MetricsReport& test, double flag_ratio = 0.25);

}  // namespace enersave
