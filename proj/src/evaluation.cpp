#include "enersave/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "enersave/error.hpp"
#include "enersave/parallel.hpp"
#include "enersave/rng.hpp"

namespace enersave {

MetricsReport metrics(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
  if (y_true.empty()) throw Error("metrics: empty input");
  if (y_true.size() != y_pred.size()) throw Error("metrics: length mismatch");
  const std::size_t n = y_true.size();
  double sse = 0.0, sae = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(y_true[i]) || !std::isfinite(y_pred[i]))
      throw Error("metrics: non-finite value");
    double r = y_true[i] - y_pred[i];
    sse += r * r;
    sae += std::abs(r);
    mean += y_true[i];
  }
  mean /= static_cast<double>(n);
  double sst = 0.0;
  for (double v : y_true) sst += (v - mean) * (v - mean);

  MetricsReport out;
  out.n = n;
  out.mse = sse / static_cast<double>(n);
  out.rmse = std::sqrt(out.mse);
  out.mae = sae / static_cast<double>(n);
  if (sst > 0.0) out.r2 = 1.0 - sse / sst;
  return out;
}

double aic(std::size_t n, double mse, std::size_t k) {
  if (n < 1) throw Error("aic: n must be >= 1");
  if (mse < 0.0) throw Error("aic: mse must be non-negative");
  if (mse == 0.0) return -std::numeric_limits<double>::infinity();
  return static_cast<double>(n) * std::log(mse) + 2.0 * static_cast<double>(k);
}

bool comparison_row_less(const ComparisonRow& a, const ComparisonRow& b) {
  if (a.aic != b.aic) return a.aic < b.aic;
  if (a.feature_count != b.feature_count) return a.feature_count < b.feature_count;
  if (a.selector != b.selector) return a.selector < b.selector;
  return a.model < b.model;
}

ComparisonReport compare(std::vector<ComparisonRow> rows) {
  if (rows.empty()) throw Error("compare: no rows");
  std::stable_sort(rows.begin(), rows.end(), comparison_row_less);
  return ComparisonReport{std::move(rows)};
}

std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t folds,
                                                      std::uint64_t seed) {
  if (folds < 2) throw Error("kfold: folds must be >= 2");
  if (folds > n) throw Error("kfold: folds exceed sample count");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  shuffle(order, rng);

  std::vector<std::vector<std::size_t>> out(folds);
  std::size_t base = n / folds, extra = n % folds, pos = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    std::size_t size = base + (f < extra ? 1 : 0);
    out[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                  order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return out;
}

namespace {

MetricsReport mean_report(const std::vector<MetricsReport>& reports) {
  MetricsReport mean;
  double r2_sum = 0.0;
  bool r2_ok = true;
  for (const auto& r : reports) {
    mean.n += r.n;
    mean.mse += r.mse;
    mean.rmse += r.rmse;
    mean.mae += r.mae;
    if (r.r2) r2_sum += *r.r2;
    else r2_ok = false;
  }
  const double f = static_cast<double>(reports.size());
  mean.mse /= f;
  mean.rmse /= f;
  mean.mae /= f;
  if (r2_ok) mean.r2 = r2_sum / f;
  return mean;
}

}  // namespace

CvResult kfold_cv(const Matrix& X, const std::vector<double>& y, std::size_t folds,
                  const ModelFitter& fit, std::uint64_t seed, int threads) {
  if (X.rows() != y.size()) throw Error("kfold: X/y length mismatch");
  auto parts = kfold_partition(X.rows(), folds, seed);

  CvResult out;
  out.folds.resize(folds);
  parallel_for(folds, threads, [&](std::size_t f) {
    std::vector<std::size_t> train_idx;
    train_idx.reserve(X.rows() - parts[f].size());
    for (std::size_t g = 0; g < folds; ++g)
      if (g != f) train_idx.insert(train_idx.end(), parts[g].begin(), parts[g].end());

    Matrix Xtr = subset_rows(X, train_idx);
    std::vector<double> ytr = subset(y, train_idx);
    Matrix Xho = subset_rows(X, parts[f]);
    std::vector<double> yho = subset(y, parts[f]);

    auto predictor = fit(Xtr, ytr);
    out.folds[f].train = metrics(ytr, predictor(Xtr));
    out.folds[f].holdout = metrics(yho, predictor(Xho));
  });

  std::vector<MetricsReport> tr, ho;
  for (const auto& f : out.folds) {
    tr.push_back(f.train);
    ho.push_back(f.holdout);
  }
  out.mean_train = mean_report(tr);
  out.mean_holdout = mean_report(ho);
  return out;
}

OverfitGap overfit_gap(const MetricsReport& train, const MetricsReport& validation,
                       const MetricsReport& test, double flag_ratio) {
  OverfitGap out;
  if (train.rmse == 0.0) {
    if (validation.rmse > 0.0 || test.rmse > 0.0) {
      out.severe = true;
      out.flagged = true;
      out.validation_gap = std::numeric_limits<double>::infinity();
      out.test_gap = std::numeric_limits<double>::infinity();
    }
    return out;
  }
  out.validation_gap = (validation.rmse - train.rmse) / train.rmse;
  out.test_gap = (test.rmse - train.rmse) / train.rmse;
  out.flagged = out.validation_gap > flag_ratio || out.test_gap > flag_ratio;
  return out;
}

}  // namespace enersave
