#include "enersave/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "enersave/error.hpp"
#include "enersave/rng.hpp"
#include "enersave/text.hpp"

namespace enersave {

std::size_t FeatureMask::count() const {
  std::size_t c = 0;
  for (auto b : bits) c += b;
  return c;
}

std::vector<std::size_t> FeatureMask::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out.push_back(i);
  return out;
}

std::string FeatureMask::key() const {
  std::string k(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) k[i] = '1';
  return k;
}

const std::vector<double>& FeatureMatrix::target(const std::string& name) const {
  for (const auto& [n, v] : targets)
    if (n == name) return v;
  throw DataError("no such target: " + name);
}

bool FeatureMatrix::has_target(const std::string& name) const {
  for (const auto& [n, v] : targets)
    if (n == name) return true;
  return false;
}

FeatureMatrix FeatureMatrix::rows(const std::vector<std::size_t>& idx) const {
  FeatureMatrix out;
  out.feature_names = feature_names;
  out.X = subset_rows(X, idx);
  for (const auto& [name, v] : targets) out.targets.emplace_back(name, subset(v, idx));
  return out;
}

namespace {

double numeric_cell(const Column& col, std::size_t row) {
  const Cell& cell = col.values[row];
  if (!cell)
    throw DataError("encode: missing value in numeric column '" + col.name + "' at row " +
                    std::to_string(row));
  auto v = parse_double(*cell);
  if (!v)
    throw DataError("encode: non-numeric value '" + *cell + "' in column '" + col.name +
                    "' at row " + std::to_string(row));
  if (!std::isfinite(*v))
    throw DataError("encode: non-finite value in column '" + col.name + "'");
  return *v;
}

// Top-k categories by descending frequency, ties broken lexicographically.
std::vector<std::string> top_categories(const Column& col, std::size_t top_k) {
  std::map<std::string, std::size_t> freq;
  for (std::size_t r = 0; r < col.values.size(); ++r) {
    if (!col.values[r])
      throw DataError("encode: missing value in categorical column '" + col.name +
                      "' at row " + std::to_string(r) + " (apply corrections first)");
    ++freq[*col.values[r]];
  }
  std::vector<std::pair<std::string, std::size_t>> items(freq.begin(), freq.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < items.size() && i < top_k; ++i) out.push_back(items[i].first);
  return out;
}

}  // namespace

FeatureMatrix encode_dummies(const Table& t, std::size_t top_k,
                             const std::vector<std::string>& targets) {
  if (top_k < 1) throw ConfigError("encode: top_k must be >= 1");
  for (const auto& name : targets)
    if (!t.has_column(name)) throw DataError("encode: target column missing: " + name);

  auto is_target = [&](const std::string& name) {
    return std::find(targets.begin(), targets.end(), name) != targets.end();
  };

  FeatureMatrix out;
  std::vector<std::vector<double>> cols;  // feature columns in order

  for (const auto& col : t.columns) {
    if (is_target(col.name)) continue;
    if (col.kind == ColumnKind::categorical) {
      auto cats = top_categories(col, top_k);
      for (const auto& cat : cats) {
        std::vector<double> indicator(t.row_count, 0.0);
        for (std::size_t r = 0; r < t.row_count; ++r)
          if (*col.values[r] == cat) indicator[r] = 1.0;
        out.feature_names.push_back(col.name + "=" + cat);
        cols.push_back(std::move(indicator));
      }
    } else {
      std::vector<double> values(t.row_count);
      for (std::size_t r = 0; r < t.row_count; ++r) values[r] = numeric_cell(col, r);
      out.feature_names.push_back(col.name);
      cols.push_back(std::move(values));
    }
  }

  out.X = Matrix(t.row_count, cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < t.row_count; ++r) out.X.at(r, c) = cols[c][r];

  for (const auto& name : targets) {
    const Column& col = t.column(name);
    std::vector<double> values(t.row_count);
    for (std::size_t r = 0; r < t.row_count; ++r) values[r] = numeric_cell(col, r);
    out.targets.emplace_back(name, std::move(values));
  }
  return out;
}

SplitIndices split(std::size_t row_count, const SplitRatios& ratios, std::uint64_t seed) {
  for (double r : {ratios.train, ratios.validation, ratios.test})
    if (!(r > 0.0 && r < 1.0)) throw ConfigError("split: ratios must lie in (0,1)");
  double sum = ratios.train + ratios.validation + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split: ratios must sum to 1");
  if (row_count < 5) throw DataError("split: need at least 5 rows");

  std::size_t n_val = static_cast<std::size_t>(
      std::floor(static_cast<double>(row_count) * ratios.validation));
  std::size_t n_test =
      static_cast<std::size_t>(std::floor(static_cast<double>(row_count) * ratios.test));
  if (n_val == 0 || n_test == 0 || n_val + n_test >= row_count)
    throw DataError("split: row count too small for nonempty parts");
  std::size_t n_train = row_count - n_val - n_test;  // floor(train) plus remainder

  std::vector<std::size_t> order(row_count);
  for (std::size_t i = 0; i < row_count; ++i) order[i] = i;
  Rng rng(seed);
  shuffle(order, rng);

  SplitIndices out;
  out.seed = seed;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                        order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return out;
}

FeatureMask threshold_filter(const FeatureMatrix& fm, const std::string& target, double tau) {
  if (tau < 0.0) throw ConfigError("threshold_filter: tau must be >= 0");
  const std::vector<double>& y = fm.target(target);
  const std::size_t n = fm.X.rows();
  if (n < 2) throw DataError("threshold_filter: need at least 2 rows");

  double y_mean = 0.0;
  for (double v : y) y_mean += v;
  y_mean /= static_cast<double>(n);
  double y_var = 0.0;
  for (double v : y) y_var += (v - y_mean) * (v - y_mean);

  FeatureMask mask(fm.X.cols());
  for (std::size_t c = 0; c < fm.X.cols(); ++c) {
    double x_mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) x_mean += fm.X.at(r, c);
    x_mean /= static_cast<double>(n);
    double x_var = 0.0, cov = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double dx = fm.X.at(r, c) - x_mean;
      x_var += dx * dx;
      cov += dx * (y[r] - y_mean);
    }
    if (x_var == 0.0) continue;  // constant feature
    // Constant target: no correlation signal, treated as r = 0.
    double r = (y_var == 0.0) ? 0.0 : cov / std::sqrt(x_var * y_var);
    if (std::abs(r) >= tau) mask.set(c);
  }
  return mask;
}

std::string feature_matrix_csv(const FeatureMatrix& fm) {
  std::string out;
  bool first = true;
  for (const auto& name : fm.feature_names) {
    if (!first) out += ',';
    out += csv_field(name);
    first = false;
  }
  for (const auto& [name, v] : fm.targets) {
    if (!first) out += ',';
    out += csv_field(name);
    first = false;
  }
  out += '\n';
  for (std::size_t r = 0; r < fm.X.rows(); ++r) {
    first = true;
    for (std::size_t c = 0; c < fm.X.cols(); ++c) {
      if (!first) out += ',';
      out += format_double(fm.X.at(r, c));
      first = false;
    }
    for (const auto& [name, v] : fm.targets) {
      if (!first) out += ',';
      out += format_double(v[r]);
      first = false;
    }
    out += '\n';
  }
  return out;
}

}  // namespace enersave
