#include "enersave/explore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "enersave/error.hpp"
#include "enersave/text.hpp"

namespace enersave {

std::vector<SummaryStats> summarize(const Table& t) {
  std::vector<SummaryStats> out;
  out.reserve(t.columns.size());
  for (const auto& col : t.columns) {
    SummaryStats s;
    s.column = col.name;
    if (col.kind == ColumnKind::categorical) {
      std::map<std::string, std::size_t> freq;
      for (const auto& cell : col.values) {
        if (!cell) {
          ++s.missing;
          continue;
        }
        ++s.count;
        ++freq[*cell];
      }
      s.frequencies.assign(freq.begin(), freq.end());
      std::stable_sort(s.frequencies.begin(), s.frequencies.end(),
                       [](const auto& a, const auto& b) {
                         if (a.second != b.second) return a.second > b.second;
                         return a.first < b.first;
                       });
    } else {
      double sum = 0.0, sq = 0.0;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (const auto& cell : col.values) {
        if (!cell) {
          ++s.missing;
          continue;
        }
        auto v = parse_double(*cell);
        if (!v) throw DataError("summarize: non-numeric value in column " + col.name);
        ++s.count;
        sum += *v;
        sq += *v * *v;
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
      }
      if (s.count > 0) {
        double n = static_cast<double>(s.count);
        double mean = sum / n;
        s.mean = mean;
        s.std_dev = std::sqrt(std::max(0.0, sq / n - mean * mean));
        s.min = lo;
        s.max = hi;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

GroupedMeans grouped_mean(const Table& t, const std::string& group_col,
                          const std::string& value_col) {
  const Column& g = t.column(group_col);
  const Column& v = t.column(value_col);
  if (v.kind == ColumnKind::categorical)
    throw DataError("grouped_mean: value column must be numeric: " + value_col);

  std::map<std::string, std::pair<std::size_t, double>> acc;  // group -> (count, sum)
  GroupedMeans out;
  for (std::size_t r = 0; r < t.row_count; ++r) {
    if (!g.values[r] || !v.values[r]) {
      ++out.excluded;
      continue;
    }
    auto value = parse_double(*v.values[r]);
    if (!value) throw DataError("grouped_mean: non-numeric value in column " + value_col);
    auto& slot = acc[*g.values[r]];
    ++slot.first;
    slot.second += *value;
  }
  for (const auto& [name, slot] : acc)
    out.groups.push_back({name, slot.first, slot.second / static_cast<double>(slot.first)});
  return out;  // std::map iterates in name order
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error("pearson: length mismatch");
  if (x.size() < 2) throw Error("pearson: need at least 2 samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

std::optional<double> CorrMatrix::at(const std::string& a, const std::string& b) const {
  auto find = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw Error("correlation matrix: no such column " + name);
  };
  return values[find(a)][find(b)];
}

CorrMatrix correlation_matrix(const FeatureMatrix& fm, bool include_targets) {
  if (fm.X.rows() < 2) throw DataError("correlation_matrix: need at least 2 rows");
  CorrMatrix out;
  std::vector<std::vector<double>> cols;
  for (std::size_t c = 0; c < fm.X.cols(); ++c) {
    out.names.push_back(fm.feature_names[c]);
    cols.push_back(fm.X.column(c));
  }
  if (include_targets) {
    for (const auto& [name, v] : fm.targets) {
      out.names.push_back(name);
      cols.push_back(v);
    }
  }
  const std::size_t k = cols.size();
  out.values.assign(k, std::vector<std::optional<double>>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      auto r = pearson(cols[i], cols[j]);
      out.values[i][j] = r;
      out.values[j][i] = r;
    }
  }
  return out;
}

ScatterRows scatter_extract(const Table& t, const std::string& x_col, const std::string& y_col,
                            const std::vector<std::string>& hue_cols) {
  if (hue_cols.size() > 3) throw ConfigError("scatter_extract: at most 3 hue columns");
  const Column& x = t.column(x_col);
  const Column& y = t.column(y_col);
  if (x.kind == ColumnKind::categorical || y.kind == ColumnKind::categorical)
    throw DataError("scatter_extract: x and y columns must be numeric");
  std::vector<const Column*> hues;
  for (const auto& name : hue_cols) hues.push_back(&t.column(name));

  ScatterRows out;
  out.header.push_back(x_col);
  out.header.push_back(y_col);
  for (const auto& name : hue_cols) out.header.push_back(name);

  for (std::size_t r = 0; r < t.row_count; ++r) {
    bool complete = x.values[r] && y.values[r];
    for (const auto* h : hues) complete = complete && h->values[r].has_value();
    if (!complete) {
      ++out.excluded;
      continue;
    }
    std::vector<std::string> row{*x.values[r], *y.values[r]};
    for (const auto* h : hues) row.push_back(*h->values[r]);
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryStats>& stats) {
  std::string out = "column,count,missing,mean,std,min,max,top_categories\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& s : stats) {
    out += csv_field(s.column);
    out += ',' + std::to_string(s.count);
    out += ',' + std::to_string(s.missing);
    out += ',' + opt(s.mean);
    out += ',' + opt(s.std_dev);
    out += ',' + opt(s.min);
    out += ',' + opt(s.max);
    std::string cats;
    for (std::size_t i = 0; i < s.frequencies.size() && i < 10; ++i) {
      if (i) cats += "; ";
      cats += s.frequencies[i].first + ": " + std::to_string(s.frequencies[i].second);
    }
    out += ',' + csv_field(cats);
    out += '\n';
  }
  return out;
}

std::string grouped_csv(const GroupedMeans& gm) {
  std::string out = "group,count,mean\n";
  for (const auto& g : gm.groups) {
    out += csv_field(g.group);
    out += ',' + std::to_string(g.count);
    out += ',' + format_double(g.mean);
    out += '\n';
  }
  out += "# excluded_rows," + std::to_string(gm.excluded) + "\n";
  return out;
}

std::string corr_matrix_csv(const CorrMatrix& cm) {
  std::string out;
  for (const auto& name : cm.names) {
    out += ',';
    out += csv_field(name);
  }
  out += '\n';
  for (std::size_t i = 0; i < cm.names.size(); ++i) {
    out += csv_field(cm.names[i]);
    for (std::size_t j = 0; j < cm.names.size(); ++j) {
      out += ',';
      if (cm.values[i][j]) out += format_double(*cm.values[i][j]);
    }
    out += '\n';
  }
  return out;
}

std::string scatter_csv(const ScatterRows& sr) {
  std::string out;
  for (std::size_t i = 0; i < sr.header.size(); ++i) {
    if (i) out += ',';
    out += csv_field(sr.header[i]);
  }
  out += '\n';
  for (const auto& row : sr.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_field(row[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace enersave
