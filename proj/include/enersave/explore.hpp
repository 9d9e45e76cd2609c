#pragma once

#include <optional>
#include <string>
#include <vector>

#include "enersave/features.hpp"
#include "enersave/table.hpp"

namespace enersave {

// Per-column summary. Numeric moments use the population (divide-by-n)
// convention. Category frequencies are sorted by descending count, then
// lexicographically.
struct SummaryStats {
  std::string column;
  std::size_t count = 0;    // non-missing cells
  std::size_t missing = 0;
  std::optional<double> mean;  // numeric columns only
  std::optional<double> std_dev;
  std::optional<double> min;
  std::optional<double> max;
  std::vector<std::pair<std::string, std::size_t>> frequencies;  // categorical only
};

std::vector<SummaryStats> summarize(const Table& t);

struct GroupMean {
  std::string group;
  std::size_t count = 0;
  double mean = 0.0;
};

struct GroupedMeans {
  std::vector<GroupMean> groups;  // sorted by group name
  std::size_t excluded = 0;       // rows dropped for missing group or value
};

GroupedMeans grouped_mean(const Table& t, const std::string& group_col,
                          const std::string& value_col);

// Pearson product-moment coefficient; nullopt when either vector has zero
// variance.
std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

struct CorrMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<std::optional<double>>> values;  // symmetric

  std::optional<double> at(const std::string& a, const std::string& b) const;
};

CorrMatrix correlation_matrix(const FeatureMatrix& fm, bool include_targets);

struct ScatterRows {
  std::vector<std::string> header;            // x, y, hue columns
  std::vector<std::vector<std::string>> rows;  // missing-filtered
  std::size_t excluded = 0;
};

ScatterRows scatter_extract(const Table& t, const std::string& x_col, const std::string& y_col,
                            const std::vector<std::string>& hue_cols);

// CSV renderings of the artifacts above.
std::string summary_csv(const std::vector<SummaryStats>& stats);
std::string grouped_csv(const GroupedMeans& gm);
std::string corr_matrix_csv(const CorrMatrix& cm);
std::string scatter_csv(const ScatterRows& sr);

}  // namespace enersave
