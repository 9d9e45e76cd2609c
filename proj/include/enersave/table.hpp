#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace enersave {

enum class ColumnKind { categorical, integer, ordinal };

std::string to_string(ColumnKind kind);
ColumnKind column_kind_from_string(const std::string& s);

// A cell is raw text; std::nullopt is the missing marker.
using Cell = std::optional<std::string>;

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::categorical;
  std::vector<Cell> values;
};

// Columnar dataset, the unit of ingestion and cleaning. Every column holds
// exactly row_count values and names are unique.
struct Table {
  std::vector<Column> columns;
  std::size_t row_count = 0;

  const Column& column(const std::string& name) const;
  Column& column(const std::string& name);
  bool has_column(const std::string& name) const;
  std::size_t column_index(const std::string& name) const;
};

struct CaseMerge {
  std::string column;
  std::string from_text;
  std::string to_text;
};

struct AnomalyRemap {
  std::string column;
  std::string from_value;
  std::string to_value;
};

struct MissingFill {
  std::string column;
  std::string fill_text;
};

struct CleaningRules {
  std::vector<CaseMerge> case_merges;
  std::vector<AnomalyRemap> anomaly_remaps;
  std::vector<MissingFill> missing_fills;
  std::vector<std::string> drop_columns;
};

struct DateYearRule {
  std::string column;  // becomes an ordinal year integer
};

struct BinaryRule {
  std::string column;
  std::string one_category;  // mapped to 1, the other category to 0
};

struct TransformSpec {
  std::vector<DateYearRule> date_year_columns;
  std::vector<BinaryRule> binary_columns;
};

// Reads a comma-separated file with a header row and optional quoted fields.
// Column kinds come from `schema` overrides, otherwise inferred: all
// non-missing cells numeric -> integer, else categorical. Empty cells become
// the missing marker. Throws DataError on ragged rows (naming the row index)
// and duplicate header names.
Table load_csv(const std::string& path,
               const std::map<std::string, ColumnKind>& schema = {});

// Same parser over in-memory text; load_csv delegates here.
Table parse_csv(const std::string& text,
                const std::map<std::string, ColumnKind>& schema = {});

// Applies case merges, anomaly remaps and missing fills, then removes the
// dropped columns. Row count is unchanged. Throws DataError when a rule
// references a column that does not exist.
Table apply_corrections(const Table& t, const CleaningRules& rules);

// Date columns are truncated to their year (ordinal integers); each listed
// two-category column becomes 0/1 with the named category mapped to 1.
// Throws DataError when a binary rule hits a column with more than two
// distinct non-missing values.
Table transform(const Table& t, const TransformSpec& spec);

}  // namespace enersave
