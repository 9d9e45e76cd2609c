#include "enersave/table.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "enersave/error.hpp"
#include "enersave/text.hpp"

namespace enersave {

std::string to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::integer: return "integer";
    case ColumnKind::ordinal: return "ordinal";
  }
  return "categorical";
}

ColumnKind column_kind_from_string(const std::string& s) {
  if (s == "categorical") return ColumnKind::categorical;
  if (s == "integer") return ColumnKind::integer;
  if (s == "ordinal") return ColumnKind::ordinal;
  throw ConfigError("unknown column kind: " + s);
}

const Column& Table::column(const std::string& name) const {
  return columns[column_index(name)];
}

Column& Table::column(const std::string& name) {
  return columns[column_index(name)];
}

bool Table::has_column(const std::string& name) const {
  for (const auto& c : columns)
    if (c.name == name) return true;
  return false;
}

std::size_t Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return i;
  throw DataError("no such column: " + name);
}

namespace {

// One CSV record; handles quoted fields, doubled quotes and embedded
// newlines. Returns false at end of input.
bool read_record(const std::string& text, std::size_t& pos, std::vector<std::string>& fields) {
  fields.clear();
  if (pos >= text.size()) return false;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  while (pos < text.size()) {
    char c = text[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field += '"';
          ++pos;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      ++pos;
      continue;
    }
    if (c == '"' && field.empty()) {
      in_quotes = true;
      ++pos;
      any = true;
      continue;
    }
    if (c == ',') {
      fields.push_back(field);
      field.clear();
      ++pos;
      any = true;
      continue;
    }
    if (c == '\n' || c == '\r') {
      if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
      ++pos;
      fields.push_back(field);
      return true;
    }
    field += c;
    ++pos;
    any = true;
  }
  (void)any;
  fields.push_back(field);
  return true;
}

}  // namespace

Table parse_csv(const std::string& text, const std::map<std::string, ColumnKind>& schema) {
  std::size_t pos = 0;
  std::vector<std::string> fields;
  if (!read_record(text, pos, fields) || (fields.size() == 1 && fields[0].empty()))
    throw DataError("csv: missing header row");

  Table t;
  std::unordered_set<std::string> seen;
  for (auto& name : fields) {
    std::string n = trim(name);
    if (!seen.insert(n).second) throw DataError("csv: duplicate header name: " + n);
    t.columns.push_back(Column{n, ColumnKind::categorical, {}});
  }

  std::size_t row = 0;
  while (read_record(text, pos, fields)) {
    if (fields.size() == 1 && fields[0].empty() && pos >= text.size()) break;  // trailing newline
    ++row;
    if (fields.size() != t.columns.size())
      throw DataError("csv: row " + std::to_string(row) + " has " +
                      std::to_string(fields.size()) + " cells, expected " +
                      std::to_string(t.columns.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      std::string v = trim(fields[c]);
      if (v.empty()) t.columns[c].values.push_back(std::nullopt);
      else t.columns[c].values.push_back(std::move(v));
    }
  }
  t.row_count = row;

  for (auto& col : t.columns) {
    auto it = schema.find(col.name);
    if (it != schema.end()) {
      col.kind = it->second;
      continue;
    }
    bool numeric = true;
    bool any_value = false;
    for (const auto& cell : col.values) {
      if (!cell) continue;
      any_value = true;
      if (!parse_double(*cell)) {
        numeric = false;
        break;
      }
    }
    col.kind = (numeric && any_value) ? ColumnKind::integer : ColumnKind::categorical;
  }
  return t;
}

Table load_csv(const std::string& path, const std::map<std::string, ColumnKind>& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema);
}

Table apply_corrections(const Table& t, const CleaningRules& rules) {
  Table out = t;
  for (const auto& m : rules.case_merges) {
    auto& col = out.column(m.column);
    for (auto& cell : col.values)
      if (cell && *cell == m.from_text) cell = m.to_text;
  }
  for (const auto& r : rules.anomaly_remaps) {
    auto& col = out.column(r.column);
    for (auto& cell : col.values)
      if (cell && *cell == r.from_value) cell = r.to_value;
  }
  for (const auto& f : rules.missing_fills) {
    auto& col = out.column(f.column);
    for (auto& cell : col.values)
      if (!cell) cell = f.fill_text;
  }
  for (const auto& name : rules.drop_columns) {
    std::size_t idx = out.column_index(name);  // throws if absent
    out.columns.erase(out.columns.begin() + static_cast<std::ptrdiff_t>(idx));
  }
  return out;
}

namespace {

// Extracts a 4-digit year from "yyyy-mm-dd", "yyyy/mm/dd", "mm/dd/yyyy",
// "mm-dd-yyyy" or a bare year.
std::optional<int> extract_year(const std::string& s) {
  auto all_digits = [](std::string_view v) {
    if (v.empty()) return false;
    for (char c : v)
      if (c < '0' || c > '9') return false;
    return true;
  };
  if (s.size() >= 4 && all_digits(std::string_view(s).substr(0, 4)) &&
      (s.size() == 4 || s[4] == '-' || s[4] == '/'))
    return std::stoi(s.substr(0, 4));
  if (s.size() >= 5 && all_digits(std::string_view(s).substr(s.size() - 4)) &&
      (s[s.size() - 5] == '-' || s[s.size() - 5] == '/'))
    return std::stoi(s.substr(s.size() - 4));
  return std::nullopt;
}

}  // namespace

Table transform(const Table& t, const TransformSpec& spec) {
  Table out = t;
  for (const auto& rule : spec.date_year_columns) {
    auto& col = out.column(rule.column);
    for (auto& cell : col.values) {
      if (!cell) continue;
      auto year = extract_year(*cell);
      if (!year)
        throw DataError("transform: cannot extract year from '" + *cell + "' in column " +
                        rule.column);
      cell = std::to_string(*year);
    }
    col.kind = ColumnKind::ordinal;
  }
  for (const auto& rule : spec.binary_columns) {
    auto& col = out.column(rule.column);
    std::set<std::string> distinct;
    for (const auto& cell : col.values)
      if (cell) distinct.insert(*cell);
    if (distinct.size() > 2)
      throw DataError("transform: column " + rule.column + " has " +
                      std::to_string(distinct.size()) + " categories, binary rule needs <= 2");
    for (auto& cell : col.values) {
      if (!cell) continue;
      cell = (*cell == rule.one_category) ? "1" : "0";
    }
    col.kind = ColumnKind::integer;
  }
  return out;
}

}  // namespace enersave
