#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "enersave/matrix.hpp"
#include "enersave/table.hpp"

namespace enersave {

// Boolean vector over feature columns; the decision variable of the
// selectors. Bits are stored as 0/1 bytes.
struct FeatureMask {
  std::vector<std::uint8_t> bits;

  FeatureMask() = default;
  explicit FeatureMask(std::size_t n, bool set = false) : bits(n, set ? 1 : 0) {}

  std::size_t size() const { return bits.size(); }
  std::size_t count() const;
  bool any() const { return count() > 0; }
  bool test(std::size_t i) const { return bits[i] != 0; }
  void set(std::size_t i, bool v = true) { bits[i] = v ? 1 : 0; }

  std::vector<std::size_t> indices() const;
  std::string key() const;  // memoization key

  bool operator==(const FeatureMask& other) const { return bits == other.bits; }
};

// Fully numeric design matrix plus named target vectors.
struct FeatureMatrix {
  std::vector<std::string> feature_names;
  Matrix X;
  std::vector<std::pair<std::string, std::vector<double>>> targets;

  const std::vector<double>& target(const std::string& name) const;
  bool has_target(const std::string& name) const;
  FeatureMatrix rows(const std::vector<std::size_t>& idx) const;
};

// Each categorical column yields one 0/1 indicator per top-k most frequent
// category (frequency ties broken lexicographically); rows outside those
// categories get all-zero indicators. Numeric columns pass through. Columns
// named in `targets` are moved into the target map instead of X. Missing
// values anywhere are rejected.
FeatureMatrix encode_dummies(const Table& t, std::size_t top_k,
                             const std::vector<std::string>& targets);

struct SplitRatios {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

// Seeded uniform shuffle partitioned by floor-rounded ratios, remainder
// assigned to train. Deterministic given seed.
SplitIndices split(std::size_t row_count, const SplitRatios& ratios, std::uint64_t seed);

inline SplitIndices split(const FeatureMatrix& fm, const SplitRatios& ratios,
                          std::uint64_t seed) {
  return split(fm.X.rows(), ratios, seed);
}

// Bit i set iff feature i has nonzero variance and |Pearson r(feature_i,
// target)| >= tau. Callers pass the training-row subset.
FeatureMask threshold_filter(const FeatureMatrix& fm, const std::string& target, double tau);

// Audit export: header of feature names then target names, one row per
// sample.
std::string feature_matrix_csv(const FeatureMatrix& fm);

}  // namespace enersave
