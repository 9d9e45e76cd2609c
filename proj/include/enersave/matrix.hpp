#pragma once

#include <cstddef>
#include <vector>

#include "enersave/error.hpp"

namespace enersave {

// Dense row-major matrix of doubles. The one numeric container shared by
// models, selectors and metrics.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const double* row(std::size_t r) const { return data_.data() + r * cols_; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, c);
    return out;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix subset_rows(const Matrix& m, const std::vector<std::size_t>& idx) {
  Matrix out(idx.size(), m.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= m.rows()) throw Error("subset_rows: index out of range");
    for (std::size_t c = 0; c < m.cols(); ++c) out.at(r, c) = m.at(idx[r], c);
  }
  return out;
}

inline Matrix subset_cols(const Matrix& m, const std::vector<std::size_t>& idx) {
  Matrix out(m.rows(), idx.size());
  for (std::size_t c = 0; c < idx.size(); ++c) {
    if (idx[c] >= m.cols()) throw Error("subset_cols: index out of range");
    for (std::size_t r = 0; r < m.rows(); ++r) out.at(r, c) = m.at(r, idx[c]);
  }
  return out;
}

template <typename T>
std::vector<T> subset(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) {
    if (i >= v.size()) throw Error("subset: index out of range");
    out.push_back(v[i]);
  }
  return out;
}

}  // namespace enersave
