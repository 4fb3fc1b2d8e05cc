#include "hgcml/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "hgcml/error.hpp"

namespace hgcml {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw Error(ErrorKind::ShapeMismatch, "matrix data length does not match shape");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw Error(ErrorKind::ShapeMismatch, "ragged rows");
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorKind::ShapeMismatch, "matmul inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

SparseMatrix SparseMatrix::from_entries(std::size_t rows, std::size_t cols, std::vector<Entry> entries) {
  for (const auto& e : entries) {
    if (e.row >= rows || e.col >= cols) throw Error(ErrorKind::ShapeMismatch, "sparse entry out of range");
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m(rows, cols);
  m.col_idx_.reserve(entries.size());
  m.values_.reserve(entries.size());
  std::size_t i = 0;
  while (i < entries.size()) {
    const auto r = entries[i].row;
    const auto c = entries[i].col;
    double v = 0.0;
    while (i < entries.size() && entries[i].row == r && entries[i].col == c) v += entries[i++].value;
    m.col_idx_.push_back(c);
    m.values_.push_back(v);
    ++m.row_ptr_[r + 1];
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

SparseMatrix SparseMatrix::from_dense(const Matrix& dense) {
  std::vector<Entry> entries;
  for (std::size_t r = 0; r < dense.rows(); ++r)
    for (std::size_t c = 0; c < dense.cols(); ++c)
      if (dense(r, c) != 0.0)
        entries.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c), dense(r, c)});
  return from_entries(dense.rows(), dense.cols(), std::move(entries));
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  auto cols = row_cols(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<std::uint32_t>(c));
  if (it == cols.end() || *it != c) return 0.0;
  return values_[row_ptr_[r] + static_cast<std::size_t>(it - cols.begin())];
}

Matrix SparseMatrix::to_dense() const {
  Matrix d(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) d(r, col_idx_[k]) += values_[k];
  return d;
}

SparseMatrix SparseMatrix::transposed() const {
  SparseMatrix t(cols_, rows_);
  t.col_idx_.resize(nnz());
  t.values_.resize(nnz());
  for (auto c : col_idx_) ++t.row_ptr_[c + 1];
  for (std::size_t r = 0; r < cols_; ++r) t.row_ptr_[r + 1] += t.row_ptr_[r];
  std::vector<std::size_t> cursor(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
  // Rows are visited in ascending order, so each transposed row stays sorted.
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const std::size_t dst = cursor[col_idx_[k]]++;
      t.col_idx_[dst] = static_cast<std::uint32_t>(r);
      t.values_[dst] = values_[k];
    }
  }
  return t;
}

bool SparseMatrix::is_valid() const {
  if (row_ptr_.size() != rows_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != nnz()) return false;
  if (values_.size() != col_idx_.size()) return false;
  for (std::size_t r = 0; r < rows_; ++r) {
    if (row_ptr_[r] > row_ptr_[r + 1]) return false;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (col_idx_[k] >= cols_) return false;
      if (k > row_ptr_[r] && col_idx_[k] <= col_idx_[k - 1]) return false;
    }
  }
  return true;
}

Matrix spmm(const SparseMatrix& a, const Matrix& x) {
  if (a.cols() != x.rows()) throw Error(ErrorKind::ShapeMismatch, "spmm inner dimensions differ");
  Matrix out(a.rows(), x.cols());
  const auto& rp = a.row_ptr();
  const auto& ci = a.col_idx();
  const auto& vals = a.values();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto out_row = out.row(r);
    for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) {
      auto x_row = x.row(ci[k]);
      const double v = vals[k];
      for (std::size_t j = 0; j < x.cols(); ++j) out_row[j] += v * x_row[j];
    }
  }
  return out;
}

Matrix spmm_transposed(const SparseMatrix& a, const Matrix& x) {
  if (a.rows() != x.rows()) throw Error(ErrorKind::ShapeMismatch, "spmm_transposed dimensions differ");
  Matrix out(a.cols(), x.cols());
  const auto& rp = a.row_ptr();
  const auto& ci = a.col_idx();
  const auto& vals = a.values();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto x_row = x.row(r);
    for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) {
      auto out_row = out.row(ci[k]);
      const double v = vals[k];
      for (std::size_t j = 0; j < x.cols(); ++j) out_row[j] += v * x_row[j];
    }
  }
  return out;
}

}  // namespace hgcml
