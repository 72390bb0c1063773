#include "burstcast/models/matrix.hpp"

#include "burstcast/error.hpp"

namespace burstcast {

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) fail(ErrorKind::ArityMismatch, "row width differs from matrix width");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

Matrix Matrix::slice_rows(std::size_t begin, std::size_t end) const {
  Matrix m;
  m.cols_ = cols_;
  m.rows_ = end - begin;
  m.data_.assign(data_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
                 data_.begin() + static_cast<std::ptrdiff_t>(end * cols_));
  return m;
}

}  // namespace burstcast
