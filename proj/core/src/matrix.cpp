#include "forefront/matrix.hpp"

#include "forefront/error.hpp"

namespace forefront {

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) {
    cols_ = values.size();
  } else if (values.size() != cols_) {
    throw InvalidArgument("Matrix::append_row: row has " + std::to_string(values.size()) +
                          " values, expected " + std::to_string(cols_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

}  // namespace forefront
