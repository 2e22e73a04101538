#pragma once

#include <memory>
#include <span>

#include "forefront/svm.hpp"

namespace forefront::learners::detail {

// Fits a one-vs-one model on the rows `subset` (ascending) of `data`, with
// `gram` the kernel matrix over all rows of `data` for params.gamma.
SvmModel fit_from_gram(std::shared_ptr<const Matrix> data, const Matrix& gram,
                       std::span<const std::size_t> subset, std::span<const Label> labels,
                       const SvmParams& params);

// Kernel values of data row `row` against the model's support vectors, read
// from the Gram matrix the model was trained with.
std::vector<double> gram_row(const SvmModel& model, const Matrix& gram, std::size_t row);

void check_finite(const Matrix& features);

}  // namespace forefront::learners::detail
