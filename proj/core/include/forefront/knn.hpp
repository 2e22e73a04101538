#pragma once

#include <memory>
#include <span>
#include <vector>

#include "forefront/matrix.hpp"

namespace forefront::learners {

// Euclidean k-nearest-neighbour classifier.
struct KnnModel {
  std::shared_ptr<const Matrix> data;
  std::vector<Label> labels;
  std::size_t k = 1;

  std::size_t dim() const { return data->cols(); }
};

KnnModel train_knn(const Matrix& features, std::span<const Label> labels, std::size_t k_neighbors = 1);

// Majority label among the k nearest points (distance ties by training
// order); vote ties go to the lowest class id.
Label predict_knn(const KnnModel& model, std::span<const double> x);

}  // namespace forefront::learners
