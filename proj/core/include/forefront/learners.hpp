#pragma once

// Classifier pools: grid-trained SVMs (and optional kNN members) with their
// out-of-fold predictions, the substrate for accuracy filtering and
// double-fault diversity.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "forefront/knn.hpp"
#include "forefront/svm.hpp"

namespace forefront::learners {

using Classifier = std::variant<SvmModel, KnnModel>;

Label predict(const Classifier& model, std::span<const double> x);
std::size_t feature_dim(const Classifier& model);

struct TrainedClassifier {
  Classifier model;
  // Stable id: the grid index for SVM members.
  std::size_t id = 0;
  std::vector<Label> oof_predictions;
  double accuracy = 0.0;
};

std::string describe(const TrainedClassifier& member);

struct ClassifierPool {
  std::vector<TrainedClassifier> members;
  std::vector<SvmParams> grid;
};

// C = 2^c for c in [c_lo, c_hi] (outer), gamma = 2^g for g in [g_lo, g_hi]
// (inner); grid index = ci * n_gamma + gi.
struct GridSpec {
  int c_log2_lo = -5;
  int c_log2_hi = 5;
  int gamma_log2_lo = -5;
  int gamma_log2_hi = 5;
  double tol = 1e-3;
  int max_passes = 10;
};

std::vector<SvmParams> make_grid(const GridSpec& spec = {});

// Stratified fold index per sample, keyed to sample ids: within each class
// samples are ranked by id and dealt round-robin, starting each class where
// the previous one stopped. Throws InvalidArgument naming the class when a
// class has fewer samples than folds.
std::vector<std::size_t> oof_fold_assignment(std::span<const Label> labels,
                                             std::span<const std::uint64_t> sample_ids,
                                             std::size_t folds);

// For every grid point: fit on each out-of-fold training split, record the
// held-out predictions, then refit on all samples. `sample_ids` (default: row
// index) fixes the fold assignment and the training order, so results do not
// depend on the order rows are given in.
ClassifierPool train_grid(const Matrix& features, std::span<const Label> labels,
                          std::span<const SvmParams> grid, std::size_t oof_folds,
                          std::span<const std::uint64_t> sample_ids = {});

TrainedClassifier train_knn_member(const Matrix& features, std::span<const Label> labels,
                                   std::size_t k_neighbors, std::size_t oof_folds, std::size_t id,
                                   std::span<const std::uint64_t> sample_ids = {});

// Fraction of predictions equal to truth.
double accuracy_of(std::span<const Label> predictions, std::span<const Label> truth);

}  // namespace forefront::learners
