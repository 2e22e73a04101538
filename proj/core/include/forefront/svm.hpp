#pragma once

// RBF-kernel support vector machine trained with sequential minimal
// optimization, one-vs-one for multiclass problems.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "forefront/matrix.hpp"
#include "forefront/posteriors.hpp"

namespace forefront::learners {

struct SvmParams {
  double C = 1.0;
  double gamma = 1.0;
  double tol = 1e-3;
  int max_passes = 10;

  void validate() const;
  friend bool operator==(const SvmParams&, const SvmParams&) = default;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

// exp(-gamma * |a - b|^2 / dim). Dividing by the dimension keeps one gamma
// grid meaningful across prefix lengths.
double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

// Pairwise squared distances between the rows of x.
Matrix squared_distances(const Matrix& x);

// Gram matrix exp(-gamma * d2 / dim) from precomputed squared distances.
Matrix rbf_from_distances(const Matrix& d2, double gamma, std::size_t dim);

// Solution of the binary soft-margin dual
//   min 1/2 a'Qa - sum(a)   s.t.  y'a = 0,  0 <= a <= C,   Q_ij = y_i y_j K_ij.
// Decision function: f(x) = sum_i a_i y_i K(x_i, x) - rho.
struct BinarySolution {
  std::vector<double> alpha;
  double rho = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  // Maximal KKT violation m(a) - M(a) at exit.
  double kkt_gap = 0.0;
  // sum(a) - 1/2 a'Qa.
  double dual_objective = 0.0;
};

// Working pairs are chosen by maximal violation with second-order selection
// of the partner; ties go to the lowest index. Stops once the violation is at
// most tol or after max_passes * max(100 n, 1000) updates.
BinarySolution solve_smo(const Matrix& kernel, std::span<const int> y, double C, double tol,
                         int max_passes);

// One binary machine of a one-vs-one model. `positive` and `negative` index
// SvmModel::classes; `support` indexes the model's support list.
struct BinaryMachine {
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::vector<std::uint32_t> support;
  std::vector<double> coef;  // alpha_i * y_i, |coef| <= C
  double rho = 0.0;
};

struct SvmModel {
  std::vector<Label> classes;  // ascending
  SvmParams params;
  std::size_t dim = 0;
  // Support vectors are rows data->row(support_rows[j]); models trained on
  // the same matrix share it.
  std::shared_ptr<const Matrix> data;
  std::vector<std::uint32_t> support_rows;
  // Ordered by (positive, negative) with positive < negative.
  std::vector<BinaryMachine> machines;

  std::size_t n_support() const { return support_rows.size(); }
  std::span<const double> support_vector(std::size_t j) const {
    return data->row(support_rows[j]);
  }

  // Copy that owns a matrix holding only its support vectors.
  SvmModel compact() const;
};

SvmModel train_svm(const Matrix& features, std::span<const Label> labels, const SvmParams& params);

// K(x, sv_j) for every support vector.
std::vector<double> kernel_row(const SvmModel& model, std::span<const double> x);

// Decision value of each machine given kernel_row values.
std::vector<double> decision_values_from_kernel(const SvmModel& model,
                                                std::span<const double> k_sv);
std::vector<double> decision_values(const SvmModel& model, std::span<const double> x);

// Per class: sum of signed decision values over that class's machines.
std::vector<double> class_scores(const SvmModel& model, std::span<const double> decisions);

// One-vs-one vote (f >= 0 votes for the lower class); ties broken by class
// score, then lowest class id.
Label vote(const SvmModel& model, std::span<const double> decisions);

Label predict(const SvmModel& model, std::span<const double> x);

// softmax(class_scores); argmax follows the score winner.
Posteriors predict_posteriors(const SvmModel& model, std::span<const double> x);

}  // namespace forefront::learners
