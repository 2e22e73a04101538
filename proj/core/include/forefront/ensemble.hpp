#pragma once

// Agreement-based reject option: double-fault diversity over a classifier
// pool, selection of the most diverse pair, and the two-expert agreement
// decision.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "forefront/learners.hpp"
#include "forefront/reject.hpp"

namespace forefront::ensemble {

// Fraction of samples both prediction vectors get wrong.
double double_fault(std::span<const Label> preds_a, std::span<const Label> preds_b,
                    std::span<const Label> truth);

// The n most accurate members in descending accuracy; ties by lower id.
learners::ClassifierPool select_top_n(const learners::ClassifierPool& pool, std::size_t n);

struct DiversityMatrix {
  std::vector<std::size_t> ids;  // member ids, row/column order
  Matrix df;                     // df(i, i) is member i's out-of-fold error rate

  std::size_t size() const { return ids.size(); }
};

DiversityMatrix diversity_matrix(const learners::ClassifierPool& pool, std::span<const Label> truth);

// Header row and column carry the member ids.
void write_diversity_csv(const DiversityMatrix& m, std::ostream& out);

struct ClassifierPair {
  learners::TrainedClassifier first;   // lower id
  learners::TrainedClassifier second;
  double df = 0.0;
  std::size_t stage = 0;
};

// Off-diagonal entry with the smallest double fault (highest diversity); ties
// by higher mean accuracy, then lexicographically smallest (id, id).
// `m` must be built from `pool` (same member order).
ClassifierPair select_pair(const DiversityMatrix& m, const learners::ClassifierPool& pool);

// Accept(label) iff both members predict label.
reject::Decision agreement_decide(const ClassifierPair& pair, std::span<const double> x);

}  // namespace forefront::ensemble
