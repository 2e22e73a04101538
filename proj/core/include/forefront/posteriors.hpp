#pragma once

#include <span>
#include <vector>

#include "forefront/matrix.hpp"

namespace forefront {

// Per-class probability vector, indexed by class position (ascending ids).
struct Posteriors {
  std::vector<double> p;

  std::size_t size() const { return p.size(); }
  // Non-empty, entries >= 0, sum within 1e-9 of 1.
  void validate() const;
};

Posteriors softmax(std::span<const double> scores);

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax_lowest(std::span<const double> values);

}  // namespace forefront
