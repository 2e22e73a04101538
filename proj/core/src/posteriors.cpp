#include "forefront/posteriors.hpp"

#include <algorithm>
#include <cmath>

#include "forefront/error.hpp"

namespace forefront {

void Posteriors::validate() const {
  if (p.empty()) throw InvalidArgument("posteriors are empty");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw InvalidArgument("posterior entries must be >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("posteriors must sum to 1");
}

Posteriors softmax(std::span<const double> scores) {
  if (scores.empty()) throw InvalidArgument("softmax of empty scores");
  const double top = *std::max_element(scores.begin(), scores.end());
  Posteriors out{std::vector<double>(scores.size())};
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out.p[i] = std::exp(scores[i] - top);
    sum += out.p[i];
  }
  for (double& v : out.p) v /= sum;
  return out;
}

std::size_t argmax_lowest(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace forefront
