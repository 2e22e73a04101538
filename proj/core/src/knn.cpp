#include "forefront/knn.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "forefront/error.hpp"
#include "forefront/svm.hpp"

namespace forefront::learners {

KnnModel train_knn(const Matrix& features, std::span<const Label> labels, std::size_t k_neighbors) {
  if (features.empty()) throw InvalidArgument("train_knn: empty training set");
  if (features.rows() != labels.size()) {
    throw InvalidArgument("train_knn: feature rows and labels differ in count");
  }
  if (k_neighbors == 0) throw InvalidArgument("train_knn: k must be >= 1");
  return KnnModel{std::make_shared<const Matrix>(features),
                  std::vector<Label>(labels.begin(), labels.end()), k_neighbors};
}

Label predict_knn(const KnnModel& model, std::span<const double> x) {
  if (x.size() != model.dim()) {
    throw InvalidArgument("feature dim " + std::to_string(x.size()) + " does not match model dim " +
                          std::to_string(model.dim()));
  }
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(model.labels.size());
  for (std::size_t i = 0; i < model.labels.size(); ++i) {
    dist.emplace_back(squared_distance(model.data->row(i), x), i);
  }
  const std::size_t k = std::min(model.k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::map<Label, std::size_t> votes;
  for (std::size_t i = 0; i < k; ++i) ++votes[model.labels[dist[i].second]];
  Label best = votes.begin()->first;
  std::size_t best_votes = 0;
  for (const auto& [label, count] : votes) {
    if (count > best_votes) {
      best = label;
      best_votes = count;
    }
  }
  return best;
}

}  // namespace forefront::learners
