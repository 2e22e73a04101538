#include "forefront/learners.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <string>

#include "forefront/error.hpp"
#include "parallel.hpp"
#include "svm_internal.hpp"

namespace forefront::learners {
namespace {

std::vector<std::uint64_t> ids_or_index(std::span<const std::uint64_t> ids, std::size_t n) {
  if (ids.empty()) {
    std::vector<std::uint64_t> out(n);
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  if (ids.size() != n) throw InvalidArgument("sample_ids size does not match sample count");
  return {ids.begin(), ids.end()};
}

// Row order sorted by sample id; ids must be unique.
std::vector<std::size_t> order_by_id(std::span<const std::uint64_t> ids) {
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (ids[order[i]] == ids[order[i - 1]]) throw InvalidArgument("sample ids must be unique");
  }
  return order;
}

void check_inputs(const Matrix& features, std::span<const Label> labels, std::size_t oof_folds) {
  if (features.rows() != labels.size()) {
    throw InvalidArgument("feature rows and labels differ in count");
  }
  if (features.empty()) throw InvalidArgument("no training samples");
  if (oof_folds < 2) throw InvalidArgument("oof_folds must be >= 2");
  detail::check_finite(features);
}

}  // namespace

Label predict(const Classifier& model, std::span<const double> x) {
  return std::visit(
      [&](const auto& m) -> Label {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, SvmModel>) {
          return predict(m, x);
        } else {
          return predict_knn(m, x);
        }
      },
      model);
}

std::size_t feature_dim(const Classifier& model) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, SvmModel>) {
          return m.dim;
        } else {
          return m.dim();
        }
      },
      model);
}

std::string describe(const TrainedClassifier& member) {
  char buf[128];
  if (const auto* svm = std::get_if<SvmModel>(&member.model)) {
    std::snprintf(buf, sizeof buf, "#%zu(C=2^%g,gamma=2^%g)", member.id, std::log2(svm->params.C),
                  std::log2(svm->params.gamma));
  } else {
    std::snprintf(buf, sizeof buf, "#%zu(knn k=%zu)", member.id,
                  std::get<KnnModel>(member.model).k);
  }
  return buf;
}

std::vector<SvmParams> make_grid(const GridSpec& spec) {
  if (spec.c_log2_hi < spec.c_log2_lo || spec.gamma_log2_hi < spec.gamma_log2_lo) {
    throw InvalidArgument("grid bounds are inverted");
  }
  std::vector<SvmParams> grid;
  for (int c = spec.c_log2_lo; c <= spec.c_log2_hi; ++c) {
    for (int g = spec.gamma_log2_lo; g <= spec.gamma_log2_hi; ++g) {
      grid.push_back(SvmParams{std::ldexp(1.0, c), std::ldexp(1.0, g), spec.tol, spec.max_passes});
    }
  }
  return grid;
}

std::vector<std::size_t> oof_fold_assignment(std::span<const Label> labels,
                                             std::span<const std::uint64_t> sample_ids,
                                             std::size_t folds) {
  if (folds < 1) throw InvalidArgument("folds must be >= 1");
  const std::vector<std::uint64_t> ids = ids_or_index(sample_ids, labels.size());
  std::map<Label, std::vector<std::size_t>> by_class;
  for (std::size_t i : order_by_id(ids)) by_class[labels[i]].push_back(i);
  std::vector<std::size_t> fold(labels.size(), 0);
  std::size_t offset = 0;
  for (const auto& [label, members] : by_class) {
    if (members.size() < folds) {
      throw InvalidArgument("class " + std::to_string(label) + " has " +
                            std::to_string(members.size()) + " samples, fewer than " +
                            std::to_string(folds) + " folds");
    }
    for (std::size_t r = 0; r < members.size(); ++r) fold[members[r]] = (offset + r) % folds;
    offset = (offset + members.size()) % folds;
  }
  return fold;
}

double accuracy_of(std::span<const Label> predictions, std::span<const Label> truth) {
  if (predictions.size() != truth.size() || truth.empty()) {
    throw InvalidArgument("accuracy_of: length mismatch or empty input");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predictions[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

ClassifierPool train_grid(const Matrix& features, std::span<const Label> labels,
                          std::span<const SvmParams> grid, std::size_t oof_folds,
                          std::span<const std::uint64_t> sample_ids) {
  if (grid.empty()) throw InvalidArgument("train_grid: empty grid");
  for (const auto& p : grid) p.validate();
  check_inputs(features, labels, oof_folds);
  const std::vector<std::uint64_t> ids = ids_or_index(sample_ids, labels.size());
  const std::vector<std::size_t> order = order_by_id(ids);
  const std::size_t n = order.size();
  const std::vector<std::size_t> fold_of_caller = oof_fold_assignment(labels, ids, oof_folds);

  // Everything below works in id order.
  auto data = std::make_shared<Matrix>();
  std::vector<Label> y(n);
  std::vector<std::size_t> fold(n);
  for (std::size_t i = 0; i < n; ++i) {
    data->append_row(features.row(order[i]));
    y[i] = labels[order[i]];
    fold[i] = fold_of_caller[order[i]];
  }
  const std::shared_ptr<const Matrix> shared = data;
  const Matrix d2 = squared_distances(*shared);

  std::vector<double> gammas;
  for (const auto& p : grid) gammas.push_back(p.gamma);
  std::sort(gammas.begin(), gammas.end());
  gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());
  std::vector<Matrix> grams(gammas.size());
  forefront::detail::parallel_for(gammas.size(), [&](std::size_t g) {
    grams[g] = rbf_from_distances(d2, gammas[g], shared->cols());
  });

  std::vector<std::vector<std::size_t>> train_rows(oof_folds), test_rows(oof_folds);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < oof_folds; ++f) (fold[i] == f ? test_rows : train_rows)[f].push_back(i);
  }
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);

  ClassifierPool pool;
  pool.grid.assign(grid.begin(), grid.end());
  pool.members.resize(grid.size());
  forefront::detail::parallel_for(grid.size(), [&](std::size_t p) {
    const SvmParams& params = grid[p];
    const auto g = static_cast<std::size_t>(
        std::lower_bound(gammas.begin(), gammas.end(), params.gamma) - gammas.begin());
    const Matrix& gram = grams[g];
    std::vector<Label> oof_sorted(n);
    for (std::size_t f = 0; f < oof_folds; ++f) {
      const SvmModel m = detail::fit_from_gram(shared, gram, train_rows[f], y, params);
      for (std::size_t h : test_rows[f]) {
        oof_sorted[h] = vote(m, decision_values_from_kernel(m, detail::gram_row(m, gram, h)));
      }
    }
    TrainedClassifier& member = pool.members[p];
    member.id = p;
    member.model = detail::fit_from_gram(shared, gram, all, y, params);
    member.oof_predictions.resize(n);
    for (std::size_t i = 0; i < n; ++i) member.oof_predictions[order[i]] = oof_sorted[i];
    member.accuracy = accuracy_of(member.oof_predictions, labels);
  });
  return pool;
}

TrainedClassifier train_knn_member(const Matrix& features, std::span<const Label> labels,
                                   std::size_t k_neighbors, std::size_t oof_folds, std::size_t id,
                                   std::span<const std::uint64_t> sample_ids) {
  check_inputs(features, labels, oof_folds);
  const std::vector<std::size_t> fold = oof_fold_assignment(labels, sample_ids, oof_folds);
  TrainedClassifier member;
  member.id = id;
  member.oof_predictions.resize(labels.size());
  for (std::size_t f = 0; f < oof_folds; ++f) {
    Matrix x;
    std::vector<Label> y;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (fold[i] != f) {
        x.append_row(features.row(i));
        y.push_back(labels[i]);
      }
    }
    const KnnModel m = train_knn(x, y, k_neighbors);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (fold[i] == f) member.oof_predictions[i] = predict_knn(m, features.row(i));
    }
  }
  member.model = train_knn(features, labels, k_neighbors);
  member.accuracy = accuracy_of(member.oof_predictions, labels);
  return member;
}

}  // namespace forefront::learners
