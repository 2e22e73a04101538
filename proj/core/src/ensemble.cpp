#include "forefront/ensemble.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <string>
#include <tuple>

#include "forefront/error.hpp"

namespace forefront::ensemble {

double double_fault(std::span<const Label> preds_a, std::span<const Label> preds_b,
                    std::span<const Label> truth) {
  if (preds_a.size() != truth.size() || preds_b.size() != truth.size()) {
    throw InvalidArgument("double_fault: prediction and truth lengths differ");
  }
  if (truth.empty()) throw InvalidArgument("double_fault: no samples");
  std::size_t both = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    both += preds_a[i] != truth[i] && preds_b[i] != truth[i];
  }
  return static_cast<double>(both) / static_cast<double>(truth.size());
}

learners::ClassifierPool select_top_n(const learners::ClassifierPool& pool, std::size_t n) {
  if (n < 2) throw InvalidArgument("select_top_n: n must be >= 2");
  if (pool.members.size() < n) {
    throw InvalidArgument("select_top_n: pool has " + std::to_string(pool.members.size()) +
                          " members, fewer than n=" + std::to_string(n));
  }
  std::vector<std::size_t> order(pool.members.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ma = pool.members[a];
    const auto& mb = pool.members[b];
    if (ma.accuracy != mb.accuracy) return ma.accuracy > mb.accuracy;
    return ma.id < mb.id;
  });
  learners::ClassifierPool out;
  out.grid = pool.grid;
  for (std::size_t i = 0; i < n; ++i) out.members.push_back(pool.members[order[i]]);
  return out;
}

DiversityMatrix diversity_matrix(const learners::ClassifierPool& pool, std::span<const Label> truth) {
  const std::size_t n = pool.members.size();
  for (const auto& m : pool.members) {
    if (m.oof_predictions.size() != truth.size()) {
      throw InvalidState("diversity_matrix: member " + std::to_string(m.id) +
                         " lacks out-of-fold predictions for the sample set");
    }
  }
  DiversityMatrix out;
  out.df = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    out.ids.push_back(pool.members[i].id);
    out.df(i, i) = 1.0 - pool.members[i].accuracy;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Clamped so DF(i, j) <= min(err_i, err_j) survives rounding of the
      // diagonal; the clamp moves a value by at most one ulp.
      const double v = std::min({double_fault(pool.members[i].oof_predictions,
                                              pool.members[j].oof_predictions, truth),
                                 out.df(i, i), out.df(j, j)});
      out.df(i, j) = v;
      out.df(j, i) = v;
    }
  }
  return out;
}

void write_diversity_csv(const DiversityMatrix& m, std::ostream& out) {
  out << "id";
  for (std::size_t id : m.ids) out << ',' << id;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << m.ids[i];
    for (std::size_t j = 0; j < m.size(); ++j) {
      std::snprintf(buf, sizeof buf, ",%.6f", m.df(i, j));
      out << buf;
    }
    out << '\n';
  }
}

ClassifierPair select_pair(const DiversityMatrix& m, const learners::ClassifierPool& pool) {
  const std::size_t n = m.size();
  if (n < 2) throw InvalidArgument("select_pair: needs at least two classifiers");
  if (pool.members.size() != n) throw InvalidArgument("select_pair: matrix and pool sizes differ");
  std::size_t bi = 0, bj = 0;
  bool found = false;
  // Key compared lexicographically: df ascending, mean accuracy descending,
  // then (low id, high id) ascending.
  auto key = [&](std::size_t i, std::size_t j) {
    const auto lo = std::min(m.ids[i], m.ids[j]);
    const auto hi = std::max(m.ids[i], m.ids[j]);
    const double mean_acc = (pool.members[i].accuracy + pool.members[j].accuracy) / 2.0;
    return std::make_tuple(m.df(i, j), -mean_acc, lo, hi);
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!found || key(i, j) < key(bi, bj)) {
        bi = i;
        bj = j;
        found = true;
      }
    }
  }
  if (m.ids[bj] < m.ids[bi]) std::swap(bi, bj);
  return ClassifierPair{pool.members[bi], pool.members[bj], m.df(bi, bj), 0};
}

reject::Decision agreement_decide(const ClassifierPair& pair, std::span<const double> x) {
  const Label a = learners::predict(pair.first.model, x);
  const Label b = learners::predict(pair.second.model, x);
  return a == b ? reject::Decision::accept(a) : reject::Decision::reject();
}

}  // namespace forefront::ensemble
