#include "forefront/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "forefront/error.hpp"
#include "svm_internal.hpp"

namespace forefront::learners {
namespace {

constexpr double kTau = 1e-12;

}  // namespace

void SvmParams::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw InvalidArgument("SVM C must be positive");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("SVM gamma must be positive");
  if (!(tol > 0.0)) throw InvalidArgument("SVM tol must be positive");
  if (max_passes < 1) throw InvalidArgument("SVM max_passes must be >= 1");
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  return std::exp(-gamma * squared_distance(a, b) / static_cast<double>(a.size()));
}

Matrix squared_distances(const Matrix& x) {
  const std::size_t n = x.rows();
  Matrix d2(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = squared_distance(x.row(i), x.row(j));
      d2(i, j) = v;
      d2(j, i) = v;
    }
  }
  return d2;
}

Matrix rbf_from_distances(const Matrix& d2, double gamma, std::size_t dim) {
  Matrix k(d2.rows(), d2.cols());
  const double scale = -gamma / static_cast<double>(dim);
  for (std::size_t i = 0; i < d2.rows(); ++i) {
    for (std::size_t j = 0; j < d2.cols(); ++j) k(i, j) = std::exp(scale * d2(i, j));
  }
  return k;
}

BinarySolution solve_smo(const Matrix& kernel, std::span<const int> y, double C, double tol,
                         int max_passes) {
  const std::size_t n = y.size();
  if (kernel.rows() != n || kernel.cols() != n) {
    throw InvalidArgument("solve_smo: kernel must be n x n");
  }
  if (!(C > 0.0) || !(tol > 0.0) || max_passes < 1) {
    throw InvalidArgument("solve_smo: C, tol and max_passes must be positive");
  }
  for (int v : y) {
    if (v != 1 && v != -1) throw InvalidArgument("solve_smo: labels must be +1/-1");
  }

  BinarySolution sol;
  auto& alpha = sol.alpha;
  alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);  // Q alpha - e
  const auto in_up = [&](std::size_t t) {
    return (y[t] == 1 && alpha[t] < C) || (y[t] == -1 && alpha[t] > 0.0);
  };
  const auto in_low = [&](std::size_t t) {
    return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < C);
  };
  const auto q = [&](std::size_t i, std::size_t j) {
    return static_cast<double>(y[i] * y[j]) * kernel(i, j);
  };

  const std::size_t max_iter =
      static_cast<std::size_t>(max_passes) * std::max<std::size_t>(100 * n, 1000);
  double gap = 0.0;
  while (true) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(t) && -y[t] * grad[t] > gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t j = n;
    double best_obj = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double yg = y[t] * grad[t];
      gmax2 = std::max(gmax2, yg);
      if (i == n) continue;
      const double b = gmax + yg;
      if (b > 0.0) {
        double a = kernel(i, i) + kernel(t, t) - 2.0 * kernel(i, t);
        if (a <= 0.0) a = kTau;
        const double obj = -(b * b) / a;
        if (obj < best_obj) {
          best_obj = obj;
          j = t;
        }
      }
    }
    gap = (i == n || gmax2 == -std::numeric_limits<double>::infinity()) ? 0.0 : gmax + gmax2;
    if (gap <= tol || j == n) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= max_iter) break;
    ++sol.iterations;

    const double ai_old = alpha[i];
    const double aj_old = alpha[j];
    double quad = kernel(i, i) + kernel(j, j) - 2.0 * kernel(i, j);
    if (quad <= 0.0) quad = kTau;
    if (y[i] != y[j]) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double dai = alpha[i] - ai_old;
    const double daj = alpha[j] - aj_old;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(i, t) * dai + q(j, t) * daj;
  }
  sol.kkt_gap = gap;

  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= C) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  sol.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

  double obj = 0.0;
  for (std::size_t t = 0; t < n; ++t) obj += alpha[t] * (grad[t] - 1.0);
  sol.dual_objective = -obj / 2.0;
  return sol;
}

SvmModel SvmModel::compact() const {
  auto owned = std::make_shared<Matrix>();
  for (std::size_t j = 0; j < support_rows.size(); ++j) owned->append_row(support_vector(j));
  SvmModel out = *this;
  out.data = std::move(owned);
  for (std::size_t j = 0; j < out.support_rows.size(); ++j) {
    out.support_rows[j] = static_cast<std::uint32_t>(j);
  }
  return out;
}

namespace detail {

void check_finite(const Matrix& features) {
  for (double v : features.data()) {
    if (!std::isfinite(v)) throw InvalidArgument("features contain a non-finite value");
  }
}

SvmModel fit_from_gram(std::shared_ptr<const Matrix> data, const Matrix& gram,
                       std::span<const std::size_t> subset, std::span<const Label> labels,
                       const SvmParams& params) {
  SvmModel model;
  model.params = params;
  model.dim = data->cols();
  for (std::size_t r : subset) model.classes.push_back(labels[r]);
  std::sort(model.classes.begin(), model.classes.end());
  model.classes.erase(std::unique(model.classes.begin(), model.classes.end()),
                      model.classes.end());
  if (model.classes.size() < 2) {
    throw InvalidArgument("SVM training needs at least two classes");
  }

  std::map<std::size_t, std::uint32_t> support_index;  // data row -> support position
  std::vector<std::vector<std::size_t>> machine_rows;  // support data rows per machine
  for (std::size_t a = 0; a < model.classes.size(); ++a) {
    for (std::size_t b = a + 1; b < model.classes.size(); ++b) {
      std::vector<std::size_t> rows;
      std::vector<int> y;
      for (std::size_t r : subset) {
        if (labels[r] == model.classes[a]) {
          rows.push_back(r);
          y.push_back(1);
        } else if (labels[r] == model.classes[b]) {
          rows.push_back(r);
          y.push_back(-1);
        }
      }
      Matrix block(rows.size(), rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows.size(); ++j) block(i, j) = gram(rows[i], rows[j]);
      }
      const BinarySolution sol = solve_smo(block, y, params.C, params.tol, params.max_passes);
      BinaryMachine m;
      m.positive = a;
      m.negative = b;
      m.rho = sol.rho;
      std::vector<std::size_t> sv_rows;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (sol.alpha[i] > 0.0) {
          sv_rows.push_back(rows[i]);
          m.coef.push_back(sol.alpha[i] * y[i]);
          support_index.emplace(rows[i], 0);
        }
      }
      machine_rows.push_back(std::move(sv_rows));
      model.machines.push_back(std::move(m));
    }
  }
  std::uint32_t pos = 0;
  for (auto& [row, idx] : support_index) {
    idx = pos++;
    model.support_rows.push_back(static_cast<std::uint32_t>(row));
  }
  for (std::size_t m = 0; m < model.machines.size(); ++m) {
    for (std::size_t r : machine_rows[m]) model.machines[m].support.push_back(support_index.at(r));
  }
  model.data = std::move(data);
  return model;
}

std::vector<double> gram_row(const SvmModel& model, const Matrix& gram, std::size_t row) {
  std::vector<double> k(model.support_rows.size());
  for (std::size_t j = 0; j < k.size(); ++j) k[j] = gram(row, model.support_rows[j]);
  return k;
}

}  // namespace detail

SvmModel train_svm(const Matrix& features, std::span<const Label> labels, const SvmParams& params) {
  params.validate();
  if (features.rows() != labels.size()) {
    throw InvalidArgument("train_svm: feature rows and labels differ in count");
  }
  if (features.empty()) throw InvalidArgument("train_svm: no samples");
  detail::check_finite(features);
  auto data = std::make_shared<const Matrix>(features);
  const Matrix gram = rbf_from_distances(squared_distances(*data), params.gamma, data->cols());
  std::vector<std::size_t> all(features.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return detail::fit_from_gram(data, gram, all, labels, params);
}

std::vector<double> kernel_row(const SvmModel& model, std::span<const double> x) {
  if (x.size() != model.dim) {
    throw InvalidArgument("feature dim " + std::to_string(x.size()) + " does not match model dim " +
                          std::to_string(model.dim));
  }
  std::vector<double> k(model.support_rows.size());
  for (std::size_t j = 0; j < k.size(); ++j) {
    k[j] = rbf_kernel(model.support_vector(j), x, model.params.gamma);
  }
  return k;
}

std::vector<double> decision_values_from_kernel(const SvmModel& model,
                                                std::span<const double> k_sv) {
  std::vector<double> out;
  out.reserve(model.machines.size());
  for (const auto& m : model.machines) {
    double f = 0.0;
    for (std::size_t i = 0; i < m.support.size(); ++i) f += m.coef[i] * k_sv[m.support[i]];
    out.push_back(f - m.rho);
  }
  return out;
}

std::vector<double> decision_values(const SvmModel& model, std::span<const double> x) {
  return decision_values_from_kernel(model, kernel_row(model, x));
}

std::vector<double> class_scores(const SvmModel& model, std::span<const double> decisions) {
  std::vector<double> scores(model.classes.size(), 0.0);
  for (std::size_t m = 0; m < model.machines.size(); ++m) {
    scores[model.machines[m].positive] += decisions[m];
    scores[model.machines[m].negative] -= decisions[m];
  }
  return scores;
}

Label vote(const SvmModel& model, std::span<const double> decisions) {
  std::vector<int> votes(model.classes.size(), 0);
  for (std::size_t m = 0; m < model.machines.size(); ++m) {
    ++votes[decisions[m] >= 0.0 ? model.machines[m].positive : model.machines[m].negative];
  }
  const std::vector<double> scores = class_scores(model, decisions);
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[best] || (votes[c] == votes[best] && scores[c] > scores[best])) best = c;
  }
  return model.classes[best];
}

Label predict(const SvmModel& model, std::span<const double> x) {
  return vote(model, decision_values(model, x));
}

Posteriors predict_posteriors(const SvmModel& model, std::span<const double> x) {
  const std::vector<double> d = decision_values(model, x);
  return softmax(class_scores(model, d));
}

}  // namespace forefront::learners
