#pragma once

// Classifier-with-reject-option rules over posterior vectors, and the
// error/reject accounting used to score them.

#include <cstddef>
#include <optional>

#include "forefront/matrix.hpp"
#include "forefront/posteriors.hpp"

namespace forefront::reject {

// Accept(label) or Reject.
class Decision {
 public:
  static Decision accept(Label label) { return Decision(label); }
  static Decision reject() { return Decision(); }

  bool accepted() const { return label_.has_value(); }
  bool rejected() const { return !label_.has_value(); }
  // Precondition: accepted().
  Label label() const { return *label_; }

  friend bool operator==(const Decision&, const Decision&) = default;

 private:
  Decision() = default;
  explicit Decision(Label label) : label_(label) {}
  std::optional<Label> label_;
};

struct RejectParams {
  double tau = 0.5;  // posterior threshold, [0, 1)
  double d = 0.1;    // reject cost, [0, 1/2]

  void validate() const;
};

struct OutcomeCounts {
  std::size_t n_correct = 0;
  std::size_t n_error = 0;
  std::size_t n_rejected = 0;

  std::size_t total() const { return n_correct + n_error + n_rejected; }
  std::size_t accepted() const { return n_correct + n_error; }
  void add(const Decision& decision, Label truth);
};

// How cost_decide reads its threshold.
enum class CostRule {
  // Accept iff max posterior >= 1 - d.
  kChow,
  // Accept iff max posterior > d. Kept for comparison; it almost never
  // rejects.
  kLiteral,
};

// Class positions follow the posterior vector; ties go to the lowest index.
Label bayes_decide(const Posteriors& p);

// Accept(argmax) iff max(p) > tau.
Decision chow_decide(const Posteriors& p, double tau);

// Throws InvalidArgument when d is outside [0, 1/2].
Decision cost_decide(const Posteriors& p, double d, CostRule rule = CostRule::kChow);

// n_correct / (n_correct + n_error); throws NoCoverage when nothing was
// accepted.
double conditional_accuracy(const OutcomeCounts& c);

// (n_error + d * n_rejected) / total.
double empirical_risk(const OutcomeCounts& c, double d);

// min(f, 1 - f, d) for a binary posterior f.
double pointwise_risk_binary(double f, double d);

}  // namespace forefront::reject
