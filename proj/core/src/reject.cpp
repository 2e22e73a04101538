#include "forefront/reject.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "forefront/error.hpp"

namespace forefront::reject {
namespace {

void check_d(double d) {
  if (!(d >= 0.0 && d <= 0.5)) {
    throw InvalidArgument("reject cost d=" + std::to_string(d) + " outside [0, 1/2]");
  }
}

}  // namespace

void RejectParams::validate() const {
  if (!(tau >= 0.0 && tau < 1.0)) throw InvalidArgument("tau must be in [0, 1)");
  check_d(d);
}

void OutcomeCounts::add(const Decision& decision, Label truth) {
  if (decision.rejected()) {
    ++n_rejected;
  } else if (decision.label() == truth) {
    ++n_correct;
  } else {
    ++n_error;
  }
}

Label bayes_decide(const Posteriors& p) {
  p.validate();
  return static_cast<Label>(argmax_lowest(p.p));
}

Decision chow_decide(const Posteriors& p, double tau) {
  const Label best = bayes_decide(p);
  return p.p[static_cast<std::size_t>(best)] > tau ? Decision::accept(best) : Decision::reject();
}

Decision cost_decide(const Posteriors& p, double d, CostRule rule) {
  check_d(d);
  const Label best = bayes_decide(p);
  const double top = p.p[static_cast<std::size_t>(best)];
  const bool accept = rule == CostRule::kChow ? top >= 1.0 - d : top > d;
  return accept ? Decision::accept(best) : Decision::reject();
}

double conditional_accuracy(const OutcomeCounts& c) {
  if (c.accepted() == 0) throw NoCoverage("no coverage: no sample was accepted");
  return static_cast<double>(c.n_correct) / static_cast<double>(c.accepted());
}

double empirical_risk(const OutcomeCounts& c, double d) {
  if (c.total() == 0) throw InvalidArgument("empirical_risk: no samples");
  return (static_cast<double>(c.n_error) + d * static_cast<double>(c.n_rejected)) /
         static_cast<double>(c.total());
}

double pointwise_risk_binary(double f, double d) {
  if (!(f >= 0.0 && f <= 1.0)) throw InvalidArgument("posterior f must be in [0, 1]");
  check_d(d);
  return std::min({f, 1.0 - f, d});
}

}  // namespace forefront::reject
