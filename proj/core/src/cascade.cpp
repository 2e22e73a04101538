#include "forefront/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <string>

#include "forefront/error.hpp"

namespace forefront::cascade {
namespace {

void check_options(const TrainOptions& options) {
  if (options.grid.empty()) throw InvalidArgument("training grid is empty");
  if (options.top_n < 2) throw InvalidArgument("top_n must be >= 2");
  if (options.oof_folds < 2) throw InvalidArgument("oof_folds must be >= 2");
  options.prefix.onset.validate();
}

// Visits stages in order until one accepts or the prefix runs out.
template <typename Features, typename Decide, typename Fallback>
DecisionTrace run_cascade(const StagePlan& plan, std::size_t n_stages, const signal::Series& series,
                          std::size_t onset, FallbackPolicy policy, Features&& features,
                          Decide&& decide, Fallback&& fallback) {
  DecisionTrace trace;
  signal::FeatureVector last;
  for (std::size_t s = 0; s < n_stages; ++s) {
    if (onset + plan.k(s) > series.length()) break;
    last = features(s);
    const reject::Decision d = decide(s, last.values);
    trace.steps.push_back(StageDecision{s, plan.stage_times_s[s], d});
    trace.decided_at_s = plan.stage_times_s[s];
    if (d.accepted()) {
      trace.final_label = d.label();
      return trace;
    }
  }
  if (trace.steps.empty()) {
    throw NoDecision("series of length " + std::to_string(series.length()) + " with onset " +
                     std::to_string(onset) + " cannot reach the first stage (k=" +
                     std::to_string(plan.k(0)) + ")");
  }
  if (policy == FallbackPolicy::kForced) {
    trace.final_label = fallback(trace.steps.back().stage, last.values);
    trace.forced = true;
  }
  return trace;
}

void check_series(const signal::Series& series, std::size_t n_channels) {
  series.validate();
  if (series.n_channels() != n_channels) {
    throw InvalidArgument("series has " + std::to_string(series.n_channels()) +
                          " channels, model expects " + std::to_string(n_channels));
  }
}

}  // namespace

std::size_t StagePlan::k(std::size_t stage) const {
  return static_cast<std::size_t>(std::llround(stage_times_s.at(stage) * effective_rate_hz));
}

void StagePlan::validate() const {
  if (stage_times_s.empty()) throw InvalidArgument("stage plan is empty");
  if (!(effective_rate_hz > 0.0)) throw InvalidArgument("stage plan rate must be positive");
  for (std::size_t s = 0; s < stage_times_s.size(); ++s) {
    if (!(stage_times_s[s] > 0.0)) throw InvalidArgument("stage times must be positive");
    if (s > 0 && !(stage_times_s[s] > stage_times_s[s - 1])) {
      throw InvalidArgument("stage times must be strictly increasing");
    }
    if (k(s) < 1) throw InvalidArgument("stage prefix length rounds to zero samples");
  }
}

StagePlan StagePlan::truncated(std::size_t n_stages) const {
  if (n_stages == 0 || n_stages > size()) throw InvalidArgument("invalid stage truncation");
  StagePlan out = *this;
  out.stage_times_s.resize(n_stages);
  return out;
}

std::size_t resolve_onset(const signal::Series& series, const PrefixConfig& cfg) {
  if (!cfg.detect) return 0;
  return signal::detect_onset(series, cfg.onset).value_or(cfg.onset.baseline_len);
}

TrainedStages train_stages(std::span<const signal::Series> data, const StagePlan& plan,
                           const TrainOptions& options, std::span<const std::uint64_t> sample_ids) {
  plan.validate();
  check_options(options);
  if (data.empty()) throw InvalidArgument("no training series");
  if (!sample_ids.empty() && sample_ids.size() != data.size()) {
    throw InvalidArgument("sample_ids size does not match series count");
  }
  const std::size_t k_last = plan.k(plan.size() - 1);
  std::vector<std::size_t> usable;
  std::vector<std::size_t> onsets;
  TrainedStages out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data[i].label) throw InvalidArgument("training series " + std::to_string(i) + " is unlabeled");
    if (data[i].n_channels() != data.front().n_channels()) {
      throw InvalidArgument("training series have unequal channel counts");
    }
    std::size_t onset = 0;
    try {
      onset = resolve_onset(data[i], options.prefix);
    } catch (const InvalidArgument&) {
      ++out.n_excluded;
      continue;
    }
    if (onset + k_last > data[i].length()) {
      ++out.n_excluded;
      continue;
    }
    usable.push_back(i);
    onsets.push_back(onset);
  }
  if (usable.empty()) {
    throw InvalidArgument("every training series is too short for the final stage");
  }
  std::vector<Label> y;
  std::vector<std::uint64_t> ids;
  for (std::size_t i : usable) {
    y.push_back(*data[i].label);
    ids.push_back(sample_ids.empty() ? i : sample_ids[i]);
  }
  if (std::set<Label>(y.begin(), y.end()).size() < 2) {
    throw InvalidArgument("training data must contain at least two classes");
  }

  for (std::size_t s = 0; s < plan.size(); ++s) {
    Matrix x;
    for (std::size_t u = 0; u < usable.size(); ++u) {
      x.append_row(signal::raw_prefix_features(data[usable[u]], onsets[u], plan.k(s)).values);
    }
    StageTraining st;
    st.stats = signal::fit_norm_stats(x);
    for (std::size_t r = 0; r < x.rows(); ++r) signal::normalize_in_place(x.row(r), st.stats);
    const std::string where = "stage " + std::to_string(s + 1) + " (" +
                              std::to_string(plan.k(s)) + " samples): ";
    try {
      const learners::ClassifierPool pool =
          learners::train_grid(x, y, options.grid, options.oof_folds, ids);
      st.top = ensemble::select_top_n(pool, options.top_n);
      st.diversity = ensemble::diversity_matrix(st.top, y);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(where + e.what());
    } catch (const InvalidState& e) {
      throw InvalidState(where + e.what());
    }
    out.stages.push_back(std::move(st));
  }
  return out;
}

ForefrontModel build_forefront(const TrainedStages& trained, const StagePlan& plan,
                               const TrainOptions& options, std::size_t n_channels,
                               std::vector<std::string> class_names) {
  if (trained.stages.size() != plan.size()) throw InvalidArgument("stage count mismatch");
  ForefrontModel model;
  model.plan = plan;
  model.prefix = options.prefix;
  model.fallback = options.fallback;
  model.n_channels = n_channels;
  model.class_names = std::move(class_names);
  model.n_excluded = trained.n_excluded;
  for (std::size_t s = 0; s < plan.size(); ++s) {
    const auto& st = trained.stages[s];
    ensemble::ClassifierPair pair = ensemble::select_pair(st.diversity, st.top);
    pair.stage = s;
    model.stages.push_back(ForefrontStage{std::move(pair), st.stats});
  }
  return model;
}

CwroModel build_cwro(const TrainedStages& trained, const StagePlan& plan,
                     const TrainOptions& options, std::size_t n_channels, double tau) {
  if (trained.stages.size() != plan.size()) throw InvalidArgument("stage count mismatch");
  reject::RejectParams{tau, 0.0}.validate();
  CwroModel model;
  model.plan = plan;
  model.tau = tau;
  model.prefix = options.prefix;
  model.fallback = options.fallback;
  model.n_channels = n_channels;
  for (const auto& st : trained.stages) {
    if (!std::holds_alternative<learners::SvmModel>(st.top.members.front().model)) {
      throw InvalidArgument("standard CWRO needs an SVM member");
    }
    model.stages.push_back(CwroStage{st.top.members.front(), st.stats});
  }
  return model;
}

ForefrontModel train_forefront(std::span<const signal::Series> data, const StagePlan& plan,
                               const TrainOptions& options, std::vector<std::string> class_names) {
  const TrainedStages trained = train_stages(data, plan, options);
  return build_forefront(trained, plan, options, data.front().n_channels(), std::move(class_names));
}

ForefrontModel ForefrontModel::truncated(std::size_t n_stages) const {
  ForefrontModel out = *this;
  out.plan = plan.truncated(n_stages);
  out.stages.resize(n_stages);
  return out;
}

signal::FeatureVector stage_features(const ForefrontModel& model, const signal::Series& series,
                                     std::size_t stage, std::size_t onset) {
  return signal::extract_prefix_features(series, onset, model.plan.k(stage),
                                         model.stages.at(stage).stats);
}

DecisionTrace classify_stream(const ForefrontModel& model, const signal::Series& series) {
  check_series(series, model.n_channels);
  const std::size_t onset = resolve_onset(series, model.prefix);
  return run_cascade(
      model.plan, model.stages.size(), series, onset, model.fallback,
      [&](std::size_t s) { return stage_features(model, series, s, onset); },
      [&](std::size_t s, std::span<const double> x) {
        return ensemble::agreement_decide(model.stages[s].pair, x);
      },
      [&](std::size_t s, std::span<const double> x) {
        const auto& pair = model.stages[s].pair;
        const auto& stronger =
            pair.second.accuracy > pair.first.accuracy ? pair.second : pair.first;
        return learners::predict(stronger.model, x);
      });
}

DecisionTrace classify_stream(const CwroModel& model, const signal::Series& series) {
  check_series(series, model.n_channels);
  const std::size_t onset = resolve_onset(series, model.prefix);
  const auto posterior_label = [&](std::size_t s, std::span<const double> x) {
    const auto& svm = std::get<learners::SvmModel>(model.stages[s].member.model);
    const Posteriors p = learners::predict_posteriors(svm, x);
    return std::make_pair(p, svm.classes[argmax_lowest(p.p)]);
  };
  return run_cascade(
      model.plan, model.stages.size(), series, onset, model.fallback,
      [&](std::size_t s) {
        return signal::extract_prefix_features(series, onset, model.plan.k(s),
                                               model.stages[s].stats);
      },
      [&](std::size_t s, std::span<const double> x) {
        const auto [p, label] = posterior_label(s, x);
        return reject::chow_decide(p, model.tau).accepted() ? reject::Decision::accept(label)
                                                            : reject::Decision::reject();
      },
      [&](std::size_t s, std::span<const double> x) { return posterior_label(s, x).second; });
}

double cascade_cost(const DecisionTrace& trace, Label truth, double d) {
  std::size_t rejects = 0;
  for (const auto& step : trace.steps) rejects += step.decision.rejected();
  const bool wrong = trace.final_label && *trace.final_label != truth;
  return d * static_cast<double>(rejects) + (wrong ? 1.0 : 0.0);
}

double cascade_cost(const DecisionTrace& trace, Label truth, std::span<const double> d_per_stage) {
  double cost = 0.0;
  for (const auto& step : trace.steps) {
    if (step.decision.rejected()) cost += d_per_stage[step.stage];
  }
  const bool wrong = trace.final_label && *trace.final_label != truth;
  return cost + (wrong ? 1.0 : 0.0);
}

void write_trace_header(std::ostream& out) { out << "sample_id,stage_time_s,decision,label,forced\n"; }

void write_trace_rows(std::ostream& out, std::uint64_t sample_id, const DecisionTrace& trace) {
  char t[32];
  for (const auto& step : trace.steps) {
    std::snprintf(t, sizeof t, "%g", step.time_s);
    out << sample_id << ',' << t << ',';
    if (step.decision.accepted()) {
      out << "ACCEPT," << step.decision.label() << ",0\n";
    } else {
      out << "REJECT,,0\n";
    }
  }
  if (trace.forced) {
    std::snprintf(t, sizeof t, "%g", trace.decided_at_s);
    out << sample_id << ',' << t << ",FORCED," << *trace.final_label << ",1\n";
  }
}

}  // namespace forefront::cascade
