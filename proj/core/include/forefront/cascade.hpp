#pragma once

// Staged early classification. Each stage sees a longer post-onset prefix;
// the first stage whose decider accepts fixes the label. Two deciders exist:
// the agreement pair (Forefront) and the single best SVM with a posterior
// threshold (standard CWRO baseline). Both are trained from the same per-stage
// classifier pools.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forefront/ensemble.hpp"
#include "forefront/learners.hpp"
#include "forefront/reject.hpp"
#include "forefront/signal.hpp"

namespace forefront::cascade {

struct StagePlan {
  std::vector<double> stage_times_s{5, 10, 15, 20, 25, 30};
  double effective_rate_hz = 10.0;

  std::size_t size() const { return stage_times_s.size(); }
  // Prefix length of a stage in downsampled samples: round(time * rate).
  std::size_t k(std::size_t stage) const;
  // Strictly increasing positive times, every k >= 1.
  void validate() const;
  StagePlan truncated(std::size_t n_stages) const;
};

enum class FallbackPolicy {
  // Every stage rejected: emit the label of the stronger final-stage
  // classifier, flagged forced.
  kForced,
  kReject,
};

// Onset used for prefixes: the detected rising point; when detection finds
// none, onset.baseline_len. With detect == false the onset is index 0.
struct PrefixConfig {
  signal::OnsetConfig onset;
  bool detect = true;
};

std::size_t resolve_onset(const signal::Series& series, const PrefixConfig& cfg);

struct TrainOptions {
  std::vector<learners::SvmParams> grid = learners::make_grid();
  std::size_t top_n = 5;
  std::size_t oof_folds = 5;
  PrefixConfig prefix;
  FallbackPolicy fallback = FallbackPolicy::kForced;
};

// Per-stage training output shared by both cascade flavours.
struct StageTraining {
  learners::ClassifierPool top;  // the top_n members, descending accuracy
  ensemble::DiversityMatrix diversity;
  signal::NormStats stats;
};

struct TrainedStages {
  std::vector<StageTraining> stages;
  std::size_t n_excluded = 0;  // series too short for the final stage
};

// For each stage: prefix features, normalization stats, train_grid,
// select_top_n and the diversity matrix. `sample_ids` (default: position)
// key the out-of-fold split.
TrainedStages train_stages(std::span<const signal::Series> data, const StagePlan& plan,
                           const TrainOptions& options,
                           std::span<const std::uint64_t> sample_ids = {});

struct ForefrontStage {
  ensemble::ClassifierPair pair;
  signal::NormStats stats;
};

struct ForefrontModel {
  StagePlan plan;
  std::vector<ForefrontStage> stages;
  PrefixConfig prefix;
  FallbackPolicy fallback = FallbackPolicy::kForced;
  std::size_t n_channels = 0;
  std::vector<std::string> class_names;
  std::size_t n_excluded = 0;

  ForefrontModel truncated(std::size_t n_stages) const;
};

struct CwroStage {
  learners::TrainedClassifier member;  // SVM member
  signal::NormStats stats;
};

struct CwroModel {
  StagePlan plan;
  std::vector<CwroStage> stages;
  double tau = 0.5;
  PrefixConfig prefix;
  FallbackPolicy fallback = FallbackPolicy::kForced;
  std::size_t n_channels = 0;
};

ForefrontModel build_forefront(const TrainedStages& trained, const StagePlan& plan,
                               const TrainOptions& options, std::size_t n_channels,
                               std::vector<std::string> class_names);

// Uses the most accurate member of each stage's pool.
CwroModel build_cwro(const TrainedStages& trained, const StagePlan& plan,
                     const TrainOptions& options, std::size_t n_channels, double tau);

ForefrontModel train_forefront(std::span<const signal::Series> data, const StagePlan& plan,
                               const TrainOptions& options,
                               std::vector<std::string> class_names = {});

signal::FeatureVector stage_features(const ForefrontModel& model, const signal::Series& series,
                                     std::size_t stage, std::size_t onset);

struct StageDecision {
  std::size_t stage = 0;
  double time_s = 0.0;
  reject::Decision decision = reject::Decision::reject();
};

struct DecisionTrace {
  std::vector<StageDecision> steps;
  std::optional<Label> final_label;
  // Time of the accepting stage, or of the last stage visited when the
  // decision was forced or rejected.
  double decided_at_s = 0.0;
  bool forced = false;

  bool accepted() const { return !steps.empty() && steps.back().decision.accepted(); }
};

// Throws NoDecision when the series cannot reach the first stage.
DecisionTrace classify_stream(const ForefrontModel& model, const signal::Series& series);
DecisionTrace classify_stream(const CwroModel& model, const signal::Series& series);

// d per rejected stage plus 1 for a wrong final label.
double cascade_cost(const DecisionTrace& trace, Label truth, double d);
// Stage-dependent reject costs; d_per_stage[s] is charged for a reject at s.
double cascade_cost(const DecisionTrace& trace, Label truth, std::span<const double> d_per_stage);

// `sample_id,stage_time_s,decision,label,forced`; decision is ACCEPT, REJECT or
// FORCED (the fallback row).
void write_trace_header(std::ostream& out);
void write_trace_rows(std::ostream& out, std::uint64_t sample_id, const DecisionTrace& trace);

}  // namespace forefront::cascade
