#pragma once

// Stratified cross-validation of the agreement cascade against the
// posterior-threshold baseline, with per-stage accuracy/coverage/earliness/
// risk tables and per-location accuracy.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forefront/cascade.hpp"
#include "forefront/signal.hpp"

namespace forefront::eval {

struct FoldPlan {
  std::size_t k_folds = 10;
  std::vector<std::size_t> assignments;  // fold per sample
  std::uint64_t seed = 0;
};

// Each class is shuffled with the seed and dealt round-robin, continuing where
// the previous class stopped, so per-fold class counts are within one of
// proportional. k == 1 is the diagnostic plan: one fold, trained and tested
// on everything. Throws InvalidArgument naming the class when a class has
// fewer than k samples.
FoldPlan stratified_kfold(std::span<const Label> labels, std::size_t k, std::uint64_t seed,
                          std::span<const std::string> class_names = {});

struct MethodSpec {
  enum class Kind { kForefront, kCwro };
  std::string name;
  Kind kind = Kind::kForefront;
  double tau = 0.5;
};

// "forefront", "cwro" at the default tau, then "cwro_tau<t>" for each sweep
// value.
std::vector<MethodSpec> default_methods(double tau, std::span<const double> tau_sweep);

struct EvalConfig {
  cascade::StagePlan plan;
  cascade::TrainOptions train;
  std::vector<MethodSpec> methods = default_methods(0.5, std::vector<double>{0.3, 0.5, 0.7, 0.9});
  double d = 0.1;  // reject cost used for emp_risk
};

struct SampleInfo {
  std::uint64_t id = 0;
  Label truth = 0;
  std::optional<int> location;
  std::size_t fold = 0;
};

struct StageRow {
  std::string method;
  double stage_s = 0.0;
  double cond_accuracy = 0.0;
  double coverage = 0.0;
  double forced_frac = 0.0;
  double mean_earliness_s = 0.0;
  double emp_risk = 0.0;
};

// Full-coverage companion of StageRow: accuracy of the final label (forced
// labels included) and mean earliness over accepted samples only.
struct CoverageRow {
  std::string method;
  double stage_s = 0.0;
  double full_accuracy = 0.0;
  double mean_earliness_accepted_s = 0.0;
};

struct PairInfo {
  std::size_t first_id = 0, second_id = 0;
  double first_accuracy = 0.0, second_accuracy = 0.0;
  double df = 0.0;
};

struct EvalResult {
  cascade::StagePlan plan;
  std::vector<MethodSpec> methods;
  std::size_t k_folds = 0;
  cascade::FallbackPolicy fallback = cascade::FallbackPolicy::kForced;
  double d = 0.1;
  std::vector<SampleInfo> samples;
  // [method][sample]; an empty trace means the series never reached stage 1.
  std::vector<std::vector<cascade::DecisionTrace>> traces;
  // [method][sample][stage]: final label of the cascade truncated after the
  // stage (accepted or fallback), if any.
  std::vector<std::vector<std::vector<std::optional<Label>>>> final_by_stage;
  // [sample][stage]: predictions of the Forefront pair members on the stage
  // prefix, when reached.
  std::vector<std::vector<std::optional<std::pair<Label, Label>>>> pair_predictions;
  // [fold][stage]
  std::vector<std::vector<PairInfo>> pairs;
  std::size_t n_excluded = 0;
  std::vector<StageRow> report;
  std::vector<CoverageRow> coverage;
};

// Per fold: train on the other folds (or everything for k == 1), classify
// the held-out series at each stage, then aggregate as the mean over folds.
// Training errors are rethrown with the fold number.
EvalResult evaluate_methods(std::span<const signal::Series> data, const EvalConfig& config,
                            const FoldPlan& folds);

// Table rows from samples and traces alone. A fold with nothing accepted is
// left out of the cond_accuracy mean (NaN when no fold accepted anything).
std::vector<StageRow> summarize(std::span<const MethodSpec> methods,
                                std::span<const SampleInfo> samples,
                                const std::vector<std::vector<cascade::DecisionTrace>>& traces,
                                const cascade::StagePlan& plan, std::size_t k_folds,
                                cascade::FallbackPolicy fallback, double d);

inline constexpr const char* kReportHeader =
    "method,stage_s,cond_accuracy,coverage,forced_frac,mean_earliness_s,emp_risk";

void write_report_csv(std::ostream& out, std::span<const StageRow> rows);
void write_coverage_csv(std::ostream& out, std::span<const CoverageRow> rows);

// `sample_id,label,location,fold`
void write_samples_csv(std::ostream& out, std::span<const SampleInfo> samples);
std::vector<SampleInfo> read_samples_csv(std::istream& in);
// Inverse of cascade::write_trace_rows; traces are returned in sample order.
std::vector<cascade::DecisionTrace> read_traces_csv(std::istream& in,
                                                    std::span<const SampleInfo> samples,
                                                    const cascade::StagePlan& plan);

struct LocationRow {
  int location = 0;
  double stage_s = 0.0;
  double accuracy = 0.0;
  std::size_t n_samples = 0;
};

struct LocationSurface {
  std::string method;
  std::vector<LocationRow> rows;
  std::vector<std::string> notes;
};

// Full-coverage accuracy per (location, stage). With `fold`, only that fold's
// test samples count, and locations that occur elsewhere in the data but not
// in the fold are omitted with a note. Throws InvalidArgument when a sample
// lacks a location.
LocationSurface location_accuracy_surface(const EvalResult& result, const std::string& method,
                                          std::optional<std::size_t> fold = std::nullopt);

void write_location_csv(std::ostream& out, const LocationSurface& surface);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace forefront::eval
