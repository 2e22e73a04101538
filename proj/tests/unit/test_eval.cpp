#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "forefront/error.hpp"
#include "forefront/eval.hpp"
#include "test_data.hpp"

namespace forefront::eval {
namespace {

std::string trace_text(const cascade::DecisionTrace& t) {
  std::ostringstream out;
  cascade::write_trace_rows(out, 0, t);
  return out.str() + std::to_string(t.decided_at_s);
}

EvalConfig small_config() {
  EvalConfig c;
  c.plan = testing::small_plan();
  c.train = testing::small_options();
  c.methods = default_methods(0.5, std::vector<double>{0.9});
  c.d = 0.1;
  return c;
}

std::vector<Label> labels_of(std::span<const signal::Series> data) {
  std::vector<Label> y;
  for (const auto& s : data) y.push_back(*s.label);
  return y;
}

// Diagnostic k = 1 evaluation: trains on everything, like small_problem().
const EvalResult& diagnostic() {
  static const EvalResult r = [] {
    const auto& p = testing::small_problem();
    return evaluate_methods(p.data, small_config(), stratified_kfold(labels_of(p.data), 1, 0));
  }();
  return r;
}

const EvalResult& three_fold() {
  static const EvalResult r = [] {
    const auto& p = testing::small_problem();
    return evaluate_methods(p.data, small_config(), stratified_kfold(labels_of(p.data), 3, 5));
  }();
  return r;
}

TEST(Folds, OnePerClassPerFold) {
  std::vector<Label> y;
  for (int c = 0; c < 10; ++c)
    for (int i = 0; i < 10; ++i) y.push_back(c);
  const FoldPlan plan = stratified_kfold(y, 10, 3);
  ASSERT_EQ(plan.assignments.size(), 100u);
  std::map<std::pair<std::size_t, Label>, int> count;
  for (std::size_t i = 0; i < 100; ++i) ++count[{plan.assignments[i], y[i]}];
  EXPECT_EQ(count.size(), 100u);
  for (const auto& [key, n] : count) EXPECT_EQ(n, 1);
  EXPECT_EQ(stratified_kfold(y, 10, 3).assignments, plan.assignments);
  EXPECT_NE(stratified_kfold(y, 10, 4).assignments, plan.assignments);
}

TEST(Folds, UnevenClassesStayProportional) {
  std::vector<Label> y;
  for (int i = 0; i < 23; ++i) y.push_back(0);
  for (int i = 0; i < 17; ++i) y.push_back(1);
  const FoldPlan plan = stratified_kfold(y, 4, 1);
  std::vector<int> per_fold(4, 0);
  for (std::size_t f : plan.assignments) ++per_fold[f];
  for (int n : per_fold) EXPECT_TRUE(n == 10);
  for (Label c = 0; c < 2; ++c) {
    std::vector<int> k(4, 0);
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == c) ++k[plan.assignments[i]];
    EXPECT_LE(*std::max_element(k.begin(), k.end()) - *std::min_element(k.begin(), k.end()), 1);
  }
}

TEST(Folds, SmallClassIsNamed) {
  std::vector<Label> y(20, 0);
  for (int i = 0; i < 5; ++i) y.push_back(1);
  const std::vector<std::string> names{"acetone", "benzene"};
  try {
    stratified_kfold(y, 10, 0, names);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("benzene"), std::string::npos) << e.what();
  }
  EXPECT_THROW(stratified_kfold(y, 0, 0), InvalidArgument);
  const FoldPlan one = stratified_kfold(y, 1, 0);
  for (std::size_t f : one.assignments) EXPECT_EQ(f, 0u);
}

TEST(Methods, DefaultNames) {
  const auto m = default_methods(0.5, std::vector<double>{0.3, 0.9});
  ASSERT_EQ(m.size(), 4u);
  EXPECT_EQ(m[0].name, "forefront");
  EXPECT_EQ(m[1].name, "cwro");
  EXPECT_EQ(m[2].name, "cwro_tau0.30");
  EXPECT_EQ(m[3].kind, MethodSpec::Kind::kCwro);
  EXPECT_DOUBLE_EQ(m[3].tau, 0.9);
}

TEST(Evaluate, DerivedTracesMatchClassifyStream) {
  const auto& p = testing::small_problem();
  const EvalResult& r = diagnostic();
  ASSERT_EQ(r.traces.size(), 3u);
  cascade::CwroModel strict = p.cwro;
  strict.tau = 0.9;
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    EXPECT_EQ(trace_text(r.traces[0][i]), trace_text(cascade::classify_stream(p.forefront, p.data[i])));
    EXPECT_EQ(trace_text(r.traces[1][i]), trace_text(cascade::classify_stream(p.cwro, p.data[i])));
    EXPECT_EQ(trace_text(r.traces[2][i]), trace_text(cascade::classify_stream(strict, p.data[i])));
    for (std::size_t s = 0; s < 2; ++s) {
      const auto cut = cascade::classify_stream(p.forefront.truncated(s + 1), p.data[i]);
      EXPECT_EQ(r.final_by_stage[0][i][s], cut.final_label);
    }
  }
}

TEST(Evaluate, DiagnosticBeatsPairOofAccuracy) {
  const EvalResult& r = diagnostic();
  for (std::size_t s = 0; s < 2; ++s) {
    const PairInfo& pair = r.pairs[0][s];
    const StageRow& row = r.report[s];
    ASSERT_EQ(row.method, "forefront");
    EXPECT_GE(row.cond_accuracy, std::max(pair.first_accuracy, pair.second_accuracy));
  }
}

TEST(Evaluate, ReportAlgebra) {
  const EvalResult& r = three_fold();
  const std::size_t n = r.samples.size();
  for (std::size_t m = 0; m < r.methods.size(); ++m) {
    for (std::size_t s = 0; s < r.plan.size(); ++s) {
      const StageRow& row = r.report[m * r.plan.size() + s];
      EXPECT_EQ(row.method, r.methods[m].name);
      double cov = 0, acc = 0, risk = 0;
      std::size_t acc_folds = 0;
      for (std::size_t f = 0; f < r.k_folds; ++f) {
        std::size_t n_f = 0, ok = 0, err = 0, rej = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (r.samples[i].fold != f) continue;
          ++n_f;
          const auto& t = r.traces[m][i];
          if (t.accepted() && t.steps.back().stage <= s)
            (*t.final_label == r.samples[i].truth ? ok : err)++;
          else
            ++rej;
        }
        EXPECT_EQ(ok + err + rej, n_f);
        cov += double(ok + err) / double(n_f);
        risk += (double(err) + 0.1 * double(rej)) / double(n_f);
        if (ok + err) {
          acc += double(ok) / double(ok + err);
          ++acc_folds;
        }
      }
      EXPECT_NEAR(row.coverage, cov / 3, 1e-12);
      EXPECT_NEAR(row.emp_risk, risk / 3, 1e-12);
      if (acc_folds) EXPECT_NEAR(row.cond_accuracy, acc / double(acc_folds), 1e-12);
      EXPECT_GE(row.coverage, 0.0);
      EXPECT_LE(row.coverage + row.forced_frac, 1.0 + 1e-12);
      if (s > 0) EXPECT_GE(row.coverage, r.report[m * r.plan.size() + s - 1].coverage);
    }
  }
}

TEST(Evaluate, AcceptedErrorBound) {
  const EvalResult& r = three_fold();
  for (std::size_t f = 0; f < r.k_folds; ++f) {
    for (std::size_t s = 0; s < r.plan.size(); ++s) {
      std::size_t accepted_wrong = 0, both_wrong = 0;
      for (const auto& smp : r.samples) {
        if (smp.fold != f || !r.pair_predictions[smp.id][s]) continue;
        const auto [a, b] = *r.pair_predictions[smp.id][s];
        accepted_wrong += a == b && a != smp.truth;
        both_wrong += a != smp.truth && b != smp.truth;
      }
      EXPECT_LE(accepted_wrong, both_wrong);
    }
  }
}

TEST(Evaluate, CsvRoundTripReproducesReport) {
  const EvalResult& r = three_fold();
  std::stringstream samples;
  write_samples_csv(samples, r.samples);
  const auto back = read_samples_csv(samples);
  ASSERT_EQ(back.size(), r.samples.size());
  std::vector<std::vector<cascade::DecisionTrace>> traces;
  for (std::size_t m = 0; m < r.methods.size(); ++m) {
    std::stringstream t;
    cascade::write_trace_header(t);
    for (const auto& smp : r.samples) cascade::write_trace_rows(t, smp.id, r.traces[m][smp.id]);
    traces.push_back(read_traces_csv(t, back, r.plan));
    for (std::size_t i = 0; i < back.size(); ++i)
      EXPECT_EQ(trace_text(traces[m][i]), trace_text(r.traces[m][i]));
  }
  const auto rows = summarize(r.methods, back, traces, r.plan, r.k_folds, r.fallback, r.d);
  std::ostringstream a, b;
  write_report_csv(a, r.report);
  write_report_csv(b, rows);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), kReportHeader);
}

TEST(Evaluate, SameInputsSameBytes) {
  const auto& p = testing::small_problem();
  const auto again = evaluate_methods(p.data, small_config(), stratified_kfold(labels_of(p.data), 3, 5));
  std::ostringstream a, b;
  write_report_csv(a, three_fold().report);
  write_report_csv(b, again.report);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Evaluate, TrainingErrorsCarryFold) {
  const auto& p = testing::small_problem();
  EvalConfig c = small_config();
  c.train.top_n = 100;
  try {
    evaluate_methods(p.data, c, stratified_kfold(labels_of(p.data), 3, 5));
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_EQ(std::string(e.what()).rfind("fold 0: stage 1", 0), 0u) << e.what();
  }
}

EvalResult hand_result(std::vector<std::optional<int>> locations, std::vector<std::size_t> folds) {
  EvalResult r;
  r.plan = cascade::StagePlan{{5}, 10.0};
  r.methods = {MethodSpec{"forefront"}};
  r.k_folds = 2;
  r.final_by_stage.resize(1);
  for (std::size_t i = 0; i < locations.size(); ++i) {
    r.samples.push_back(SampleInfo{i, 0, locations[i], folds[i]});
    r.final_by_stage[0].push_back({Label(i % 2 == 0 ? 0 : 1)});
  }
  return r;
}

TEST(Location, SingleLocationSingleRow) {
  const EvalResult r = hand_result({3, 3, 3, 3}, {0, 0, 1, 1});
  const auto s = location_accuracy_surface(r, "forefront");
  ASSERT_EQ(s.rows.size(), 1u);
  EXPECT_EQ(s.rows[0].location, 3);
  EXPECT_DOUBLE_EQ(s.rows[0].accuracy, 0.5);
  EXPECT_EQ(s.rows[0].n_samples, 4u);
  EXPECT_TRUE(s.notes.empty());
}

TEST(Location, AbsentLocationIsNoted) {
  const EvalResult r = hand_result({1, 2, 1, 1}, {0, 1, 1, 0});
  const auto s = location_accuracy_surface(r, "forefront", 0);
  ASSERT_EQ(s.rows.size(), 1u);
  ASSERT_EQ(s.notes.size(), 1u);
  std::ostringstream out;
  write_location_csv(out, s);
  EXPECT_EQ(out.str(),
            "method,location,stage_s,accuracy,n_samples\n"
            "forefront,1,5,0.500000,2\n"
            "# location 2 absent from test fold 0; row omitted\n");
}

TEST(Location, Errors) {
  const EvalResult r = hand_result({1, std::nullopt}, {0, 1});
  EXPECT_THROW(location_accuracy_surface(r, "forefront"), InvalidArgument);
  EXPECT_THROW(location_accuracy_surface(hand_result({1}, {0}), "nope"), InvalidArgument);
}

TEST(Spearman, RanksWithTies) {
  EXPECT_DOUBLE_EQ(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}), -1.0);
  EXPECT_DOUBLE_EQ(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 4, 9, 16}), 1.0);
  // Average ranks (1.5, 1.5, 3) against (1, 2, 3).
  EXPECT_NEAR(spearman(std::vector<double>{5, 5, 7}, std::vector<double>{1, 2, 3}), std::sqrt(0.75), 1e-12);
  EXPECT_THROW(spearman(std::vector<double>{1}, std::vector<double>{1}), InvalidArgument);
}

}  // namespace
}  // namespace forefront::eval
