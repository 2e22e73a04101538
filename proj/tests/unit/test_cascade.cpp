#include <gtest/gtest.h>

#include <sstream>

#include "forefront/cascade.hpp"
#include "forefront/error.hpp"
#include "test_data.hpp"

namespace forefront::cascade {
namespace {

using reject::Decision;

learners::TrainedClassifier constant_member(Label label, double accuracy, std::size_t dim) {
  learners::TrainedClassifier t;
  t.model = learners::train_knn(Matrix(1, dim, 0.0), std::vector<Label>{label});
  t.accuracy = accuracy;
  return t;
}

// One channel, onset 0, identity normalization; stage s pair predicts
// (a[s], b[s]) regardless of input.
ForefrontModel scripted_model(const std::vector<Label>& a, const std::vector<Label>& b,
                              FallbackPolicy fallback = FallbackPolicy::kForced) {
  ForefrontModel m;
  m.plan = StagePlan{};
  m.plan.stage_times_s.resize(a.size());
  m.prefix.detect = false;
  m.fallback = fallback;
  m.n_channels = 1;
  for (std::size_t s = 0; s < a.size(); ++s) {
    const std::size_t k = m.plan.k(s);
    ForefrontStage st;
    st.pair.first = constant_member(a[s], 0.8, k);
    st.pair.second = constant_member(b[s], 0.9, k);
    st.pair.stage = s;
    st.stats.mean.assign(k, 0.0);
    st.stats.std.assign(k, 1.0);
    m.stages.push_back(std::move(st));
  }
  return m;
}

signal::Series ramp(std::size_t n) {
  signal::Series s;
  s.channels.assign(1, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) s.channels[0][i] = 0.01 * static_cast<double>(i);
  s.sample_rate_hz = 100.0;
  s.effective_rate_hz = 10.0;
  return s;
}

void expect_well_formed(const DecisionTrace& t, const StagePlan& plan) {
  ASSERT_FALSE(t.steps.empty());
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    EXPECT_EQ(t.steps[i].stage, i);
    EXPECT_EQ(t.steps[i].time_s, plan.stage_times_s[i]);
    if (i + 1 < t.steps.size()) EXPECT_TRUE(t.steps[i].decision.rejected());
  }
  EXPECT_EQ(t.decided_at_s, t.steps.back().time_s);
  if (t.accepted()) {
    EXPECT_FALSE(t.forced);
    EXPECT_EQ(t.final_label, t.steps.back().decision.label());
  }
}

TEST(StagePlan, DefaultsAndValidation) {
  const StagePlan p;
  ASSERT_EQ(p.size(), 6u);
  for (std::size_t s = 0; s < 6; ++s) EXPECT_EQ(p.k(s), 50 * (s + 1));
  EXPECT_NO_THROW(p.validate());
  EXPECT_THROW((StagePlan{{5, 5}, 10.0}.validate()), InvalidArgument);
  EXPECT_THROW((StagePlan{{}, 10.0}.validate()), InvalidArgument);
  EXPECT_THROW((StagePlan{{0.01}, 10.0}.validate()), InvalidArgument);
  EXPECT_THROW((StagePlan{{5}, 0.0}.validate()), InvalidArgument);
  EXPECT_EQ(p.truncated(2).stage_times_s, (std::vector<double>{5, 10}));
  EXPECT_THROW(p.truncated(7), InvalidArgument);
}

TEST(ClassifyStream, AgreementAtFirstStage) {
  const auto m = scripted_model({2, 1, 1, 1, 1, 1}, {2, 0, 0, 0, 0, 0});
  const auto t = classify_stream(m, ramp(400));
  expect_well_formed(t, m.plan);
  EXPECT_EQ(t.steps.size(), 1u);
  EXPECT_EQ(t.final_label, 2);
  EXPECT_EQ(t.decided_at_s, 5.0);
  EXPECT_FALSE(t.forced);
}

TEST(ClassifyStream, AgreementAtLastStage) {
  const auto m = scripted_model({0, 0, 0, 0, 0, 3}, {1, 1, 1, 1, 1, 3});
  const auto t = classify_stream(m, ramp(400));
  expect_well_formed(t, m.plan);
  EXPECT_EQ(t.steps.size(), 6u);
  EXPECT_EQ(t.final_label, 3);
  EXPECT_EQ(t.decided_at_s, 30.0);
}

TEST(ClassifyStream, ForcedFallbackUsesStrongerFinalMember) {
  const auto m = scripted_model({0, 0, 0, 0, 0, 4}, {1, 1, 1, 1, 1, 5});
  const auto t = classify_stream(m, ramp(400));
  expect_well_formed(t, m.plan);
  EXPECT_FALSE(t.accepted());
  EXPECT_TRUE(t.forced);
  EXPECT_EQ(t.final_label, 5);  // second member has accuracy 0.9
  EXPECT_EQ(t.decided_at_s, 30.0);

  const auto r = classify_stream(scripted_model({0, 0, 0, 0, 0, 4}, {1, 1, 1, 1, 1, 5},
                                                FallbackPolicy::kReject),
                                 ramp(400));
  EXPECT_FALSE(r.forced);
  EXPECT_FALSE(r.final_label.has_value());
}

TEST(ClassifyStream, ShortSeriesStopsEarlyOrFails) {
  const auto m = scripted_model({0, 0, 0, 0, 0, 0}, {1, 1, 1, 1, 1, 1});
  const auto t = classify_stream(m, ramp(120));
  EXPECT_EQ(t.steps.size(), 2u);
  EXPECT_TRUE(t.forced);
  EXPECT_EQ(t.decided_at_s, 10.0);
  EXPECT_THROW(classify_stream(m, ramp(49)), NoDecision);
  signal::Series two = ramp(400);
  two.channels.push_back(two.channels[0]);
  EXPECT_THROW(classify_stream(m, two), InvalidArgument);
}

TEST(CascadeCost, Examples) {
  DecisionTrace t;
  t.steps = {{0, 5, Decision::accept(1)}};
  t.final_label = 1;
  EXPECT_DOUBLE_EQ(cascade_cost(t, 1, 0.1), 0.0);

  t.steps = {{0, 5, Decision::reject()}, {1, 10, Decision::reject()}, {2, 15, Decision::reject()},
             {3, 20, Decision::accept(1)}};
  EXPECT_NEAR(cascade_cost(t, 1, 0.1), 0.3, 1e-15);

  t.steps.clear();
  for (std::size_t s = 0; s < 6; ++s) t.steps.push_back({s, 5.0 * (s + 1), Decision::reject()});
  t.final_label = 2;
  t.forced = true;
  EXPECT_NEAR(cascade_cost(t, 1, 0.1), 1.6, 1e-15);
  const std::vector<double> per_stage{0.0, 0.0, 0.0, 0.0, 0.0, 0.5};
  EXPECT_DOUBLE_EQ(cascade_cost(t, 2, per_stage), 0.5);
}

TEST(TraceCsv, Rows) {
  DecisionTrace t;
  t.steps = {{0, 5, Decision::reject()}, {1, 10, Decision::reject()}};
  t.final_label = 3;
  t.forced = true;
  t.decided_at_s = 10;
  std::ostringstream out;
  write_trace_header(out);
  write_trace_rows(out, 42, t);
  EXPECT_EQ(out.str(),
            "sample_id,stage_time_s,decision,label,forced\n"
            "42,5,REJECT,,0\n42,10,REJECT,,0\n42,10,FORCED,3,1\n");
}

TEST(Trained, OnePairPerStageWithMatchingDims) {
  const auto& p = testing::small_problem();
  ASSERT_EQ(p.forefront.stages.size(), 2u);
  ASSERT_EQ(p.cwro.stages.size(), 2u);
  EXPECT_EQ(p.trained.n_excluded, 0u);
  for (std::size_t s = 0; s < 2; ++s) {
    const auto& st = p.forefront.stages[s];
    EXPECT_EQ(st.stats.dim(), 2 * p.forefront.plan.k(s));
    EXPECT_EQ(learners::feature_dim(st.pair.first.model), st.stats.dim());
    EXPECT_LT(st.pair.first.id, st.pair.second.id);
    EXPECT_EQ(st.pair.stage, s);
    EXPECT_EQ(p.cwro.stages[s].member.id, p.trained.stages[s].top.members.front().id);
  }
}

TEST(Trained, TracesWellFormedAndPrefixConsistent) {
  const auto& p = testing::small_problem();
  for (const auto& series : p.data) {
    const auto t = classify_stream(p.forefront, series);
    expect_well_formed(t, p.forefront.plan);
    EXPECT_TRUE(t.final_label.has_value());
    const std::size_t onset = resolve_onset(series, p.forefront.prefix);
    for (const auto& step : t.steps) {
      const auto& st = p.forefront.stages[step.stage];
      const auto x = signal::extract_prefix_features(series, onset, p.forefront.plan.k(step.stage),
                                                     st.stats);
      EXPECT_EQ(x.values, stage_features(p.forefront, series, step.stage, onset).values);
      EXPECT_EQ(step.decision, ensemble::agreement_decide(st.pair, x.values));
    }
    const auto again = classify_stream(p.forefront, series);
    EXPECT_EQ(again.steps.size(), t.steps.size());
    EXPECT_EQ(again.final_label, t.final_label);

    const auto c = classify_stream(p.cwro, series);
    expect_well_formed(c, p.cwro.plan);
  }
}

TEST(Trained, TruncationNeverMakesDecisionsEarlier) {
  const auto& p = testing::small_problem();
  const ForefrontModel one = p.forefront.truncated(1);
  for (const auto& series : p.data) {
    const auto full = classify_stream(p.forefront, series);
    const auto cut = classify_stream(one, series);
    if (cut.accepted()) {
      ASSERT_TRUE(full.accepted());
      EXPECT_EQ(full.decided_at_s, cut.decided_at_s);
      EXPECT_EQ(full.final_label, cut.final_label);
    }
    if (!full.accepted()) EXPECT_FALSE(cut.accepted());
    if (full.accepted()) EXPECT_GE(full.decided_at_s, cut.decided_at_s);
  }
}

TEST(Trained, SingleStagePlanIsOneAgreementClassifier) {
  const auto& p = testing::small_problem();
  const StagePlan plan = testing::small_plan().truncated(1);
  const auto m = train_forefront(p.data, plan, testing::small_options());
  ASSERT_EQ(m.stages.size(), 1u);
  for (const auto& series : p.data) EXPECT_EQ(classify_stream(m, series).steps.size(), 1u);
}

TEST(Trained, NoiselessStagesArePerfect) {
  datagen::GenConfig g = testing::small_gen(0.0, 0.0);
  g.n_channels = 8;
  const auto data = datagen::generate_downsampled(g, 10);
  const auto trained = train_stages(data, testing::small_plan(), testing::small_options());
  const auto m = build_forefront(trained, testing::small_plan(), testing::small_options(), 8, {});
  for (const auto& st : m.stages) {
    EXPECT_EQ(st.pair.first.accuracy, 1.0);
    EXPECT_EQ(st.pair.second.accuracy, 1.0);
    EXPECT_EQ(st.pair.df, 0.0);
  }
}

TEST(Training, Errors) {
  const auto& p = testing::small_problem();
  auto opts = testing::small_options();
  std::vector<signal::Series> one_class;
  for (const auto& s : p.data)
    if (s.label == 0) one_class.push_back(s);
  EXPECT_THROW(train_stages(one_class, testing::small_plan(), opts), InvalidArgument);

  std::vector<signal::Series> short_only(p.data.begin(), p.data.begin() + 2);
  for (auto& s : short_only)
    for (auto& ch : s.channels) ch.resize(40);
  EXPECT_THROW(train_stages(short_only, testing::small_plan(), opts), InvalidArgument);

  std::vector<signal::Series> with_short = p.data;
  for (auto& ch : with_short[0].channels) ch.resize(40);
  EXPECT_EQ(train_stages(with_short, testing::small_plan(), opts).n_excluded, 1u);

  opts.top_n = 1;
  EXPECT_THROW(train_stages(p.data, testing::small_plan(), opts), InvalidArgument);
  opts = testing::small_options();
  opts.top_n = 50;
  try {
    train_stages(p.data, testing::small_plan(), opts);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("stage 1"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace forefront::cascade
