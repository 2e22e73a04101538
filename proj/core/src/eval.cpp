#include "forefront/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "forefront/error.hpp"
#include "random.hpp"

namespace forefront::eval {
namespace {

std::string fmt(double v, const char* spec = "%.6f") {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

// What each model says about one sample at one stage.
struct StageOutput {
  Label first = 0, second = 0;  // Forefront pair members
  double cwro_top = 0.0;        // max posterior of the best SVM
  Label cwro_label = 0;
};

// Mirrors cascade::classify_stream on precomputed stage outputs.
template <typename Decide, typename Fallback>
cascade::DecisionTrace derive_trace(const cascade::StagePlan& plan,
                                    std::span<const StageOutput> outputs, std::size_t n_stages,
                                    cascade::FallbackPolicy policy, Decide&& decide,
                                    Fallback&& fallback) {
  cascade::DecisionTrace trace;
  const std::size_t reach = std::min(n_stages, outputs.size());
  for (std::size_t s = 0; s < reach; ++s) {
    const reject::Decision d = decide(outputs[s]);
    trace.steps.push_back(cascade::StageDecision{s, plan.stage_times_s[s], d});
    trace.decided_at_s = plan.stage_times_s[s];
    if (d.accepted()) {
      trace.final_label = d.label();
      return trace;
    }
  }
  if (!trace.steps.empty() && policy == cascade::FallbackPolicy::kForced) {
    trace.final_label = fallback(outputs[trace.steps.back().stage]);
    trace.forced = true;
  }
  return trace;
}

template <typename E>
[[noreturn]] void rethrow_with_fold(const E& e, std::size_t fold) {
  throw E("fold " + std::to_string(fold) + ": " + e.what());
}

}  // namespace

FoldPlan stratified_kfold(std::span<const Label> labels, std::size_t k, std::uint64_t seed,
                          std::span<const std::string> class_names) {
  if (k == 0) throw InvalidArgument("k_folds must be >= 1");
  FoldPlan plan;
  plan.k_folds = k;
  plan.seed = seed;
  plan.assignments.assign(labels.size(), 0);
  if (k == 1) return plan;
  std::map<Label, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::size_t offset = 0;
  for (auto& [label, members] : by_class) {
    if (members.size() < k) {
      const auto idx = static_cast<std::size_t>(label);
      const std::string name = idx < class_names.size() ? class_names[idx] : std::to_string(label);
      throw InvalidArgument("class '" + name + "' has " + std::to_string(members.size()) +
                            " samples, fewer than k_folds=" + std::to_string(k));
    }
    detail::Rng rng(detail::derive_seed(seed, static_cast<std::uint64_t>(label)));
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t r = 0; r < members.size(); ++r) plan.assignments[members[r]] = (offset + r) % k;
    offset = (offset + members.size()) % k;
  }
  return plan;
}

std::vector<MethodSpec> default_methods(double tau, std::span<const double> tau_sweep) {
  std::vector<MethodSpec> methods{{"forefront", MethodSpec::Kind::kForefront, 0.0},
                                  {"cwro", MethodSpec::Kind::kCwro, tau}};
  for (double t : tau_sweep) {
    methods.push_back({"cwro_tau" + fmt(t, "%.2f"), MethodSpec::Kind::kCwro, t});
  }
  return methods;
}

EvalResult evaluate_methods(std::span<const signal::Series> data, const EvalConfig& config,
                            const FoldPlan& folds) {
  config.plan.validate();
  if (data.empty()) throw InvalidArgument("evaluate_methods: no series");
  if (folds.assignments.size() != data.size()) {
    throw InvalidArgument("fold plan does not match the dataset size");
  }
  if (config.methods.empty()) throw InvalidArgument("no methods to evaluate");
  for (const auto& m : config.methods) {
    if (m.kind == MethodSpec::Kind::kCwro) reject::RejectParams{m.tau, config.d}.validate();
  }
  reject::RejectParams{0.0, config.d}.validate();

  const std::size_t n = data.size();
  const std::size_t n_stages = config.plan.size();
  const std::size_t n_methods = config.methods.size();
  EvalResult result;
  result.plan = config.plan;
  result.methods = config.methods;
  result.k_folds = folds.k_folds;
  result.fallback = config.train.fallback;
  result.d = config.d;
  for (std::size_t i = 0; i < n; ++i) {
    if (!data[i].label) throw InvalidArgument("series " + std::to_string(i) + " is unlabeled");
    result.samples.push_back(SampleInfo{i, *data[i].label, data[i].location, folds.assignments[i]});
  }
  result.traces.assign(n_methods, std::vector<cascade::DecisionTrace>(n));
  result.final_by_stage.assign(
      n_methods, std::vector<std::vector<std::optional<Label>>>(n, std::vector<std::optional<Label>>(n_stages)));
  result.pair_predictions.assign(n, std::vector<std::optional<std::pair<Label, Label>>>(n_stages));
  result.pairs.assign(folds.k_folds, {});

  for (std::size_t f = 0; f < folds.k_folds; ++f) {
    std::vector<signal::Series> train;
    std::vector<std::uint64_t> train_ids;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < n; ++i) {
      const bool in_fold = folds.k_folds == 1 || folds.assignments[i] == f;
      if (folds.k_folds == 1 || !in_fold) {
        train.push_back(data[i]);
        train_ids.push_back(i);
      }
      if (in_fold) test.push_back(i);
    }
    cascade::TrainedStages trained;
    try {
      trained = cascade::train_stages(train, config.plan, config.train, train_ids);
    } catch (const InvalidArgument& e) {
      rethrow_with_fold(e, f);
    } catch (const std::runtime_error& e) {
      rethrow_with_fold(e, f);
    }
    train.clear();
    train.shrink_to_fit();
    result.n_excluded += trained.n_excluded;
    const std::size_t n_channels = data.front().n_channels();
    const cascade::ForefrontModel ff =
        cascade::build_forefront(trained, config.plan, config.train, n_channels, {});
    const cascade::CwroModel cwro =
        cascade::build_cwro(trained, config.plan, config.train, n_channels, 0.5);
    for (const auto& st : ff.stages) {
      result.pairs[f].push_back(PairInfo{st.pair.first.id, st.pair.second.id,
                                         st.pair.first.accuracy, st.pair.second.accuracy,
                                         st.pair.df});
    }

    for (std::size_t i : test) {
      const signal::Series& series = data[i];
      const std::size_t onset = cascade::resolve_onset(series, ff.prefix);
      std::vector<StageOutput> outputs;
      for (std::size_t s = 0; s < n_stages; ++s) {
        if (onset + config.plan.k(s) > series.length()) break;
        const signal::FeatureVector x = cascade::stage_features(ff, series, s, onset);
        StageOutput out;
        out.first = learners::predict(ff.stages[s].pair.first.model, x.values);
        out.second = learners::predict(ff.stages[s].pair.second.model, x.values);
        const auto& best = std::get<learners::SvmModel>(cwro.stages[s].member.model);
        const Posteriors p = learners::predict_posteriors(best, x.values);
        const std::size_t top = argmax_lowest(p.p);
        out.cwro_top = p.p[top];
        out.cwro_label = best.classes[top];
        outputs.push_back(out);
        result.pair_predictions[i][s] = std::make_pair(out.first, out.second);
      }

      for (std::size_t m = 0; m < n_methods; ++m) {
        const MethodSpec& method = config.methods[m];
        const auto run = [&](std::size_t stages) {
          if (method.kind == MethodSpec::Kind::kForefront) {
            return derive_trace(
                config.plan, outputs, stages, config.train.fallback,
                [](const StageOutput& o) {
                  return o.first == o.second ? reject::Decision::accept(o.first)
                                             : reject::Decision::reject();
                },
                [&](const StageOutput& o) {
                  const std::size_t s = static_cast<std::size_t>(&o - outputs.data());
                  const auto& pair = ff.stages[s].pair;
                  return pair.second.accuracy > pair.first.accuracy ? o.second : o.first;
                });
          }
          return derive_trace(
              config.plan, outputs, stages, config.train.fallback,
              [&](const StageOutput& o) {
                return o.cwro_top > method.tau ? reject::Decision::accept(o.cwro_label)
                                               : reject::Decision::reject();
              },
              [](const StageOutput& o) { return o.cwro_label; });
        };
        result.traces[m][i] = run(n_stages);
        for (std::size_t s = 0; s < n_stages; ++s) result.final_by_stage[m][i][s] = run(s + 1).final_label;
      }
    }
  }

  result.report = summarize(config.methods, result.samples, result.traces, config.plan,
                            folds.k_folds, config.train.fallback, config.d);

  for (std::size_t m = 0; m < n_methods; ++m) {
    for (std::size_t s = 0; s < n_stages; ++s) {
      double acc_sum = 0.0, early_sum = 0.0;
      std::size_t acc_folds = 0, early_folds = 0;
      for (std::size_t f = 0; f < folds.k_folds; ++f) {
        std::size_t n_f = 0, hits = 0, n_acc = 0;
        double t_sum = 0.0;
        for (const auto& smp : result.samples) {
          if (smp.fold != f) continue;
          ++n_f;
          const auto& label = result.final_by_stage[m][smp.id][s];
          hits += label && *label == smp.truth;
          const auto& tr = result.traces[m][smp.id];
          if (tr.accepted() && tr.steps.back().stage <= s) {
            ++n_acc;
            t_sum += tr.decided_at_s;
          }
        }
        if (n_f == 0) continue;
        acc_sum += static_cast<double>(hits) / static_cast<double>(n_f);
        ++acc_folds;
        if (n_acc > 0) {
          early_sum += t_sum / static_cast<double>(n_acc);
          ++early_folds;
        }
      }
      result.coverage.push_back(CoverageRow{
          config.methods[m].name, config.plan.stage_times_s[s],
          acc_folds ? acc_sum / static_cast<double>(acc_folds) : std::nan(""),
          early_folds ? early_sum / static_cast<double>(early_folds) : std::nan("")});
    }
  }
  return result;
}

std::vector<StageRow> summarize(std::span<const MethodSpec> methods,
                                std::span<const SampleInfo> samples,
                                const std::vector<std::vector<cascade::DecisionTrace>>& traces,
                                const cascade::StagePlan& plan, std::size_t k_folds,
                                cascade::FallbackPolicy fallback, double d) {
  if (traces.size() != methods.size()) throw InvalidArgument("summarize: one trace set per method");
  std::vector<StageRow> rows;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    if (traces[m].size() != samples.size()) throw InvalidArgument("summarize: trace count mismatch");
    for (std::size_t s = 0; s < plan.size(); ++s) {
      double acc = 0.0, cov = 0.0, forced = 0.0, early = 0.0, risk = 0.0;
      std::size_t acc_folds = 0, folds_used = 0, early_folds = 0;
      for (std::size_t f = 0; f < k_folds; ++f) {
        reject::OutcomeCounts counts;
        std::size_t n_forced = 0, n_timed = 0;
        double t_sum = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
          if (samples[i].fold != f) continue;
          const auto& tr = traces[m][i];
          const bool accepted = tr.accepted() && tr.steps.back().stage <= s;
          if (accepted) {
            counts.add(reject::Decision::accept(*tr.final_label), samples[i].truth);
            t_sum += tr.decided_at_s;
            ++n_timed;
          } else {
            ++counts.n_rejected;
            if (!tr.steps.empty()) {
              const std::size_t last = std::min(s, tr.steps.back().stage);
              t_sum += plan.stage_times_s[last];
              ++n_timed;
              n_forced += fallback == cascade::FallbackPolicy::kForced;
            }
          }
        }
        if (counts.total() == 0) continue;
        const double n_f = static_cast<double>(counts.total());
        ++folds_used;
        if (counts.accepted() > 0) {
          acc += reject::conditional_accuracy(counts);
          ++acc_folds;
        }
        cov += static_cast<double>(counts.accepted()) / n_f;
        forced += static_cast<double>(n_forced) / n_f;
        risk += reject::empirical_risk(counts, d);
        if (n_timed > 0) {
          early += t_sum / static_cast<double>(n_timed);
          ++early_folds;
        }
      }
      const auto mean = [](double sum, std::size_t count) {
        return count ? sum / static_cast<double>(count) : std::nan("");
      };
      rows.push_back(StageRow{methods[m].name, plan.stage_times_s[s], mean(acc, acc_folds),
                              mean(cov, folds_used), mean(forced, folds_used),
                              mean(early, early_folds), mean(risk, folds_used)});
    }
  }
  return rows;
}

void write_report_csv(std::ostream& out, std::span<const StageRow> rows) {
  out << kReportHeader << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << fmt(r.stage_s, "%g") << ',' << fmt(r.cond_accuracy) << ','
        << fmt(r.coverage) << ',' << fmt(r.forced_frac) << ',' << fmt(r.mean_earliness_s) << ','
        << fmt(r.emp_risk) << '\n';
  }
}

void write_coverage_csv(std::ostream& out, std::span<const CoverageRow> rows) {
  out << "method,stage_s,full_accuracy,mean_earliness_accepted_s\n";
  for (const auto& r : rows) {
    out << r.method << ',' << fmt(r.stage_s, "%g") << ',' << fmt(r.full_accuracy) << ','
        << fmt(r.mean_earliness_accepted_s) << '\n';
  }
}

void write_samples_csv(std::ostream& out, std::span<const SampleInfo> samples) {
  out << "sample_id,label,location,fold\n";
  for (const auto& s : samples) {
    out << s.id << ',' << s.truth << ',' << (s.location ? std::to_string(*s.location) : "") << ','
        << s.fold << '\n';
  }
}

std::vector<SampleInfo> read_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "sample_id,label,location,fold") {
    throw FormatError("samples CSV: bad header");
  }
  std::vector<SampleInfo> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 4) throw FormatError("samples CSV: row " + std::to_string(row) + ": expected 4 fields");
    SampleInfo s;
    s.id = std::stoull(cells[0]);
    s.truth = std::stoi(cells[1]);
    if (!cells[2].empty()) s.location = std::stoi(cells[2]);
    s.fold = std::stoul(cells[3]);
    if (s.id != out.size()) throw FormatError("samples CSV: ids must be 0..n-1 in order");
    out.push_back(s);
  }
  return out;
}

std::vector<cascade::DecisionTrace> read_traces_csv(std::istream& in,
                                                    std::span<const SampleInfo> samples,
                                                    const cascade::StagePlan& plan) {
  std::string line;
  if (!std::getline(in, line) || line != "sample_id,stage_time_s,decision,label,forced") {
    throw FormatError("trace CSV: bad header");
  }
  std::vector<cascade::DecisionTrace> traces(samples.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 5) throw FormatError("trace CSV: row " + std::to_string(row) + ": expected 5 fields");
    const auto id = std::stoull(cells[0]);
    if (id >= traces.size()) throw FormatError("trace CSV: row " + std::to_string(row) + ": unknown sample");
    const double t = std::stod(cells[1]);
    std::size_t stage = plan.size();
    for (std::size_t s = 0; s < plan.size(); ++s) {
      if (std::abs(plan.stage_times_s[s] - t) < 1e-9) stage = s;
    }
    if (stage == plan.size()) throw FormatError("trace CSV: row " + std::to_string(row) + ": unknown stage time");
    auto& tr = traces[id];
    if (cells[2] == "ACCEPT") {
      const Label label = std::stoi(cells[3]);
      tr.steps.push_back({stage, plan.stage_times_s[stage], reject::Decision::accept(label)});
      tr.final_label = label;
    } else if (cells[2] == "REJECT") {
      tr.steps.push_back({stage, plan.stage_times_s[stage], reject::Decision::reject()});
    } else if (cells[2] == "FORCED") {
      tr.final_label = std::stoi(cells[3]);
      tr.forced = true;
    } else {
      throw FormatError("trace CSV: row " + std::to_string(row) + ": unknown decision " + cells[2]);
    }
    tr.decided_at_s = plan.stage_times_s[stage];
  }
  return traces;
}

LocationSurface location_accuracy_surface(const EvalResult& result, const std::string& method,
                                          std::optional<std::size_t> fold) {
  const auto it = std::find_if(result.methods.begin(), result.methods.end(),
                               [&](const MethodSpec& m) { return m.name == method; });
  if (it == result.methods.end()) throw InvalidArgument("unknown method '" + method + "'");
  const auto m = static_cast<std::size_t>(it - result.methods.begin());
  LocationSurface surface;
  surface.method = method;
  std::set<int> all_locations;
  // location -> per stage (hits, count)
  std::map<int, std::vector<std::pair<std::size_t, std::size_t>>> tally;
  for (const auto& smp : result.samples) {
    if (!smp.location) {
      throw InvalidArgument("sample " + std::to_string(smp.id) + " has no location");
    }
    all_locations.insert(*smp.location);
    if (fold && smp.fold != *fold) continue;
    auto& cells = tally[*smp.location];
    cells.resize(result.plan.size());
    for (std::size_t s = 0; s < result.plan.size(); ++s) {
      const auto& label = result.final_by_stage[m][smp.id][s];
      cells[s].first += label && *label == smp.truth;
      ++cells[s].second;
    }
  }
  for (int loc : all_locations) {
    const auto t = tally.find(loc);
    if (t == tally.end()) {
      surface.notes.push_back("location " + std::to_string(loc) + " absent from test fold " +
                              std::to_string(fold.value_or(0)) + "; row omitted");
      continue;
    }
    for (std::size_t s = 0; s < result.plan.size(); ++s) {
      const auto [hits, count] = t->second[s];
      surface.rows.push_back(LocationRow{loc, result.plan.stage_times_s[s],
                                         static_cast<double>(hits) / static_cast<double>(count),
                                         count});
    }
  }
  return surface;
}

void write_location_csv(std::ostream& out, const LocationSurface& surface) {
  out << "method,location,stage_s,accuracy,n_samples\n";
  for (const auto& r : surface.rows) {
    out << surface.method << ',' << r.location << ',' << fmt(r.stage_s, "%g") << ','
        << fmt(r.accuracy) << ',' << r.n_samples << '\n';
  }
  for (const auto& note : surface.notes) out << "# " << note << '\n';
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("spearman: need two equal-length samples");
  const auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(rx.size());
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(ry.size());
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace forefront::eval
