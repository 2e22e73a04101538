#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include <CLI/CLI.hpp>

#include "forefront/error.hpp"
#include "forefront/model_io.hpp"

namespace forefront::cli {
namespace fs = std::filesystem;
namespace {

// Maps library exceptions onto exit codes. `fallback` is used for
// InvalidArgument/InvalidState, whose meaning depends on the phase.
int guarded(std::ostream& err, int fallback, const std::function<void()>& body) {
  try {
    body();
    return kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kIoError;
  } catch (const FormatError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const EmptyDatasetError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const EmptySeriesError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const PrefixUnavailable& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const NoDecision& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    const char* what = fallback == kConfigError     ? "config error: "
                       : fallback == kTrainingError ? "training failed: "
                       : fallback == kIoError       ? "io error: "
                                                    : "data error: ";
    err << what << e.what() << '\n';
    return fallback;
  }
}

struct LoadedData {
  std::vector<signal::Series> series;
  std::vector<std::string> class_names;
  RunConfig cfg;  // gen.rate_hz follows the manifest
};

LoadedData load_data(const RunConfig& cfg, std::ostream& err) {
  LoadedData d;
  d.cfg = cfg;
  if (cfg.manifest) {
    const datagen::Dataset ds = datagen::load_csv_dataset(*cfg.manifest);
    d.cfg.gen.rate_hz = ds.items.front().sample_rate_hz;
    d.series = datagen::downsample_all(ds, cfg.downsample_window);
    d.class_names = ds.class_names;
    err << "loaded " << d.series.size() << " series from " << cfg.manifest->string() << '\n';
  } else {
    d.series = datagen::generate_downsampled(cfg.gen_config(), cfg.downsample_window);
    d.class_names = datagen::default_class_names(cfg.gen.n_classes);
    err << "generated " << d.series.size() << " synthetic series (seed " << cfg.seed << ")\n";
  }
  return d;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& fill) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  fill(f);
  f.flush();
  if (!f) throw IoError("write failed for " + path.string());
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

fs::path model_path(const RunConfig& cfg) { return cfg.model.value_or(cfg.out / "model.ffn"); }

std::string label_name(Label l, const std::vector<std::string>& names) {
  const auto i = static_cast<std::size_t>(l);
  return i < names.size() ? names[i] : std::to_string(l);
}

std::string seconds(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%gs", t);
  return buf;
}

}  // namespace

std::string trace_file(const std::string& method) { return "traces_" + method + ".csv"; }
std::string location_file(const std::string& method) { return "location_accuracy_" + method + ".csv"; }

int cmd_gen(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, kConfigError, [&] {
    cfg.validate();
    const datagen::GenConfig g = cfg.gen_config();
    const fs::path manifest = datagen::write_generated_dataset(g, cfg.out / "data");
    out << "wrote " << g.n_classes * g.n_locations * g.series_per_class_location << " series ("
        << g.n_classes << " classes, " << g.n_channels << " channels, " << g.n_locations
        << " locations, " << g.duration_s << " s at " << g.rate_hz << " Hz)\n";
    out << manifest.string() << '\n';
  });
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  LoadedData data;
  int rc = guarded(err, kConfigError, [&] {
    cfg.validate();
    data = load_data(cfg, err);
  });
  if (rc != kOk) return rc;
  cascade::ForefrontModel model;
  rc = guarded(err, kTrainingError, [&] {
    model = cascade::train_forefront(data.series, data.cfg.stage_plan(), data.cfg.train_options(),
                                     data.class_names);
  });
  if (rc != kOk) return rc;
  for (std::size_t s = 0; s < model.stages.size(); ++s) {
    const auto& pair = model.stages[s].pair;
    char buf[96];
    std::snprintf(buf, sizeof buf, " df=%.6f acc=%.4f/%.4f", pair.df, pair.first.accuracy,
                  pair.second.accuracy);
    out << "stage " << s + 1 << " t=" << seconds(model.plan.stage_times_s[s])
        << " k=" << model.plan.k(s) << " pair=" << learners::describe(pair.first) << '+'
        << learners::describe(pair.second) << buf << '\n';
  }
  if (model.n_excluded > 0) out << "excluded " << model.n_excluded << " short series\n";
  return guarded(err, kIoError, [&] {
    const fs::path path = model_path(cfg);
    if (path.has_parent_path()) make_dir(path.parent_path());
    model_io::save_model(model, path);
    out << "model " << path.string() << '\n';
  });
}

int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  LoadedData data;
  eval::FoldPlan folds;
  int rc = guarded(err, kConfigError, [&] {
    cfg.validate();
    data = load_data(cfg, err);
    std::vector<Label> labels;
    for (const auto& s : data.series) labels.push_back(s.label.value());
    folds = eval::stratified_kfold(labels, cfg.k_folds, cfg.effective_fold_seed(), data.class_names);
  });
  if (rc != kOk) return rc;
  eval::EvalResult result;
  rc = guarded(err, kTrainingError, [&] {
    result = eval::evaluate_methods(data.series, data.cfg.eval_config(), folds);
  });
  if (rc != kOk) return rc;
  return guarded(err, kIoError, [&] {
    make_dir(cfg.out);
    write_file(cfg.out / kTableFile, [&](std::ostream& f) { eval::write_report_csv(f, result.report); });
    write_file(cfg.out / kCoverageFile,
               [&](std::ostream& f) { eval::write_coverage_csv(f, result.coverage); });
    write_file(cfg.out / kSamplesFile,
               [&](std::ostream& f) { eval::write_samples_csv(f, result.samples); });
    for (std::size_t m = 0; m < result.methods.size(); ++m) {
      write_file(cfg.out / trace_file(result.methods[m].name), [&](std::ostream& f) {
        cascade::write_trace_header(f);
        for (const auto& smp : result.samples) cascade::write_trace_rows(f, smp.id, result.traces[m][smp.id]);
      });
    }
    write_file(cfg.out / kPairsFile, [&](std::ostream& f) {
      f << "fold,stage_s,first_id,second_id,first_accuracy,second_accuracy,df\n";
      char buf[160];
      for (std::size_t k = 0; k < result.pairs.size(); ++k) {
        for (std::size_t s = 0; s < result.pairs[k].size(); ++s) {
          const auto& p = result.pairs[k][s];
          std::snprintf(buf, sizeof buf, "%zu,%g,%zu,%zu,%.6f,%.6f,%.6f\n", k,
                        result.plan.stage_times_s[s], p.first_id, p.second_id, p.first_accuracy,
                        p.second_accuracy, p.df);
          f << buf;
        }
      }
    });
    const bool has_locations = std::all_of(result.samples.begin(), result.samples.end(),
                                           [](const eval::SampleInfo& s) { return s.location.has_value(); });
    if (has_locations) {
      for (const char* method : {"forefront", "cwro"}) {
        const bool present = std::any_of(result.methods.begin(), result.methods.end(),
                                         [&](const eval::MethodSpec& m) { return m.name == method; });
        if (!present) continue;
        const auto surface = eval::location_accuracy_surface(result, method);
        write_file(cfg.out / location_file(method),
                   [&](std::ostream& f) { eval::write_location_csv(f, surface); });
      }
    } else {
      err << "no location metadata; location tables skipped\n";
    }
    if (result.n_excluded > 0) err << "excluded " << result.n_excluded << " short training series\n";
    eval::write_report_csv(out, result.report);
  });
}

int cmd_stream(const RunConfig& cfg, const fs::path& series_csv, std::ostream& out, std::ostream& err) {
  cascade::ForefrontModel model;
  signal::Series series;
  int rc = guarded(err, kConfigError, [&] {
    cfg.validate();
    model = model_io::load_model(model_path(cfg));
    series = signal::downsample(datagen::load_series_csv(series_csv, cfg.gen.rate_hz),
                                cfg.downsample_window);
    if (std::abs(series.effective_rate_hz - model.plan.effective_rate_hz) > 1e-9) {
      throw ConfigError("series rate after downsampling does not match the model's stage plan");
    }
  });
  if (rc != kOk) return rc;
  cascade::DecisionTrace trace;
  rc = guarded(err, kDataError, [&] { trace = cascade::classify_stream(model, series); });
  if (rc != kOk) return rc;
  for (const auto& step : trace.steps) {
    out << "stage " << step.stage + 1 << " t=" << seconds(step.time_s) << ' ';
    if (step.decision.accepted()) {
      out << "ACCEPT " << label_name(step.decision.label(), model.class_names)
          << " decided_at=" << seconds(step.time_s) << '\n';
    } else {
      out << "REJECT\n";
    }
  }
  if (!trace.accepted()) {
    if (trace.forced) {
      out << "FORCED " << label_name(*trace.final_label, model.class_names)
          << " decided_at=" << seconds(trace.decided_at_s) << '\n';
    } else {
      out << "REJECT decided_at=" << seconds(trace.decided_at_s) << '\n';
    }
  }
  return kOk;
}

int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, kDataError, [&] {
    cfg.validate();
    const eval::EvalConfig ec = cfg.eval_config();
    auto samples_in = open_input(cfg.out / kSamplesFile);
    const std::vector<eval::SampleInfo> samples = eval::read_samples_csv(samples_in);
    if (samples.empty()) throw FormatError("samples CSV lists no samples");
    std::size_t k_folds = 0;
    for (const auto& s : samples) k_folds = std::max(k_folds, s.fold + 1);
    std::vector<std::vector<cascade::DecisionTrace>> traces;
    for (const auto& m : ec.methods) {
      auto in = open_input(cfg.out / trace_file(m.name));
      traces.push_back(eval::read_traces_csv(in, samples, ec.plan));
    }
    const auto rows = eval::summarize(ec.methods, samples, traces, ec.plan, k_folds, cfg.fallback, cfg.d);
    eval::write_report_csv(out, rows);
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Early gas classification with agreement-based rejection"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path, out_dir, manifest, model, series;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_option("--manifest", manifest, "Dataset manifest; omit to use the synthetic set");
  app.add_option("--model", model, "Model bundle path");

  auto* gen = app.add_subcommand("gen", "Write the synthetic dataset");
  auto* train = app.add_subcommand("train", "Train the cascade and save the model");
  auto* evaluate = app.add_subcommand("eval", "Cross-validate Forefront against the CWRO baseline");
  auto* stream = app.add_subcommand("stream", "Classify one series stage by stage");
  stream->add_option("series", series, "Series CSV (t,ch0,...)")->required();
  auto* report = app.add_subcommand("report", "Recompute table1 from stored traces");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kConfigError;
  }

  RunConfig cfg;
  const int rc = guarded(err, kConfigError, [&] {
    if (config_path) cfg = load_config(*config_path);
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.out = *out_dir;
    if (manifest) cfg.manifest = *manifest;
    if (model) cfg.model = *model;
  });
  if (rc != kOk) return rc;

  if (*gen) return cmd_gen(cfg, out, err);
  if (*train) return cmd_train(cfg, out, err);
  if (*evaluate) return cmd_eval(cfg, out, err);
  if (*stream) return cmd_stream(cfg, *series, out, err);
  if (*report) return cmd_report(cfg, out, err);
  return kConfigError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"forefront"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace forefront::cli
