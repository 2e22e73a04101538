#include "run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "forefront/error.hpp"

namespace forefront::cli {
namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const std::string& where, const char* key, T& dst) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    dst = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + where + "." + key + "'");
  }
}

template <typename T>
void read_unsigned(const json& obj, const std::string& where, const char* key, T& dst) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_number_unsigned()) {
    throw ConfigError("'" + where + "." + key + "' must be a non-negative integer");
  }
  dst = it->get<T>();
}

}  // namespace

void RunConfig::validate() const {
  try {
    gen_config().validate();
    onset.validate();
    stage_plan().validate();
    reject::RejectParams{tau, d}.validate();
    for (double t : tau_sweep) reject::RejectParams{t, d}.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (downsample_window == 0) throw ConfigError("signal.downsample_window must be >= 1");
  if (grid.c_log2_hi < grid.c_log2_lo || grid.gamma_log2_hi < grid.gamma_log2_lo) {
    throw ConfigError("grid bounds are inverted");
  }
  if (!(grid.tol > 0.0)) throw ConfigError("grid.tol must be positive");
  if (grid.max_passes < 1) throw ConfigError("grid.max_passes must be >= 1");
  if (top_n < 2) throw ConfigError("ensemble.top_n must be >= 2");
  if (oof_folds < 2) throw ConfigError("ensemble.oof_folds must be >= 2");
  if (k_folds < 1) throw ConfigError("eval.k_folds must be >= 1");
}

datagen::GenConfig RunConfig::gen_config() const {
  datagen::GenConfig g = gen;
  g.seed = seed;
  return g;
}

cascade::StagePlan RunConfig::stage_plan() const {
  cascade::StagePlan plan;
  plan.stage_times_s = stage_times_s;
  plan.effective_rate_hz = gen.rate_hz / static_cast<double>(downsample_window);
  return plan;
}

cascade::TrainOptions RunConfig::train_options() const {
  cascade::TrainOptions o;
  o.grid = learners::make_grid(grid);
  o.top_n = top_n;
  o.oof_folds = oof_folds;
  o.prefix.onset = onset;
  o.prefix.detect = detect_onset;
  o.fallback = fallback;
  return o;
}

eval::EvalConfig RunConfig::eval_config() const {
  eval::EvalConfig e;
  e.plan = stage_plan();
  e.train = train_options();
  e.methods = eval::default_methods(tau, tau_sweep);
  e.d = d;
  return e;
}

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, "", {"seed", "gen", "signal", "grid", "ensemble", "cascade", "reject", "eval", "paths"});
  RunConfig c;
  read_unsigned(root, "", "seed", c.seed);

  if (root.contains("gen")) {
    const json& g = root["gen"];
    check_keys(g, "gen", {"n_classes", "n_channels", "n_locations", "series_per_class_location",
                          "duration_s", "rate_hz", "noise_ar", "noise_amplitude", "response_jitter"});
    read(g, "gen", "n_classes", c.gen.n_classes);
    read(g, "gen", "n_channels", c.gen.n_channels);
    read(g, "gen", "n_locations", c.gen.n_locations);
    read(g, "gen", "series_per_class_location", c.gen.series_per_class_location);
    read(g, "gen", "duration_s", c.gen.duration_s);
    read(g, "gen", "rate_hz", c.gen.rate_hz);
    read(g, "gen", "noise_ar", c.gen.noise_ar);
    read(g, "gen", "noise_amplitude", c.gen.noise_amplitude);
    read(g, "gen", "response_jitter", c.gen.response_jitter);
  }
  if (root.contains("signal")) {
    const json& s = root["signal"];
    check_keys(s, "signal", {"downsample_window", "onset_window", "onset_factor",
                             "onset_baseline_len", "detect_onset"});
    read_unsigned(s, "signal", "downsample_window", c.downsample_window);
    read_unsigned(s, "signal", "onset_window", c.onset.window);
    read(s, "signal", "onset_factor", c.onset.factor);
    read_unsigned(s, "signal", "onset_baseline_len", c.onset.baseline_len);
    read(s, "signal", "detect_onset", c.detect_onset);
  }
  if (root.contains("grid")) {
    const json& g = root["grid"];
    check_keys(g, "grid", {"c_log2_lo", "c_log2_hi", "gamma_log2_lo", "gamma_log2_hi", "tol", "max_passes"});
    read(g, "grid", "c_log2_lo", c.grid.c_log2_lo);
    read(g, "grid", "c_log2_hi", c.grid.c_log2_hi);
    read(g, "grid", "gamma_log2_lo", c.grid.gamma_log2_lo);
    read(g, "grid", "gamma_log2_hi", c.grid.gamma_log2_hi);
    read(g, "grid", "tol", c.grid.tol);
    read(g, "grid", "max_passes", c.grid.max_passes);
  }
  if (root.contains("ensemble")) {
    const json& e = root["ensemble"];
    check_keys(e, "ensemble", {"top_n", "oof_folds"});
    read_unsigned(e, "ensemble", "top_n", c.top_n);
    read_unsigned(e, "ensemble", "oof_folds", c.oof_folds);
  }
  if (root.contains("cascade")) {
    const json& k = root["cascade"];
    check_keys(k, "cascade", {"stage_times_s", "fallback"});
    read(k, "cascade", "stage_times_s", c.stage_times_s);
    if (k.contains("fallback")) {
      std::string f;
      read(k, "cascade", "fallback", f);
      if (f == "forced") {
        c.fallback = cascade::FallbackPolicy::kForced;
      } else if (f == "reject") {
        c.fallback = cascade::FallbackPolicy::kReject;
      } else {
        throw ConfigError("cascade.fallback must be \"forced\" or \"reject\"");
      }
    }
  }
  if (root.contains("reject")) {
    const json& r = root["reject"];
    check_keys(r, "reject", {"tau", "d", "tau_sweep"});
    read(r, "reject", "tau", c.tau);
    read(r, "reject", "d", c.d);
    read(r, "reject", "tau_sweep", c.tau_sweep);
  }
  if (root.contains("eval")) {
    const json& e = root["eval"];
    check_keys(e, "eval", {"k_folds", "fold_seed"});
    read_unsigned(e, "eval", "k_folds", c.k_folds);
    if (e.contains("fold_seed")) {
      std::uint64_t fs = 0;
      read_unsigned(e, "eval", "fold_seed", fs);
      c.fold_seed = fs;
    }
  }
  if (root.contains("paths")) {
    const json& p = root["paths"];
    check_keys(p, "paths", {"out", "manifest", "model"});
    std::string v;
    if (p.contains("out")) { read(p, "paths", "out", v); c.out = v; }
    if (p.contains("manifest")) { read(p, "paths", "manifest", v); c.manifest = v; }
    if (p.contains("model")) { read(p, "paths", "model", v); c.model = v; }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace forefront::cli
