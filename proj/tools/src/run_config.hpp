#pragma once

// One JSON file carries every tunable of a run. Every key is optional; unknown
// keys are an error. Command-line flags override the file.
//
// {
//   "seed": 7,
//   "gen":      { "n_classes", "n_channels", "n_locations", "series_per_class_location",
//                 "duration_s", "rate_hz", "noise_ar", "noise_amplitude", "response_jitter" },
//   "signal":   { "downsample_window", "onset_window", "onset_factor",
//                 "onset_baseline_len", "detect_onset" },
//   "grid":     { "c_log2_lo", "c_log2_hi", "gamma_log2_lo", "gamma_log2_hi",
//                 "tol", "max_passes" },
//   "ensemble": { "top_n", "oof_folds" },
//   "cascade":  { "stage_times_s": [..], "fallback": "forced" | "reject" },
//   "reject":   { "tau", "d", "tau_sweep": [..] },
//   "eval":     { "k_folds", "fold_seed" },
//   "paths":    { "out", "manifest", "model" }
// }

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "forefront/cascade.hpp"
#include "forefront/datagen.hpp"
#include "forefront/eval.hpp"

namespace forefront::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::uint64_t seed = 7;
  datagen::GenConfig gen;
  std::size_t downsample_window = 10;
  signal::OnsetConfig onset;
  bool detect_onset = true;
  learners::GridSpec grid;
  std::size_t top_n = 5;
  std::size_t oof_folds = 5;
  std::vector<double> stage_times_s{5, 10, 15, 20, 25, 30};
  cascade::FallbackPolicy fallback = cascade::FallbackPolicy::kForced;
  double tau = 0.5;
  double d = 0.1;
  std::vector<double> tau_sweep{0.3, 0.5, 0.7, 0.9};
  std::size_t k_folds = 10;
  std::optional<std::uint64_t> fold_seed;  // defaults to seed
  std::filesystem::path out = "out";
  std::optional<std::filesystem::path> manifest;
  std::optional<std::filesystem::path> model;

  // Throws ConfigError on any inconsistent value.
  void validate() const;

  datagen::GenConfig gen_config() const;  // gen with seed applied
  cascade::StagePlan stage_plan() const;
  cascade::TrainOptions train_options() const;
  eval::EvalConfig eval_config() const;
  std::uint64_t effective_fold_seed() const { return fold_seed.value_or(seed); }
};

// Throws ConfigError naming the offending key.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace forefront::cli
