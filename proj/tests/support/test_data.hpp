#pragma once

// Small fixtures shared by the unit tests.

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "forefront/cascade.hpp"
#include "forefront/datagen.hpp"
#include "forefront/matrix.hpp"

namespace forefront::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = n(gen);
  return m;
}

// Three well-separated Gaussian blobs in 2-D.
inline void blobs(std::size_t per_class, std::uint64_t seed, Matrix& x, std::vector<Label>& y,
                  int n_classes = 3, double spread = 0.3) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, spread);
  x = Matrix();
  y.clear();
  for (int c = 0; c < n_classes; ++c) {
    const double cx = 3.0 * std::cos(2.0 * 3.14159265358979 * c / n_classes);
    const double cy = 3.0 * std::sin(2.0 * 3.14159265358979 * c / n_classes);
    for (std::size_t i = 0; i < per_class; ++i) {
      const double row[2] = {cx + n(gen), cy + n(gen)};
      x.append_row(row);
      y.push_back(c);
    }
  }
}

// A compact synthetic problem for cascade/eval tests: 3 classes, 2 channels,
// 60 s recordings, two stages.
inline datagen::GenConfig small_gen(double noise = 0.03, double jitter = 0.2) {
  datagen::GenConfig g;
  g.n_classes = 3;
  g.n_channels = 2;
  g.n_locations = 8;
  g.duration_s = 60.0;
  g.noise_amplitude = noise;
  g.response_jitter = jitter;
  g.seed = 11;
  return g;
}

inline cascade::StagePlan small_plan() {
  cascade::StagePlan p;
  p.stage_times_s = {5, 10};
  p.effective_rate_hz = 10.0;
  return p;
}

inline cascade::TrainOptions small_options() {
  cascade::TrainOptions o;
  learners::GridSpec spec;
  spec.c_log2_lo = -1;
  spec.c_log2_hi = 1;
  spec.gamma_log2_lo = -2;
  spec.gamma_log2_hi = 0;
  o.grid = learners::make_grid(spec);
  o.top_n = 3;
  o.oof_folds = 2;
  return o;
}

// Downsampled small_gen() data with a two-stage model trained on all of it.
// Built once per test binary.
struct SmallProblem {
  std::vector<signal::Series> data;
  cascade::TrainedStages trained;
  cascade::ForefrontModel forefront;
  cascade::CwroModel cwro;
};

inline const SmallProblem& small_problem() {
  static const SmallProblem p = [] {
    SmallProblem out;
    out.data = datagen::generate_downsampled(small_gen(), 10);
    const auto opts = small_options();
    out.trained = cascade::train_stages(out.data, small_plan(), opts);
    out.forefront = cascade::build_forefront(out.trained, small_plan(), opts,
                                             out.data.front().n_channels(),
                                             datagen::default_class_names(3));
    out.cwro = cascade::build_cwro(out.trained, small_plan(), opts, out.data.front().n_channels(), 0.5);
    return out;
  }();
  return p;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  // Per process, so tests discovered into separate ctest runs can go in parallel.
  const auto dir = std::filesystem::temp_directory_path() /
                   ("forefront_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace forefront::testing
