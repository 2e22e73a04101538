#include <benchmark/benchmark.h>

#include <random>

#include "forefront/cascade.hpp"
#include "forefront/datagen.hpp"
#include "forefront/learners.hpp"
#include "forefront/svm.hpp"

using namespace forefront;

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = n(g);
  return m;
}

// Prefix-like problem: n samples, dim 400 (8 channels x 50), 10 classes.
void fill_problem(std::size_t n, Matrix& x, std::vector<Label>& y) {
  x = gaussian(n, 400, 1);
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<Label>(i % 10);
    for (std::size_t c = 0; c < 40; ++c) x(i, y[i] * 40 + c) += 1.5;
  }
}

void BM_SolveSmo(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = gaussian(n, 20, 2);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = x(i, 0) + x(i, 1) > 0 ? 1 : -1;
  const Matrix k = learners::rbf_from_distances(learners::squared_distances(x), 1.0, 20);
  for (auto _ : state) benchmark::DoNotOptimize(learners::solve_smo(k, y, 1.0, 1e-3, 10));
}
BENCHMARK(BM_SolveSmo)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_TrainSvm(benchmark::State& state) {
  Matrix x;
  std::vector<Label> y;
  fill_problem(static_cast<std::size_t>(state.range(0)), x, y);
  for (auto _ : state) benchmark::DoNotOptimize(learners::train_svm(x, y, learners::SvmParams{1.0, 1.0}));
}
BENCHMARK(BM_TrainSvm)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

// One cascade stage: the full 121-point grid with 5-fold out-of-fold fits.
void BM_TrainGridStage(benchmark::State& state) {
  Matrix x;
  std::vector<Label> y;
  fill_problem(static_cast<std::size_t>(state.range(0)), x, y);
  const auto grid = learners::make_grid();
  for (auto _ : state) benchmark::DoNotOptimize(learners::train_grid(x, y, grid, 5));
}
BENCHMARK(BM_TrainGridStage)->Arg(200)->Unit(benchmark::kMillisecond)->Iterations(1);

void BM_ClassifyStream(benchmark::State& state) {
  datagen::GenConfig g;
  g.n_locations = 6;
  const auto data = datagen::generate_downsampled(g, 10);
  cascade::TrainOptions opts;
  opts.grid = learners::make_grid(learners::GridSpec{-1, 1, -1, 1});
  opts.oof_folds = 3;
  const auto model = cascade::train_forefront(data, cascade::StagePlan{}, opts);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cascade::classify_stream(model, data[i]));
    i = (i + 1) % data.size();
  }
}
BENCHMARK(BM_ClassifyStream)->Unit(benchmark::kMicrosecond);

void BM_GenerateSeries(benchmark::State& state) {
  datagen::GenConfig g;
  const auto sig = datagen::draw_signatures(g);
  int i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(datagen::generate_series(g, sig, i % 10, i % 45, 0)), ++i;
}
BENCHMARK(BM_GenerateSeries)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
