#include "forefront/signal.hpp"

#include <cmath>
#include <string>

#include "forefront/error.hpp"

namespace forefront::signal {
namespace {

void validate_channels(const std::vector<std::vector<double>>& channels, double rate) {
  if (channels.empty()) throw InvalidArgument("series has no channels");
  const std::size_t len = channels.front().size();
  if (len == 0) throw InvalidArgument("series channels are empty");
  for (const auto& ch : channels) {
    if (ch.size() != len) throw InvalidArgument("series channels have unequal lengths");
  }
  if (!(rate > 0.0)) throw InvalidArgument("sample rate must be positive");
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double pop_std(std::span<const double> v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

void RawSeries::validate() const { validate_channels(channels, sample_rate_hz); }

void Series::validate() const {
  validate_channels(channels, sample_rate_hz);
  if (!(effective_rate_hz > 0.0)) throw InvalidArgument("effective rate must be positive");
}

void OnsetConfig::validate() const {
  if (window < 2) throw InvalidArgument("onset window must be >= 2");
  if (baseline_len < window) throw InvalidArgument("onset baseline_len must be >= window");
  if (!(factor >= 0.0) || !std::isfinite(factor)) {
    throw InvalidArgument("onset factor must be finite and non-negative");
  }
}

Series downsample(const RawSeries& series, std::size_t window) {
  if (window == 0) throw InvalidArgument("downsample window must be >= 1");
  series.validate();
  const std::size_t out_len = series.length() / window;
  if (out_len == 0) {
    throw EmptySeriesError("series of length " + std::to_string(series.length()) +
                           " is shorter than downsample window " + std::to_string(window));
  }
  Series out;
  out.sample_rate_hz = series.sample_rate_hz;
  out.effective_rate_hz = series.sample_rate_hz / static_cast<double>(window);
  out.label = series.label;
  out.location = series.location;
  out.channels.reserve(series.n_channels());
  for (const auto& ch : series.channels) {
    std::vector<double> reduced(out_len);
    for (std::size_t i = 0; i < out_len; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < window; ++j) s += ch[i * window + j];
      reduced[i] = window == 1 ? s : s / static_cast<double>(window);
    }
    out.channels.push_back(std::move(reduced));
  }
  return out;
}

std::vector<double> channel_mean(const Series& series) {
  std::vector<double> out(series.length(), 0.0);
  for (const auto& ch : series.channels) {
    for (std::size_t t = 0; t < out.size(); ++t) out[t] += ch[t];
  }
  const double n = static_cast<double>(series.n_channels());
  for (double& v : out) v /= n;
  return out;
}

double rolling_std(std::span<const double> values, std::size_t t, std::size_t window) {
  if (window == 0 || t + 1 < window || t >= values.size()) {
    throw InvalidArgument("rolling_std: window does not fit at index " + std::to_string(t));
  }
  return pop_std(values.subspan(t + 1 - window, window));
}

std::optional<std::size_t> detect_onset(const Series& series, const OnsetConfig& cfg) {
  cfg.validate();
  series.validate();
  if (series.length() < cfg.baseline_len + cfg.window) {
    throw InvalidArgument("series of length " + std::to_string(series.length()) +
                          " too short for onset detection (needs " +
                          std::to_string(cfg.baseline_len + cfg.window) + ")");
  }
  const std::vector<double> trace = channel_mean(series);
  const std::span<const double> view(trace);
  // The floor keeps rounding noise on a flat trace from counting as a rise.
  const double floor = std::max(cfg.factor * pop_std(view.first(cfg.baseline_len)), kStdFloor);
  for (std::size_t t = cfg.window - 1; t < trace.size(); ++t) {
    if (rolling_std(view, t, cfg.window) > floor) return t;
  }
  return std::nullopt;
}

FeatureVector raw_prefix_features(const Series& series, std::size_t onset, std::size_t k) {
  if (k == 0) throw InvalidArgument("prefix length k must be >= 1");
  if (onset + k > series.length()) {
    throw PrefixUnavailable("prefix [" + std::to_string(onset) + ", " + std::to_string(onset + k) +
                            ") exceeds series length " + std::to_string(series.length()));
  }
  FeatureVector fv;
  fv.n_channels = series.n_channels();
  fv.k = k;
  fv.values.reserve(fv.n_channels * k);
  for (const auto& ch : series.channels) {
    const std::span<const double> c(ch);
    const double baseline = onset == 0 ? c[0] : mean_of(c.first(onset));
    for (std::size_t t = onset; t < onset + k; ++t) fv.values.push_back(c[t] - baseline);
  }
  return fv;
}

void normalize_in_place(std::span<double> values, const NormStats& stats) {
  if (values.size() != stats.dim()) {
    throw InvalidArgument("feature dim " + std::to_string(values.size()) +
                          " does not match normalization dim " + std::to_string(stats.dim()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = stats.std[i] < kStdFloor ? 0.0 : (values[i] - stats.mean[i]) / stats.std[i];
  }
}

FeatureVector extract_prefix_features(const Series& series, std::size_t onset, std::size_t k,
                                      const NormStats& stats) {
  FeatureVector fv = raw_prefix_features(series, onset, k);
  normalize_in_place(fv.values, stats);
  return fv;
}

NormStats fit_norm_stats(const Matrix& rows) {
  if (rows.empty()) throw InvalidArgument("fit_norm_stats: no input vectors");
  const std::size_t dim = rows.cols();
  const double n = static_cast<double>(rows.rows());
  NormStats stats{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const auto row = rows.row(r);
    for (std::size_t d = 0; d < dim; ++d) stats.mean[d] += row[d];
  }
  for (double& m : stats.mean) m /= n;
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const auto row = rows.row(r);
    for (std::size_t d = 0; d < dim; ++d) {
      const double dev = row[d] - stats.mean[d];
      stats.std[d] += dev * dev;
    }
  }
  for (double& s : stats.std) s = std::sqrt(s / n);
  return stats;
}

NormStats fit_norm_stats(std::span<const FeatureVector> vectors) {
  if (vectors.empty()) throw InvalidArgument("fit_norm_stats: no input vectors");
  Matrix rows;
  for (const auto& v : vectors) {
    if (v.dim() != vectors.front().dim()) {
      throw InvalidArgument("fit_norm_stats: vectors have unequal dims");
    }
    rows.append_row(v.values);
  }
  return fit_norm_stats(rows);
}

}  // namespace forefront::signal
