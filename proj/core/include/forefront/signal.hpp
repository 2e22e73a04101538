#pragma once

// Multichannel sensor series: downsampling, onset ("rising point") detection
// and baseline-corrected, z-normalized prefix features.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "forefront/matrix.hpp"

namespace forefront::signal {

struct RawSeries {
  std::vector<std::vector<double>> channels;
  double sample_rate_hz = 100.0;
  std::optional<Label> label;
  std::optional<int> location;

  std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
  std::size_t n_channels() const { return channels.size(); }

  // Throws InvalidArgument on ragged channels, empty channels or a
  // non-positive rate.
  void validate() const;
};

struct Series {
  std::vector<std::vector<double>> channels;
  double sample_rate_hz = 100.0;    // rate of the raw recording
  double effective_rate_hz = 100.0; // rate after downsampling
  std::optional<Label> label;
  std::optional<int> location;

  std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
  std::size_t n_channels() const { return channels.size(); }
  void validate() const;
};

// Rolling-deviation onset detector settings, in downsampled samples.
struct OnsetConfig {
  std::size_t window = 20;
  double factor = 5.0;
  std::size_t baseline_len = 50;

  void validate() const;
};

struct FeatureVector {
  std::vector<double> values;
  std::size_t n_channels = 0;
  std::size_t k = 0;

  std::size_t dim() const { return values.size(); }
};

// Per-dimension mean and population standard deviation of training features.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;

  std::size_t dim() const { return mean.size(); }
};

// Standard deviations below this floor are treated as zero: the normalized
// value of such a dimension is 0.
inline constexpr double kStdFloor = 1e-12;

// Non-overlapping window means; the trailing partial window is dropped.
Series downsample(const RawSeries& series, std::size_t window);

// Per-sample mean over channels.
std::vector<double> channel_mean(const Series& series);

// Population standard deviation of values[t - window + 1 .. t].
double rolling_std(std::span<const double> values, std::size_t t, std::size_t window);

// Smallest t whose trailing-window deviation of the channel-mean trace exceeds
// factor times the deviation of the first baseline_len samples.
std::optional<std::size_t> detect_onset(const Series& series, const OnsetConfig& cfg);

// Samples [onset, onset + k) of every channel minus that channel's pre-onset
// mean, flattened channel-major. With onset == 0 the first sample is used as
// the baseline.
FeatureVector raw_prefix_features(const Series& series, std::size_t onset, std::size_t k);

// raw_prefix_features followed by z-normalization with `stats`.
FeatureVector extract_prefix_features(const Series& series, std::size_t onset, std::size_t k,
                                      const NormStats& stats);

void normalize_in_place(std::span<double> values, const NormStats& stats);

NormStats fit_norm_stats(std::span<const FeatureVector> vectors);
NormStats fit_norm_stats(const Matrix& rows);

}  // namespace forefront::signal
