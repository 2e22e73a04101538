#pragma once

// Synthetic gas-plume recordings and CSV ingestion of real ones.
//
// Each synthetic series is
//   baseline[ch] + A[c][ch] * (1 - exp(-(t - t_rel - t0[c][ch]) / tau[c][ch])) * locscale(loc)
//                + AR(1) noise
// where the response term is zero before t_rel + t0, and A and tau carry a
// per-recording log-normal jitter. Class signatures are
// drawn once from the seed; every (class, location, replicate) item draws its
// own release time, baselines and noise from a stream derived from
// (seed, class, location, replicate), so items can be generated independently.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "forefront/signal.hpp"

namespace forefront::datagen {

struct GenConfig {
  int n_classes = 10;
  int n_channels = 8;
  int n_locations = 45;
  int series_per_class_location = 1;
  double duration_s = 180.0;
  double rate_hz = 100.0;
  double noise_ar = 0.9;         // AR(1) coefficient, in [0, 1)
  double noise_amplitude = 0.03; // stationary std of the AR(1) process
  // Log-normal sd of per-recording, per-channel gain and time-constant
  // factors. Zero together with noise_amplitude gives noiseless data.
  double response_jitter = 0.2;
  std::uint64_t seed = 7;

  void validate() const;
};

struct ClassSignature {
  // Indexed [class][channel].
  std::vector<std::vector<double>> amplitude;
  std::vector<std::vector<double>> tau_s;
  std::vector<std::vector<double>> t0_s;
};

struct Dataset {
  std::vector<signal::RawSeries> items;
  std::vector<std::string> class_names;

  // Every item labeled, equal channel counts, at least two classes present.
  void validate() const;
};

// The ten analytes of the wind-tunnel set; generated datasets with more than
// ten classes fall back to "class_<i>" names.
std::vector<std::string> default_class_names(int n_classes);

ClassSignature draw_signatures(const GenConfig& cfg);

// Amplitude attenuation in (0, 1], decreasing with the location index.
double location_scale(int location, int n_locations);

signal::RawSeries generate_series(const GenConfig& cfg, const ClassSignature& sig, int label,
                                  int location, int replicate);

Dataset generate_dataset(const GenConfig& cfg);

// Same items as generate_dataset, downsampled one at a time so the raw
// 100 Hz data never has to be held in memory as a whole.
std::vector<signal::Series> generate_downsampled(const GenConfig& cfg, std::size_t window);

std::vector<signal::Series> downsample_all(const Dataset& dataset, std::size_t window);

// Manifest layout:
//   # forefront-manifest v1
//   # channels=<n>
//   # rate_hz=<hz>
//   # classes=<name0>;<name1>;...
//   relative_path,label,location
//   series_00000.csv,<class name>,<location or empty>
// Series files: header `t,ch0,...,ch{n-1}`, one row per sample, LF endings.
Dataset load_csv_dataset(const std::filesystem::path& manifest_path);

std::filesystem::path write_csv_dataset(const Dataset& dataset, const std::filesystem::path& dir);

// generate_dataset + write_csv_dataset, one series in memory at a time.
std::filesystem::path write_generated_dataset(const GenConfig& cfg,
                                              const std::filesystem::path& dir);

// Single series file in the format above; the channel count is taken from the
// header.
signal::RawSeries load_series_csv(const std::filesystem::path& path, double rate_hz);

}  // namespace forefront::datagen
