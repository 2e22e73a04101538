#pragma once

// Versioned little-endian binary bundle for a trained ForefrontModel.
//
//   magic "FFNOSE\0\0", u32 version (1)
//   u32 n_classes, then per class: u32 length + UTF-8 bytes
//   u64 n_channels, f64 effective_rate_hz, u64 n_stages, f64 stage_times[n_stages]
//   u64 onset.window, f64 onset.factor, u64 onset.baseline_len, u8 detect
//   u8 fallback (0 forced, 1 reject), u64 n_excluded
//   per stage:
//     u64 dim, f64 mean[dim], f64 std[dim], f64 pair_df
//     u64 n_rows, f64 rows[n_rows * dim]      support rows shared by both members
//     2 members: u64 id, f64 accuracy, u8 kind (0 svm, 1 knn)
//       svm: f64 C, f64 gamma, f64 tol, i32 max_passes,
//            u32 n_classes, i32 classes[], u64 n_support, u32 row[n_support],
//            u32 n_machines, per machine: u32 positive, u32 negative, f64 rho,
//                                         u32 n, u32 support[n], f64 coef[n]
//       knn: u64 k, u64 n, u32 row[n], i32 label[n]
//
// Doubles are stored bit-exact, so a loaded model predicts identically.
// Out-of-fold predictions are not stored.

#include <filesystem>
#include <iosfwd>

#include "forefront/cascade.hpp"

namespace forefront::model_io {

inline constexpr std::uint32_t kFormatVersion = 1;

void write_model(std::ostream& out, const cascade::ForefrontModel& model);
cascade::ForefrontModel read_model(std::istream& in);

void save_model(const cascade::ForefrontModel& model, const std::filesystem::path& path);
cascade::ForefrontModel load_model(const std::filesystem::path& path);

}  // namespace forefront::model_io
