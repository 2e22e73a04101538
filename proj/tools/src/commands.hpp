#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace forefront::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kIoError = 3,
  kTrainingError = 4,
  kDataError = 5,
};

// gen: write the synthetic dataset under <out>/data; prints the manifest path.
int cmd_gen(const RunConfig& cfg, std::ostream& out, std::ostream& err);
// train: fit the cascade on the manifest (or the synthetic set) and save it.
int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err);
// eval: cross-validate both methods and write the report CSVs into <out>.
int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err);
// stream: replay one series CSV through a saved model, one line per stage.
int cmd_stream(const RunConfig& cfg, const std::filesystem::path& series_csv, std::ostream& out,
               std::ostream& err);
// report: rebuild table1 from <out>/samples.csv and the trace files.
int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Full command line: `forefront <command> [--config f] [--seed n] [--out dir] ...`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// File names written by cmd_eval.
inline constexpr const char* kTableFile = "table1.csv";
inline constexpr const char* kCoverageFile = "coverage_accuracy.csv";
inline constexpr const char* kSamplesFile = "samples.csv";
inline constexpr const char* kPairsFile = "pairs.csv";
std::string trace_file(const std::string& method);
std::string location_file(const std::string& method);

}  // namespace forefront::cli
