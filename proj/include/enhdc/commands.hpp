#pragma once

// The train, evaluate, sweep and size commands. Each returns a process exit
// code: 0 success, 1 internal error, 2 user or configuration error.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "enhdc/ensemble.hpp"

namespace enhdc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUser = 2;

inline constexpr const char* kReportSchema = "enhdc-report/1";
// First line of a sweep CSV, ahead of the column header.
inline constexpr const char* kSweepSchema = "# enhdc-sweep/1";
inline constexpr const char* kSweepHeader =
    "dataset,dim,width,encoder,ensemble_size,voting,accuracy,mean_member_accuracy,size_bits,"
    "repeats,status";

struct TrainOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<VotingRule> voting;
  std::optional<int> retrain_epochs;
  // Directory receiving model.ehdc and report.json instead of the paths in
  // the config's [output] section.
  std::optional<std::filesystem::path> out_dir;
  bool votes = false;
  bool timing = false;
};

struct EvaluateOptions {
  std::filesystem::path model;
  // Either a dataset file (cache, IDX images, or CSV) ...
  std::optional<std::filesystem::path> dataset;
  std::optional<std::filesystem::path> labels;        // IDX label file
  std::optional<std::string> label_column;            // CSV label column
  // ... or a run config whose test split is evaluated.
  std::optional<std::filesystem::path> config;
  std::optional<VotingRule> voting;
  std::optional<std::filesystem::path> out;
  bool votes = false;
};

struct SweepOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err);
int cmd_evaluate(const EvaluateOptions& options, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err);
int cmd_size(std::uint64_t width_bits, std::uint64_t dim, std::uint64_t classes,
             std::uint64_t members, std::ostream& out, std::ostream& err);

// "800 Kb"-style rendering of a size in kilobits.
[[nodiscard]] std::string format_kilobits(const ModelSize& size);

// Reads a JSON report written by train or evaluate.
[[nodiscard]] nlohmann::ordered_json read_report(const std::filesystem::path& path);

}  // namespace enhdc
