#pragma once

// Run and sweep configuration files.
//
// Both are INI-style: `[section]` headers and `key = value` lines, `;` or `#`
// comments. Unknown sections and keys are rejected. See README.md for the
// full schema.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "enhdc/dataset.hpp"
#include "enhdc/ensemble.hpp"

namespace enhdc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DataFormat { Idx, Csv, Cache };

struct DataConfig {
  std::string name;
  DataFormat format = DataFormat::Idx;
  // IDX sources.
  std::filesystem::path train_images;
  std::filesystem::path train_labels;
  std::filesystem::path test_images;
  std::filesystem::path test_labels;
  // CSV / cache sources: one file to split, or a pre-split pair.
  std::filesystem::path path;
  std::filesystem::path train_path;
  std::filesystem::path test_path;
  CsvOptions csv;
  std::optional<std::size_t> train_count;
  std::optional<std::size_t> test_count;
  // Use pre-split files as shipped instead of the published sample counts.
  bool canonical_split = false;
  bool standardize = false;
};

enum class MemberPreset { Uniform, Diverse };

struct EnsembleSettings {
  std::size_t members = 8;
  MemberPreset preset = MemberPreset::Uniform;
  // Uniform uses the first entry of each axis.
  DiversityAxes axes{{EncoderKind::Record}, {10000}, {DataWidth::Int8}};
  // levels, window, retrain_epochs and shuffle_retrain apply to every member.
  BaseClassifierConfig base;
  VotingRule voting = VotingRule::Hard;
  bool retrain = true;

  [[nodiscard]] EnsembleConfig ensemble_config(Seed seed) const;
};

struct OutputConfig {
  std::filesystem::path model;
  std::filesystem::path report;
  // Optional dataset cache of the evaluated test split.
  std::filesystem::path test_cache;
  bool votes = false;
  bool timing = false;
};

struct RunConfig {
  std::string name = "run";
  Seed seed{1};
  DataConfig data;
  EnsembleSettings ensemble;
  OutputConfig output;

  [[nodiscard]] EnsembleConfig ensemble_config() const { return ensemble.ensemble_config(seed); }
  [[nodiscard]] nlohmann::ordered_json to_json() const;
};

[[nodiscard]] RunConfig parse_run_config(const std::string& text);
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);

struct SweepConfig {
  std::string name = "sweep";
  Seed seed{1};
  // Each repeat r runs every cell with seed derive_seed(seed, r); accuracies
  // are averaged over repeats.
  std::size_t repeats = 1;
  std::vector<DataConfig> datasets;
  MemberPreset preset = MemberPreset::Uniform;
  std::vector<std::size_t> dims{10000};
  std::vector<DataWidth> widths{DataWidth::Int8};
  std::vector<EncoderKind> encoders{EncoderKind::Record};
  std::vector<std::size_t> sizes{1};
  std::vector<VotingRule> votings{VotingRule::Hard};
  BaseClassifierConfig base;
  bool retrain = true;
  std::filesystem::path csv;
};

[[nodiscard]] SweepConfig parse_sweep_config(const std::string& text);
[[nodiscard]] SweepConfig load_sweep_config(const std::filesystem::path& path);

struct TrainTestData {
  Dataset train;
  Dataset test;
};

// ENHDC_DATA_DIR when set, otherwise the current directory.
[[nodiscard]] std::filesystem::path default_data_root();

// Loads and splits a dataset. Relative paths resolve against `data_root`.
// With separate train/test sources each is shuffled (seeded) and truncated
// to its count, unless canonical_split keeps the files as shipped. A single
// source is split with split(). Counts default to the published ones for the
// known datasets, and a known dataset loaded with default counts is checked
// against its DatasetSpec.
[[nodiscard]] TrainTestData load_data(const DataConfig& config, Seed seed,
                                      const std::filesystem::path& data_root);

}  // namespace enhdc
