#pragma once

// Dataset ingestion: IDX (MNIST) and CSV loaders, seeded splits and an
// internal binary cache format.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "enhdc/hypervector.hpp"

namespace enhdc {

class DataError : public std::runtime_error {
 public:
  enum class Kind {
    Io,
    BadMagic,
    Truncated,
    CountMismatch,
    RaggedRow,
    NonNumeric,
    UnknownColumn,
    NonFinite,
    BadLabel,
    SpecMismatch,
  };

  DataError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// n samples x m features, row-major, with dense labels in [0, k).
struct Dataset {
  std::string name;
  std::size_t features = 0;
  std::vector<float> values;
  std::vector<std::int32_t> labels;
  // Original label text for each dense class index.
  std::vector<std::string> label_names;

  [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
  [[nodiscard]] std::size_t classes() const noexcept { return label_names.size(); }
  [[nodiscard]] std::span<const float> row(std::size_t i) const {
    return std::span<const float>(values).subspan(i * features, features);
  }

  // Throws DataError if the shape, labels or values break the invariants.
  void validate() const;
};

enum class SourceFormat { Idx, Csv };

struct DatasetSpec {
  std::string name;
  SourceFormat format = SourceFormat::Csv;
  std::size_t train_count = 0;
  std::size_t test_count = 0;
  std::size_t classes = 0;
  std::size_t features = 0;  // 0 when it depends on column selection
};

// Evaluation datasets with their sample counts: mnist, cardio, har, isolet.
[[nodiscard]] const std::vector<DatasetSpec>& known_datasets();
[[nodiscard]] std::optional<DatasetSpec> find_dataset_spec(const std::string& name);

// Throws DataError::SpecMismatch when the train/test pair disagrees with spec.
void check_against_spec(const DatasetSpec& spec, const Dataset& train, const Dataset& test);

// Reads an IDX image file (magic 0x00000803) and label file (0x00000801).
// Pixels are flattened row-major into m = rows * cols features in [0, 255].
[[nodiscard]] Dataset load_idx(const std::filesystem::path& images,
                               const std::filesystem::path& labels);

struct CsvOptions {
  // Column name (when header is true) or zero-based index.
  std::string label_column;
  bool header = true;
  char delimiter = ',';
  // Additional columns to ignore, by name or index.
  std::vector<std::string> drop_columns;
};

// Parses an RFC-4180-style CSV. Every remaining column becomes a real
// feature; labels are remapped to dense indices (numeric order when every
// label parses as a number, lexicographic otherwise).
[[nodiscard]] Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options);

// Like load_csv, but maps labels through an existing label list so that a
// separately shipped test file shares the training file's class indices.
[[nodiscard]] Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options,
                               const std::vector<std::string>& label_names);

[[nodiscard]] Dataset subset(const Dataset& data, std::span<const std::size_t> indices);

// Seeded shuffle, then the first train_count samples form the training set
// and the next test_count the test set.
[[nodiscard]] std::pair<Dataset, Dataset> split(const Dataset& data, std::size_t train_count,
                                                std::size_t test_count, Seed seed);

// Per-feature z-scoring fitted on `train` and applied to both sets. Constant
// features are centred but not scaled.
void standardize(Dataset& train, Dataset& test);

// Binary cache: "EHDS", u32 version, u64 n, u64 m, u64 k, n*m f32, n i32
// labels, then the dataset name and k label names as u32-length-prefixed
// strings. All integers little-endian.
void save_cache(const Dataset& data, const std::filesystem::path& path);
[[nodiscard]] Dataset load_cache(const std::filesystem::path& path);

}  // namespace enhdc
