#pragma once

// Item memories, feature quantization and the two encoders (record-based and
// N-gram/local-hashing) that map a feature vector to one hypervector.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "enhdc/hypervector.hpp"

namespace enhdc {

using FeatureVector = std::vector<float>;

enum class EncoderKind : std::uint8_t { Record = 0, NGram = 1 };

[[nodiscard]] std::string_view to_string(EncoderKind kind) noexcept;
[[nodiscard]] EncoderKind encoder_kind_from_string(std::string_view name);

// Maps reals in [min, max] onto levels 0 .. levels-1 by rounding
// (v - min) / (max - min) * (levels - 1). Values outside the range clamp.
// A global quantizer has one range shared by every feature; a per-feature
// quantizer has one range per feature. A per-feature range may be degenerate
// (min == max): values at or below it map to 0, values above to levels-1.
class Quantizer {
 public:
  struct Range {
    double min;
    double max;
    friend bool operator==(const Range&, const Range&) = default;
  };

  Quantizer(double min, double max, int levels);
  Quantizer(std::vector<Range> per_feature, int levels);

  [[nodiscard]] double min() const noexcept { return ranges_.front().min; }
  [[nodiscard]] double max() const noexcept { return ranges_.front().max; }
  [[nodiscard]] int levels() const noexcept { return levels_; }
  [[nodiscard]] bool per_feature() const noexcept { return per_feature_; }
  [[nodiscard]] std::span<const Range> ranges() const noexcept { return ranges_; }

  // `feature` selects the range of a per-feature quantizer and is ignored
  // by a global one.
  [[nodiscard]] int quantize(double value, std::size_t feature = 0) const;

  friend bool operator==(const Quantizer&, const Quantizer&) = default;

 private:
  std::vector<Range> ranges_;
  int levels_;
  bool per_feature_ = false;
};

// Global min/max over every feature of every training sample. `values` is
// the flattened training matrix. Throws on an empty set, levels < 2, or a
// degenerate (constant) range.
[[nodiscard]] Quantizer fit_quantizer(std::span<const float> values, int levels);

// Column-wise min/max of the flattened training matrix with `features`
// columns.
[[nodiscard]] Quantizer fit_per_feature_quantizer(std::span<const float> values,
                                                  std::size_t features, int levels);

// One random bipolar hypervector per quantization level.
class LevelMemory {
 public:
  LevelMemory(std::size_t levels, std::size_t dim, Seed seed);

  [[nodiscard]] std::size_t size() const noexcept { return hvs_.size(); }
  [[nodiscard]] std::size_t dim() const noexcept { return hvs_.front().dim(); }
  [[nodiscard]] const Hypervector& operator[](std::size_t level) const { return hvs_.at(level); }

 private:
  std::vector<Hypervector> hvs_;
};

// One random bipolar hypervector per feature position.
class BaseMemory {
 public:
  BaseMemory(std::size_t features, std::size_t dim, Seed seed);

  [[nodiscard]] std::size_t size() const noexcept { return hvs_.size(); }
  [[nodiscard]] std::size_t dim() const noexcept { return hvs_.front().dim(); }
  [[nodiscard]] const Hypervector& operator[](std::size_t i) const { return hvs_.at(i); }

 private:
  std::vector<Hypervector> hvs_;
};

// The local-hashing hypervector and sliding-window width of the N-gram encoder.
class ProjectionMemory {
 public:
  ProjectionMemory(Hypervector hash_hv, std::size_t window);
  ProjectionMemory(std::size_t dim, std::size_t window, Seed seed);

  [[nodiscard]] std::size_t dim() const noexcept { return hash_.dim(); }
  [[nodiscard]] std::size_t window() const noexcept { return window_; }
  [[nodiscard]] const Hypervector& hash_hv() const noexcept { return hash_; }

 private:
  Hypervector hash_;
  std::size_t window_;
};

// sum_i level_hv[quantize(f_i)] * base_hv[i]
[[nodiscard]] Hypervector encode_record(std::span<const float> features, const LevelMemory& levels,
                                        const BaseMemory& bases, const Quantizer& quantizer);

// Repeats `features` whole until at least target_dim values exist, then
// truncates to exactly target_dim.
template <typename T>
[[nodiscard]] std::vector<T> extend_features(std::span<const T> features, std::size_t target_dim) {
  if (features.empty()) {
    throw std::invalid_argument("cannot extend an empty feature vector");
  }
  if (target_dim < features.size()) {
    throw std::invalid_argument("extension target is shorter than the feature vector");
  }
  std::vector<T> out;
  out.reserve(target_dim);
  while (out.size() < target_dim) {
    const std::size_t take = std::min(features.size(), target_dim - out.size());
    out.insert(out.end(), features.begin(), features.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

// v_i = sum_{j < w} f_{i+j} * h_{i+j}, indices taken modulo D. `features`
// must already be extended to the projection dimension.
[[nodiscard]] Hypervector encode_ngram(std::span<const std::int32_t> features,
                                       const ProjectionMemory& projection);

// Encoder parameters that are fixed before training data is seen.
struct EncoderSpec {
  EncoderKind kind = EncoderKind::Record;
  std::size_t dim = 10000;
  std::size_t window = 3;
  Seed seed{};
};

// A fitted encoder: the quantizer plus the item memories of one base
// classifier. Immutable once constructed; encode() is safe to call
// concurrently.
class Encoder {
 public:
  // `features` is the input dimensionality m.
  Encoder(const EncoderSpec& spec, Quantizer quantizer, std::size_t features);

  [[nodiscard]] const EncoderSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] const Quantizer& quantizer() const noexcept { return quantizer_; }
  [[nodiscard]] std::size_t features() const noexcept { return features_; }

  [[nodiscard]] Hypervector encode(std::span<const float> features) const;

  // Largest possible |element| of an encoding.
  [[nodiscard]] std::int64_t element_bound() const noexcept;

  [[nodiscard]] const LevelMemory* level_memory() const noexcept;
  [[nodiscard]] const BaseMemory* base_memory() const noexcept;
  [[nodiscard]] const ProjectionMemory* projection_memory() const noexcept;

 private:
  EncoderSpec spec_;
  Quantizer quantizer_;
  std::size_t features_;
  std::optional<LevelMemory> levels_;
  std::optional<BaseMemory> bases_;
  std::optional<ProjectionMemory> projection_;
};

}  // namespace enhdc
