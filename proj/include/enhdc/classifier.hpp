#pragma once

// A single HDC base classifier: class hypervectors accumulated from encoded
// training samples, cosine-argmax inference, error-driven retraining and
// saturation to the configured storage width.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "enhdc/dataset.hpp"
#include "enhdc/encoding.hpp"
#include "enhdc/hypervector.hpp"

namespace enhdc {

// How finalize() maps wide class hypervectors into the storage width.
// Saturate clamps each element; Rescale first scales each class by
// width_max / max|element| (rounding half away from zero) when that class
// does not fit, then clamps.
enum class StorageMode : std::uint8_t { Saturate = 0, Rescale = 1 };

[[nodiscard]] std::string to_string(StorageMode mode);
[[nodiscard]] StorageMode storage_mode_from_string(const std::string& text);

struct BaseClassifierConfig {
  std::size_t dim = 10000;
  DataWidth width = DataWidth::Int8;
  EncoderKind encoder = EncoderKind::Record;
  int levels = 32;
  std::size_t window = 3;
  Seed seed{};
  int retrain_epochs = 20;
  // Visit retraining samples in a seeded random order each epoch instead of
  // training-set order.
  bool shuffle_retrain = false;
  StorageMode storage = StorageMode::Rescale;
  // Fit one quantizer range per feature instead of a single global range.
  bool per_feature_quantizer = false;

  void validate() const;
  [[nodiscard]] EncoderSpec encoder_spec() const noexcept {
    return EncoderSpec{encoder, dim, window, seed};
  }
  friend bool operator==(const BaseClassifierConfig&, const BaseClassifierConfig&) = default;
};

class AssociativeMemory {
 public:
  AssociativeMemory(std::size_t classes, std::size_t dim);

  [[nodiscard]] std::size_t classes() const noexcept { return class_hvs_.size(); }
  [[nodiscard]] std::size_t dim() const noexcept { return class_hvs_.front().dim(); }

  [[nodiscard]] const Hypervector& operator[](std::size_t c) const { return class_hvs_.at(c); }
  Hypervector& operator[](std::size_t c) { return class_hvs_.at(c); }

  [[nodiscard]] std::span<const Hypervector> class_hvs() const noexcept { return class_hvs_; }

  friend bool operator==(const AssociativeMemory&, const AssociativeMemory&) = default;

 private:
  std::vector<Hypervector> class_hvs_;
};

struct Prediction {
  std::size_t label = 0;
  std::vector<double> similarities;
};

// Cosine similarity of `query` against every class; the highest similarity
// wins and exact ties (decided in integer arithmetic, not by rounded
// cosines) go to the lowest class index. Throws ZeroNormError for an
// untrained (all-zero) class. A zero query scores 0 against every class.
[[nodiscard]] Prediction predict(const AssociativeMemory& memory, const Hypervector& query);

// Index of the largest value; ties resolve to the lowest index.
[[nodiscard]] std::size_t argmax(std::span<const double> values);

// Saturates every element into the signed range of `width`.
[[nodiscard]] AssociativeMemory clip_to_width(AssociativeMemory memory, DataWidth width);

// Scales each class whose largest magnitude exceeds width_max(width) down to
// fit, then saturates. Classes that already fit are unchanged.
[[nodiscard]] AssociativeMemory rescale_to_width(AssociativeMemory memory, DataWidth width);

// The finalize() mapping for `mode`.
[[nodiscard]] AssociativeMemory store_at_width(AssociativeMemory memory, DataWidth width,
                                               StorageMode mode);

class BaseClassifier {
 public:
  BaseClassifier(BaseClassifierConfig config, Quantizer quantizer, std::size_t features,
                 AssociativeMemory memory, std::vector<std::string> label_names);

  [[nodiscard]] const BaseClassifierConfig& config() const noexcept { return config_; }
  [[nodiscard]] const Encoder& encoder() const noexcept { return encoder_; }
  [[nodiscard]] const AssociativeMemory& memory() const noexcept { return memory_; }
  AssociativeMemory& memory() noexcept { return memory_; }
  [[nodiscard]] const std::vector<std::string>& label_names() const noexcept {
    return label_names_;
  }
  [[nodiscard]] std::size_t classes() const noexcept { return memory_.classes(); }
  // True once the class hypervectors have been clipped to config().width.
  [[nodiscard]] bool finalized() const noexcept { return finalized_; }

  [[nodiscard]] Hypervector encode(std::span<const float> features) const {
    return encoder_.encode(features);
  }
  [[nodiscard]] Prediction infer(std::span<const float> features) const;

  // Maps the class hypervectors into the storage width. Idempotent.
  void finalize();

 private:
  BaseClassifierConfig config_;
  Encoder encoder_;
  AssociativeMemory memory_;
  std::vector<std::string> label_names_;
  bool finalized_ = false;
};

// Fits the quantizer, builds the item memories, and sums the encodings of
// each class. The memory is left in the wide accumulation domain.
[[nodiscard]] BaseClassifier train(const Dataset& data, const BaseClassifierConfig& config);

// One retraining step: if `query` is misclassified, subtract it from the
// predicted class and add it to the true class. Returns the wrong label that
// was corrected, or nullopt when the query was already right.
std::optional<std::size_t> retrain_step(AssociativeMemory& memory, const Hypervector& query,
                                        std::size_t true_label);

struct RetrainStats {
  // Number of corrective updates performed in each epoch that ran.
  std::vector<std::size_t> updates_per_epoch;
};

// Up to `epochs` passes of retrain_step over `data`; stops early after an
// epoch with no updates. Throws if epochs < 0 or the model is finalized.
RetrainStats retrain(BaseClassifier& model, const Dataset& data, int epochs);

// Fraction of samples whose prediction matches the label.
[[nodiscard]] double accuracy(const BaseClassifier& model, const Dataset& data);

}  // namespace enhdc
