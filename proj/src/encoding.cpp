#include "enhdc/encoding.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "enhdc/random.hpp"

namespace enhdc {

namespace {

// Stream-id namespaces for the item memories of one encoder seed.
constexpr std::uint64_t kLevelStreams = 1ULL << 40;
constexpr std::uint64_t kBaseStreams = 2ULL << 40;
constexpr std::uint64_t kHashStream = 3ULL << 40;

}  // namespace

std::string_view to_string(EncoderKind kind) noexcept {
  return kind == EncoderKind::Record ? "record" : "ngram";
}

EncoderKind encoder_kind_from_string(std::string_view name) {
  if (name == "record") {
    return EncoderKind::Record;
  }
  if (name == "ngram") {
    return EncoderKind::NGram;
  }
  throw std::invalid_argument("unknown encoder '" + std::string(name) +
                              "' (expected record or ngram)");
}

Quantizer::Quantizer(double min, double max, int levels)
    : ranges_{Range{min, max}}, levels_(levels) {
  if (!std::isfinite(min) || !std::isfinite(max) || !(min < max)) {
    throw std::invalid_argument("quantizer range must satisfy min < max");
  }
  if (levels < 2) {
    throw std::invalid_argument("quantizer needs at least 2 levels");
  }
}

Quantizer::Quantizer(std::vector<Range> per_feature, int levels)
    : ranges_(std::move(per_feature)), levels_(levels), per_feature_(true) {
  if (ranges_.empty()) {
    throw std::invalid_argument("per-feature quantizer needs at least one range");
  }
  for (const auto& r : ranges_) {
    if (!std::isfinite(r.min) || !std::isfinite(r.max) || r.min > r.max) {
      throw std::invalid_argument("quantizer range must satisfy min <= max");
    }
  }
  if (levels < 2) {
    throw std::invalid_argument("quantizer needs at least 2 levels");
  }
}

int Quantizer::quantize(double value, std::size_t feature) const {
  if (std::isnan(value)) {
    throw std::invalid_argument("cannot quantize NaN");
  }
  const Range& r = per_feature_ ? ranges_.at(feature) : ranges_.front();
  if (r.min == r.max) {
    return value > r.max ? levels_ - 1 : 0;
  }
  const double scaled = (value - r.min) / (r.max - r.min) * (levels_ - 1);
  const double level = std::floor(scaled + 0.5);
  if (level <= 0.0) {
    return 0;
  }
  if (level >= levels_ - 1) {
    return levels_ - 1;
  }
  return static_cast<int>(level);
}

Quantizer fit_quantizer(std::span<const float> values, int levels) {
  if (values.empty()) {
    throw std::invalid_argument("cannot fit a quantizer on an empty training set");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const float v : values) {
    lo = std::min<double>(lo, v);
    hi = std::max<double>(hi, v);
  }
  if (!(lo < hi)) {
    throw std::invalid_argument("degenerate feature range: every training value equals " +
                                std::to_string(lo));
  }
  return Quantizer(lo, hi, levels);
}

Quantizer fit_per_feature_quantizer(std::span<const float> values, std::size_t features,
                                    int levels) {
  if (values.empty() || features == 0) {
    throw std::invalid_argument("cannot fit a quantizer on an empty training set");
  }
  if (values.size() % features != 0) {
    throw std::invalid_argument("training matrix size is not a multiple of the feature count");
  }
  std::vector<Quantizer::Range> ranges(features, {std::numeric_limits<double>::infinity(),
                                                  -std::numeric_limits<double>::infinity()});
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto& r = ranges[i % features];
    r.min = std::min<double>(r.min, values[i]);
    r.max = std::max<double>(r.max, values[i]);
  }
  return Quantizer(std::move(ranges), levels);
}

LevelMemory::LevelMemory(std::size_t levels, std::size_t dim, Seed seed) {
  if (levels < 2) {
    throw std::invalid_argument("level memory needs at least 2 levels");
  }
  hvs_.reserve(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    hvs_.push_back(random_bipolar(dim, seed, kLevelStreams + l));
  }
}

BaseMemory::BaseMemory(std::size_t features, std::size_t dim, Seed seed) {
  if (features == 0) {
    throw std::invalid_argument("base memory needs at least one feature");
  }
  hvs_.reserve(features);
  for (std::size_t i = 0; i < features; ++i) {
    hvs_.push_back(random_bipolar(dim, seed, kBaseStreams + i));
  }
}

ProjectionMemory::ProjectionMemory(Hypervector hash_hv, std::size_t window)
    : hash_(std::move(hash_hv)), window_(window) {
  if (window_ == 0 || window_ > hash_.dim()) {
    throw std::invalid_argument("n-gram window must lie in [1, D], got " + std::to_string(window_));
  }
}

ProjectionMemory::ProjectionMemory(std::size_t dim, std::size_t window, Seed seed)
    : ProjectionMemory(random_bipolar(dim, seed, kHashStream), window) {}

Hypervector encode_record(std::span<const float> features, const LevelMemory& levels,
                          const BaseMemory& bases, const Quantizer& quantizer) {
  if (features.size() != bases.size()) {
    throw DimensionError("record encoding: " + std::to_string(features.size()) +
                         " features but " + std::to_string(bases.size()) + " base hypervectors");
  }
  if (levels.dim() != bases.dim()) {
    throw DimensionError(levels.dim(), bases.dim());
  }
  if (static_cast<std::size_t>(quantizer.levels()) != levels.size()) {
    throw std::invalid_argument("quantizer and level memory disagree on the level count");
  }
  const std::size_t dim = bases.dim();
  Hypervector out(dim);
  std::int32_t* acc = out.elements().data();
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::int32_t* level = levels[static_cast<std::size_t>(quantizer.quantize(features[i], i))]
                                    .elements()
                                    .data();
    const std::int32_t* base = bases[i].elements().data();
    for (std::size_t j = 0; j < dim; ++j) {
      acc[j] += level[j] * base[j];
    }
  }
  return out;
}

Hypervector encode_ngram(std::span<const std::int32_t> features,
                         const ProjectionMemory& projection) {
  const std::size_t dim = projection.dim();
  if (features.size() != dim) {
    throw DimensionError("n-gram encoding: feature vector of length " +
                         std::to_string(features.size()) + " must be extended to D = " +
                         std::to_string(dim));
  }
  const std::size_t window = projection.window();
  const auto hash = projection.hash_hv().elements();

  // Products f_j * h_j are shared by the w windows that cover j.
  std::vector<std::int32_t> products(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    products[j] = features[j] * hash[j];
  }
  Hypervector out(dim);
  auto el = out.elements();
  std::int64_t running = 0;
  for (std::size_t j = 0; j < window; ++j) {
    running += products[j];
  }
  for (std::size_t i = 0; i < dim; ++i) {
    el[i] = static_cast<std::int32_t>(running);
    running -= products[i];
    running += products[(i + window) % dim];
  }
  return out;
}

Encoder::Encoder(const EncoderSpec& spec, Quantizer quantizer, std::size_t features)
    : spec_(spec), quantizer_(std::move(quantizer)), features_(features) {
  if (spec_.dim == 0) {
    throw DimensionError("encoder dimension must be positive");
  }
  if (features_ == 0) {
    throw std::invalid_argument("encoder needs at least one input feature");
  }
  if (quantizer_.per_feature() && quantizer_.ranges().size() != features_) {
    throw std::invalid_argument("per-feature quantizer has " +
                                std::to_string(quantizer_.ranges().size()) + " ranges for " +
                                std::to_string(features_) + " features");
  }
  switch (spec_.kind) {
    case EncoderKind::Record:
      levels_.emplace(static_cast<std::size_t>(quantizer_.levels()), spec_.dim, spec_.seed);
      bases_.emplace(features_, spec_.dim, spec_.seed);
      break;
    case EncoderKind::NGram:
      if (features_ > spec_.dim) {
        throw std::invalid_argument("n-gram encoding needs D >= feature count (" +
                                    std::to_string(features_) + " > " +
                                    std::to_string(spec_.dim) + ")");
      }
      projection_.emplace(spec_.dim, spec_.window, spec_.seed);
      break;
  }
}

Hypervector Encoder::encode(std::span<const float> features) const {
  if (features.size() != features_) {
    throw DimensionError("encoder expects " + std::to_string(features_) + " features, got " +
                         std::to_string(features.size()));
  }
  if (spec_.kind == EncoderKind::Record) {
    return encode_record(features, *levels_, *bases_, quantizer_);
  }
  // N-gram: features enter as their quantized level indices.
  std::vector<std::int32_t> quantized(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    quantized[i] = quantizer_.quantize(features[i], i);
  }
  const auto extended = extend_features<std::int32_t>(quantized, spec_.dim);
  return encode_ngram(extended, *projection_);
}

std::int64_t Encoder::element_bound() const noexcept {
  if (spec_.kind == EncoderKind::Record) {
    return static_cast<std::int64_t>(features_);
  }
  return static_cast<std::int64_t>(spec_.window) * (quantizer_.levels() - 1);
}

const LevelMemory* Encoder::level_memory() const noexcept {
  return levels_ ? &*levels_ : nullptr;
}

const BaseMemory* Encoder::base_memory() const noexcept { return bases_ ? &*bases_ : nullptr; }

const ProjectionMemory* Encoder::projection_memory() const noexcept {
  return projection_ ? &*projection_ : nullptr;
}

}  // namespace enhdc
