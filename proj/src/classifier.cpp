#include "enhdc/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "enhdc/random.hpp"

namespace enhdc {

namespace {

double cosine_from_parts(std::int64_t dot_value, std::int64_t query_norm2, std::int64_t class_norm2) {
  const double c = static_cast<double>(dot_value) /
                   (std::sqrt(static_cast<double>(query_norm2)) *
                    std::sqrt(static_cast<double>(class_norm2)));
  return std::clamp(c, -1.0, 1.0);
}

__extension__ typedef unsigned __int128 u128;

// a * b for a < 2^128, b < 2^64, as a 192-bit (high, low) pair.
struct Wide {
  u128 high;
  std::uint64_t low;
  friend auto operator<=>(const Wide&, const Wide&) = default;
};

Wide mul(u128 a, std::uint64_t b) {
  const u128 lo = static_cast<u128>(static_cast<std::uint64_t>(a)) * b;
  const u128 hi = static_cast<u128>(static_cast<std::uint64_t>(a >> 64)) * b;
  return {hi + (lo >> 64), static_cast<std::uint64_t>(lo)};
}

// Exact three-way comparison of dot_a / sqrt(norm_a) with dot_b / sqrt(norm_b),
// i.e. of two cosines against the same query.
int compare_cosines(std::int64_t dot_a, std::int64_t norm_a, std::int64_t dot_b, std::int64_t norm_b) {
  const int sign_a = (dot_a > 0) - (dot_a < 0);
  const int sign_b = (dot_b > 0) - (dot_b < 0);
  if (sign_a != sign_b) {
    return sign_a < sign_b ? -1 : 1;
  }
  if (sign_a == 0) {
    return 0;
  }
  const auto mag = [](std::int64_t v) { return static_cast<u128>(v < 0 ? -static_cast<u128>(v) : v); };
  const auto lhs = mul(mag(dot_a) * mag(dot_a), static_cast<std::uint64_t>(norm_b));
  const auto rhs = mul(mag(dot_b) * mag(dot_b), static_cast<std::uint64_t>(norm_a));
  const int order = lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
  return sign_a > 0 ? order : -order;
}

// argmax of the cosines with near-equal candidates settled exactly, so
// mathematically tied classes resolve to the lowest index.
std::size_t best_class(std::span<const double> sims, std::span<const std::int64_t> dots,
                       std::span<const std::int64_t> norms) {
  constexpr double kNear = 1e-12;
  std::size_t best = 0;
  for (std::size_t c = 1; c < sims.size(); ++c) {
    if (std::abs(sims[c] - sims[best]) <= kNear) {
      if (compare_cosines(dots[c], norms[c], dots[best], norms[best]) > 0) {
        best = c;
      }
    } else if (sims[c] > sims[best]) {
      best = c;
    }
  }
  return best;
}

// Encodings of a whole dataset, packed as int16 when the encoder's element
// bound allows it.
class EncodedSet {
 public:
  EncodedSet(const Encoder& encoder, const Dataset& data)
      : dim_(encoder.spec().dim),
        narrow_(encoder.element_bound() <= std::numeric_limits<std::int16_t>::max()) {
    if (narrow_) {
      narrow_values_.resize(data.size() * dim_);
    } else {
      wide_values_.resize(data.size() * dim_);
    }
    norms_.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Hypervector hv = encoder.encode(data.row(i));
      const auto el = hv.elements();
      if (narrow_) {
        std::copy(el.begin(), el.end(), narrow_values_.begin() + static_cast<std::ptrdiff_t>(i * dim_));
      } else {
        std::copy(el.begin(), el.end(), wide_values_.begin() + static_cast<std::ptrdiff_t>(i * dim_));
      }
      norms_[i] = squared_norm(el);
    }
  }

  [[nodiscard]] std::int64_t norm2(std::size_t i) const { return norms_[i]; }

  // f(span<const T>) for the i-th encoding, T being int16_t or int32_t.
  template <typename F>
  decltype(auto) visit(std::size_t i, F&& f) const {
    if (narrow_) {
      return f(std::span<const std::int16_t>(narrow_values_).subspan(i * dim_, dim_));
    }
    return f(std::span<const std::int32_t>(wide_values_).subspan(i * dim_, dim_));
  }

 private:
  std::size_t dim_;
  bool narrow_;
  std::vector<std::int16_t> narrow_values_;
  std::vector<std::int32_t> wide_values_;
  std::vector<std::int64_t> norms_;
};

template <typename T>
std::int64_t mixed_dot(std::span<const T> q, std::span<const std::int32_t> a) {
  std::int64_t acc = 0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    acc += static_cast<std::int64_t>(q[j]) * a[j];
  }
  return acc;
}

template <typename T>
void accumulate(std::span<std::int32_t> dst, std::span<const T> src, std::int32_t sign) {
  for (std::size_t j = 0; j < dst.size(); ++j) {
    dst[j] += sign * static_cast<std::int32_t>(src[j]);
  }
}

}  // namespace

void BaseClassifierConfig::validate() const {
  if (dim == 0) {
    throw std::invalid_argument("dimension must be positive");
  }
  if (levels < 2) {
    throw std::invalid_argument("levels must be at least 2");
  }
  if (window == 0) {
    throw std::invalid_argument("n-gram window must be at least 1");
  }
  if (window > dim) {
    throw std::invalid_argument("n-gram window exceeds the dimension");
  }
  if (retrain_epochs < 0) {
    throw std::invalid_argument("retrain epochs must be non-negative");
  }
}

AssociativeMemory::AssociativeMemory(std::size_t classes, std::size_t dim) {
  if (classes == 0) {
    throw std::invalid_argument("associative memory needs at least one class");
  }
  class_hvs_.assign(classes, Hypervector(dim));
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("argmax of an empty sequence");
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < values.size(); ++c) {
    if (values[c] > values[best]) {
      best = c;
    }
  }
  return best;
}

Prediction predict(const AssociativeMemory& memory, const Hypervector& query) {
  if (query.dim() != memory.dim()) {
    throw DimensionError(query.dim(), memory.dim());
  }
  const auto qn = squared_norm(query.elements());
  const std::size_t k = memory.classes();
  Prediction p;
  p.similarities.resize(k);
  std::vector<std::int64_t> dots(k, 0);
  std::vector<std::int64_t> norms(k);
  for (std::size_t c = 0; c < k; ++c) {
    norms[c] = squared_norm(memory[c].elements());
    if (norms[c] == 0) {
      throw ZeroNormError();
    }
    // A zero query is equally (dis)similar to every class.
    if (qn != 0) {
      dots[c] = dot(query.elements(), memory[c].elements());
      p.similarities[c] = cosine_from_parts(dots[c], qn, norms[c]);
    }
  }
  p.label = best_class(p.similarities, dots, norms);
  return p;
}

AssociativeMemory clip_to_width(AssociativeMemory memory, DataWidth width) {
  const auto lo = width_min(width);
  const auto hi = width_max(width);
  for (std::size_t c = 0; c < memory.classes(); ++c) {
    for (auto& v : memory[c].elements()) {
      v = std::clamp(v, lo, hi);
    }
  }
  return memory;
}

AssociativeMemory rescale_to_width(AssociativeMemory memory, DataWidth width) {
  const auto hi = static_cast<std::int64_t>(width_max(width));
  for (std::size_t c = 0; c < memory.classes(); ++c) {
    auto elements = memory[c].elements();
    std::int64_t peak = 0;
    for (const auto v : elements) {
      peak = std::max(peak, std::abs(static_cast<std::int64_t>(v)));
    }
    if (peak <= hi) {
      continue;
    }
    for (auto& v : elements) {
      // round(v * hi / peak), half away from zero, in exact integer arithmetic
      const std::int64_t num = static_cast<std::int64_t>(v) * hi;
      const std::int64_t mag = (std::abs(num) * 2 + peak) / (2 * peak);
      v = static_cast<std::int32_t>(num < 0 ? -mag : mag);
    }
  }
  return clip_to_width(std::move(memory), width);
}

AssociativeMemory store_at_width(AssociativeMemory memory, DataWidth width, StorageMode mode) {
  return mode == StorageMode::Rescale ? rescale_to_width(std::move(memory), width)
                                      : clip_to_width(std::move(memory), width);
}

std::string to_string(StorageMode mode) {
  return mode == StorageMode::Rescale ? "rescale" : "saturate";
}

StorageMode storage_mode_from_string(const std::string& text) {
  if (text == "rescale") return StorageMode::Rescale;
  if (text == "saturate") return StorageMode::Saturate;
  throw std::invalid_argument("unknown storage mode '" + text + "' (expected saturate or rescale)");
}

BaseClassifier::BaseClassifier(BaseClassifierConfig config, Quantizer quantizer,
                               std::size_t features, AssociativeMemory memory,
                               std::vector<std::string> label_names)
    : config_(config),
      encoder_((config.validate(), config.encoder_spec()), quantizer, features),
      memory_(std::move(memory)),
      label_names_(std::move(label_names)) {
  if (memory_.dim() != config_.dim) {
    throw DimensionError(memory_.dim(), config_.dim);
  }
  if (encoder_.quantizer().per_feature() != config_.per_feature_quantizer) {
    throw std::invalid_argument("quantizer kind differs from the configuration");
  }
  if (encoder_.quantizer().levels() != config_.levels) {
    throw std::invalid_argument("quantizer level count differs from the configuration");
  }
  if (!label_names_.empty() && label_names_.size() != memory_.classes()) {
    throw std::invalid_argument("label name count differs from the class count");
  }
}

Prediction BaseClassifier::infer(std::span<const float> features) const {
  return predict(memory_, encoder_.encode(features));
}

void BaseClassifier::finalize() {
  if (!finalized_) {
    memory_ = store_at_width(std::move(memory_), config_.width, config_.storage);
    finalized_ = true;
  }
}

BaseClassifier train(const Dataset& data, const BaseClassifierConfig& config) {
  config.validate();
  data.validate();
  if (data.size() == 0) {
    throw std::invalid_argument("cannot train on an empty dataset");
  }
  Quantizer quantizer = config.per_feature_quantizer
                            ? fit_per_feature_quantizer(data.values, data.features, config.levels)
                            : fit_quantizer(data.values, config.levels);
  BaseClassifier model(config, quantizer, data.features,
                       AssociativeMemory(data.classes(), config.dim), data.label_names);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto label = static_cast<std::size_t>(data.labels[i]);
    if (label >= model.classes()) {
      throw std::out_of_range("label " + std::to_string(label) + " outside [0, " +
                              std::to_string(model.classes()) + ")");
    }
    model.memory()[label] += model.encode(data.row(i));
  }
  return model;
}

std::optional<std::size_t> retrain_step(AssociativeMemory& memory, const Hypervector& query,
                                        std::size_t true_label) {
  if (true_label >= memory.classes()) {
    throw std::out_of_range("label outside the class range");
  }
  if (query.is_zero()) {
    return std::nullopt;
  }
  const Prediction p = predict(memory, query);
  if (p.label == true_label) {
    return std::nullopt;
  }
  memory[p.label] -= query;
  memory[true_label] += query;
  return p.label;
}

RetrainStats retrain(BaseClassifier& model, const Dataset& data, int epochs) {
  if (epochs < 0) {
    throw std::invalid_argument("retrain epochs must be non-negative");
  }
  if (model.finalized()) {
    throw std::logic_error("cannot retrain a finalized (width-clipped) model");
  }
  RetrainStats stats;
  if (epochs == 0 || data.size() == 0) {
    return stats;
  }
  data.validate();
  const EncodedSet encoded(model.encoder(), data);
  AssociativeMemory& memory = model.memory();
  const std::size_t k = memory.classes();

  // Mirrors retrain_step with cached class norms; the similarity arithmetic
  // is identical so both paths pick the same argmax.
  std::vector<std::int64_t> class_norm2(k);
  for (std::size_t c = 0; c < k; ++c) {
    class_norm2[c] = squared_norm(memory[c].elements());
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(model.config().seed, 0x5EED5EEDULL);
  std::vector<double> sims(k);
  std::vector<std::int64_t> dots(k);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    if (model.config().shuffle_retrain) {
      shuffle(std::span<std::size_t>(order), rng);
    }
    std::size_t updates = 0;
    for (const std::size_t i : order) {
      const auto qn = encoded.norm2(i);
      if (qn == 0) {
        continue;
      }
      const auto truth = static_cast<std::size_t>(data.labels[i]);
      for (std::size_t c = 0; c < k; ++c) {
        if (class_norm2[c] == 0) {
          throw ZeroNormError();
        }
        dots[c] = encoded.visit(i, [&](auto q) { return mixed_dot(q, memory[c].elements()); });
        sims[c] = cosine_from_parts(dots[c], qn, class_norm2[c]);
      }
      const std::size_t predicted = best_class(sims, dots, class_norm2);
      if (predicted == truth) {
        continue;
      }
      encoded.visit(i, [&](auto q) {
        accumulate(memory[predicted].elements(), q, -1);
        accumulate(memory[truth].elements(), q, +1);
      });
      class_norm2[predicted] = squared_norm(memory[predicted].elements());
      class_norm2[truth] = squared_norm(memory[truth].elements());
      ++updates;
    }
    stats.updates_per_epoch.push_back(updates);
    if (updates == 0) {
      break;
    }
  }
  return stats;
}

double accuracy(const BaseClassifier& model, const Dataset& data) {
  if (data.size() == 0) {
    return 0.0;
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (model.infer(data.row(i)).label == static_cast<std::size_t>(data.labels[i])) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace enhdc
