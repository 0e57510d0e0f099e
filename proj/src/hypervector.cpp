#include "enhdc/hypervector.hpp"

#include <algorithm>
#include <cmath>

#include "enhdc/random.hpp"

namespace enhdc {

DimensionError::DimensionError(std::size_t lhs, std::size_t rhs)
    : std::invalid_argument("hypervector dimension mismatch: " + std::to_string(lhs) + " vs " +
                            std::to_string(rhs)) {}

DataWidth data_width_from_bits(int bits) {
  switch (bits) {
    case 8:
      return DataWidth::Int8;
    case 16:
      return DataWidth::Int16;
    default:
      throw std::invalid_argument("unsupported data width " + std::to_string(bits) +
                                  " (expected 8 or 16)");
  }
}

Hypervector::Hypervector(std::size_t dim) : elements_(dim, 0) {
  if (dim == 0) {
    throw DimensionError("hypervector dimension must be positive");
  }
}

Hypervector::Hypervector(std::vector<value_type> elements) : elements_(std::move(elements)) {
  if (elements_.empty()) {
    throw DimensionError("hypervector dimension must be positive");
  }
}

Hypervector::Hypervector(std::initializer_list<value_type> elements)
    : Hypervector(std::vector<value_type>(elements)) {}

bool Hypervector::is_bipolar() const noexcept {
  return std::all_of(elements_.begin(), elements_.end(),
                     [](value_type v) { return v == 1 || v == -1; });
}

bool Hypervector::is_zero() const noexcept {
  return std::all_of(elements_.begin(), elements_.end(), [](value_type v) { return v == 0; });
}

Hypervector& Hypervector::operator+=(const Hypervector& other) {
  if (other.dim() != dim()) {
    throw DimensionError(dim(), other.dim());
  }
  const value_type* src = other.elements_.data();
  value_type* dst = elements_.data();
  for (std::size_t i = 0, n = elements_.size(); i < n; ++i) {
    dst[i] += src[i];
  }
  return *this;
}

Hypervector& Hypervector::operator-=(const Hypervector& other) {
  if (other.dim() != dim()) {
    throw DimensionError(dim(), other.dim());
  }
  const value_type* src = other.elements_.data();
  value_type* dst = elements_.data();
  for (std::size_t i = 0, n = elements_.size(); i < n; ++i) {
    dst[i] -= src[i];
  }
  return *this;
}

Hypervector& Hypervector::operator*=(value_type scalar) noexcept {
  for (auto& v : elements_) {
    v *= scalar;
  }
  return *this;
}

Hypervector add(const Hypervector& a, const Hypervector& b) {
  Hypervector out(a);
  out += b;
  return out;
}

Hypervector multiply(const Hypervector& a, const Hypervector& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError(a.dim(), b.dim());
  }
  Hypervector out(a);
  auto dst = out.elements();
  auto src = b.elements();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] *= src[i];
  }
  return out;
}

Hypervector permute(const Hypervector& a, long long k) {
  const auto n = static_cast<long long>(a.dim());
  const auto shift = static_cast<std::size_t>(((k % n) + n) % n);
  Hypervector out(a.dim());
  auto src = a.elements();
  std::rotate_copy(src.begin(), src.end() - static_cast<std::ptrdiff_t>(shift), src.end(),
                   out.elements().begin());
  return out;
}

std::int64_t dot(std::span<const std::int32_t> a, std::span<const std::int32_t> b) {
  if (a.size() != b.size()) {
    throw DimensionError(a.size(), b.size());
  }
  std::int64_t acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<std::int64_t>(a[i]) * b[i];
  }
  return acc;
}

std::int64_t squared_norm(std::span<const std::int32_t> a) {
  std::int64_t acc = 0;
  for (const auto v : a) {
    acc += static_cast<std::int64_t>(v) * v;
  }
  return acc;
}

double cosine(const Hypervector& a, const Hypervector& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError(a.dim(), b.dim());
  }
  const auto na = squared_norm(a.elements());
  const auto nb = squared_norm(b.elements());
  if (na == 0 || nb == 0) {
    throw ZeroNormError();
  }
  const double c = static_cast<double>(dot(a.elements(), b.elements())) /
                   (std::sqrt(static_cast<double>(na)) * std::sqrt(static_cast<double>(nb)));
  return std::clamp(c, -1.0, 1.0);
}

Hypervector random_bipolar(std::size_t dim, Seed seed, std::uint64_t stream_id) {
  Hypervector out(dim);
  const std::uint64_t key = stream_key(seed, stream_id);
  auto el = out.elements();
  for (std::size_t block = 0; block * 64 < dim; ++block) {
    const std::uint64_t word = stream_word(key, block);
    const std::size_t end = std::min(dim, (block + 1) * 64);
    for (std::size_t i = block * 64; i < end; ++i) {
      el[i] = ((word >> (i - block * 64)) & 1U) != 0 ? 1 : -1;
    }
  }
  return out;
}

}  // namespace enhdc
