#pragma once

// Dense integer hypervectors and the three HDC operations (bundle, bind,
// permute) plus cosine similarity.
//
// Elements live in a 32-bit signed accumulation domain. The nominal storage
// width (8 or 16 bits) only matters once class hypervectors are clipped for
// storage; see classifier.hpp.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace enhdc {

class DimensionError : public std::invalid_argument {
 public:
  DimensionError(std::size_t lhs, std::size_t rhs);
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

class ZeroNormError : public std::domain_error {
 public:
  ZeroNormError() : std::domain_error("cosine similarity of a zero-norm hypervector") {}
};

// Stored integer width of class hypervector elements.
enum class DataWidth : std::uint8_t { Int8 = 8, Int16 = 16 };

[[nodiscard]] DataWidth data_width_from_bits(int bits);
[[nodiscard]] constexpr int bits(DataWidth w) noexcept { return static_cast<int>(w); }
[[nodiscard]] constexpr std::int32_t width_min(DataWidth w) noexcept {
  return -(std::int32_t{1} << (bits(w) - 1));
}
[[nodiscard]] constexpr std::int32_t width_max(DataWidth w) noexcept {
  return (std::int32_t{1} << (bits(w) - 1)) - 1;
}

struct Seed {
  std::uint64_t value = 0;
  friend bool operator==(Seed, Seed) = default;
};

class Hypervector {
 public:
  using value_type = std::int32_t;

  // All-zero hypervector. dim must be positive.
  explicit Hypervector(std::size_t dim);
  explicit Hypervector(std::vector<value_type> elements);
  Hypervector(std::initializer_list<value_type> elements);

  [[nodiscard]] std::size_t dim() const noexcept { return elements_.size(); }
  [[nodiscard]] std::span<const value_type> elements() const noexcept { return elements_; }
  [[nodiscard]] std::span<value_type> elements() noexcept { return elements_; }

  [[nodiscard]] value_type operator[](std::size_t i) const noexcept { return elements_[i]; }
  value_type& operator[](std::size_t i) noexcept { return elements_[i]; }

  [[nodiscard]] bool is_bipolar() const noexcept;
  [[nodiscard]] bool is_zero() const noexcept;

  Hypervector& operator+=(const Hypervector& other);
  Hypervector& operator-=(const Hypervector& other);
  Hypervector& operator*=(value_type scalar) noexcept;

  friend bool operator==(const Hypervector&, const Hypervector&) = default;

 private:
  std::vector<value_type> elements_;
};

// Element-wise sum (bundling).
[[nodiscard]] Hypervector add(const Hypervector& a, const Hypervector& b);
// Element-wise product (binding).
[[nodiscard]] Hypervector multiply(const Hypervector& a, const Hypervector& b);
// Cyclic right shift by k; k = 1 moves the last element to the front.
// Negative k shifts left.
[[nodiscard]] Hypervector permute(const Hypervector& a, long long k);

// Exact integer inner product.
[[nodiscard]] std::int64_t dot(std::span<const std::int32_t> a, std::span<const std::int32_t> b);
[[nodiscard]] std::int64_t squared_norm(std::span<const std::int32_t> a);

// Cosine similarity in [-1, 1]. Throws ZeroNormError if either operand is zero.
[[nodiscard]] double cosine(const Hypervector& a, const Hypervector& b);

// i.i.d. uniform {-1, +1} elements, fully determined by (seed, stream_id, dim).
[[nodiscard]] Hypervector random_bipolar(std::size_t dim, Seed seed, std::uint64_t stream_id);

}  // namespace enhdc
