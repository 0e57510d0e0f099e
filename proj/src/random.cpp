#include "enhdc/random.hpp"

namespace enhdc {

std::uint64_t SplitMix64::below(std::uint64_t bound) noexcept {
  // Rejection sampling on the top of the range removes modulo bias.
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t x = (*this)();
  while (x >= limit) {
    x = (*this)();
  }
  return x % bound;
}

}  // namespace enhdc
