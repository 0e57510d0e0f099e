#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "enhdc/hypervector.hpp"
#include "enhdc/random.hpp"

using namespace enhdc;

namespace {

Hypervector random_small(SplitMix64& rng, std::size_t dim) {
  Hypervector h(dim);
  for (auto& v : h.elements()) v = static_cast<int>(rng.below(21)) - 10;
  return h;
}

}  // namespace

TEST_CASE("construction") {
  CHECK_THROWS_AS(Hypervector(0), DimensionError);
  CHECK_THROWS_AS(Hypervector(std::vector<int>{}), DimensionError);
  const Hypervector h(5);
  CHECK(h.dim() == 5);
  CHECK(h.is_zero());
  CHECK(Hypervector{1, -1, 1}.is_bipolar());
  CHECK_FALSE(Hypervector{1, 0, 1}.is_bipolar());
}

TEST_CASE("data widths") {
  CHECK(data_width_from_bits(8) == DataWidth::Int8);
  CHECK(data_width_from_bits(16) == DataWidth::Int16);
  CHECK_THROWS(data_width_from_bits(4));
  CHECK_THROWS(data_width_from_bits(32));
  CHECK(width_min(DataWidth::Int8) == -128);
  CHECK(width_max(DataWidth::Int8) == 127);
  CHECK(width_min(DataWidth::Int16) == -32768);
  CHECK(width_max(DataWidth::Int16) == 32767);
}

TEST_CASE("add") {
  CHECK(add({1, -1, 1}, {0, 0, 0}) == Hypervector{1, -1, 1});
  CHECK(add({1, 1}, {1, -1}) == Hypervector{2, 0});
  CHECK_THROWS_AS((void)add({1, 2}, {1, 2, 3}), DimensionError);

  SplitMix64 rng(Seed{3});
  for (int t = 0; t < 100; ++t) {
    const auto a = random_small(rng, 17);
    const auto b = random_small(rng, 17);
    const auto c = random_small(rng, 17);
    CHECK(add(a, b) == add(b, a));
    CHECK(add(add(a, b), c) == add(a, add(b, c)));
  }
}

TEST_CASE("add does not saturate") {
  Hypervector a{30000, -30000};
  for (int i = 0; i < 10; ++i) a += Hypervector{30000, -30000};
  CHECK(a == Hypervector{330000, -330000});
}

TEST_CASE("multiply") {
  CHECK(multiply({1, -1}, {1, 1}) == Hypervector{1, -1});
  CHECK(multiply({-1, -1}, {-1, 1}) == Hypervector{1, -1});
  CHECK_THROWS_AS((void)multiply({1}, {1, 1}), DimensionError);
  const auto a = random_bipolar(1000, Seed{9}, 0);
  const auto sq = multiply(a, a);
  CHECK(std::all_of(sq.elements().begin(), sq.elements().end(), [](int v) { return v == 1; }));

  SplitMix64 rng(Seed{4});
  for (int t = 0; t < 100; ++t) {
    const auto x = random_small(rng, 9);
    const auto y = random_small(rng, 9);
    CHECK(multiply(x, y) == multiply(y, x));
  }
}

TEST_CASE("permute") {
  CHECK(permute({1, 2, 3}, 1) == Hypervector{3, 1, 2});
  CHECK(permute({1, 2, 3}, -1) == Hypervector{2, 3, 1});
  CHECK(permute({1, 2, 3}, 0) == Hypervector{1, 2, 3});

  SplitMix64 rng(Seed{5});
  for (int t = 0; t < 50; ++t) {
    const std::size_t dim = 1 + rng.below(30);
    const auto a = random_small(rng, dim);
    CHECK(permute(a, static_cast<long long>(dim)) == a);
    CHECK(permute(permute(a, 2), -2) == a);
    const long long k = static_cast<long long>(rng.below(100)) - 50;
    const auto p = permute(a, k);
    CHECK(p.dim() == a.dim());
    auto x = std::vector<int>(a.elements().begin(), a.elements().end());
    auto y = std::vector<int>(p.elements().begin(), p.elements().end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    CHECK(x == y);
    // element i moves to (i + k) mod dim
    const auto d = static_cast<long long>(dim);
    for (long long i = 0; i < d; ++i) {
      CHECK(p[static_cast<std::size_t>(((i + k) % d + d) % d)] == a[static_cast<std::size_t>(i)]);
    }
  }
}

TEST_CASE("cosine") {
  CHECK(cosine({1, -1, 1, -1}, {1, 1, -1, -1}) == doctest::Approx(0.0));
  CHECK(std::abs(cosine({2, 0}, {1, 1}) - 0.70710678) < 1e-8);
  CHECK_THROWS_AS((void)cosine({0, 0}, {1, 1}), ZeroNormError);
  CHECK_THROWS_AS((void)cosine({1, 1}, {0, 0}), ZeroNormError);
  CHECK_THROWS_AS((void)cosine({1, 1}, {1, 1, 1}), DimensionError);

  SplitMix64 rng(Seed{6});
  for (int t = 0; t < 100; ++t) {
    auto a = random_small(rng, 33);
    const auto b = random_small(rng, 33);
    if (a.is_zero() || b.is_zero()) continue;
    CHECK(cosine(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine(a, b) == cosine(b, a));
    const double before = cosine(a, b);
    a *= static_cast<int>(1 + rng.below(7));
    CHECK(cosine(a, b) == doctest::Approx(before).epsilon(1e-12));
    CHECK(std::abs(before) <= 1.0);
  }
}

TEST_CASE("dot is exact for large elements") {
  const Hypervector a{2000000000, 2000000000};
  CHECK(dot(a.elements(), a.elements()) == 8000000000000000000LL);
}

TEST_CASE("random_bipolar") {
  CHECK_THROWS_AS((void)random_bipolar(0, Seed{1}, 0), DimensionError);
  const auto a = random_bipolar(1000, Seed{1}, 7);
  CHECK(a.is_bipolar());
  CHECK(a == random_bipolar(1000, Seed{1}, 7));
  CHECK_FALSE(a == random_bipolar(1000, Seed{1}, 8));
  CHECK_FALSE(a == random_bipolar(1000, Seed{2}, 7));
  // A shorter draw is a prefix of a longer one from the same stream.
  const auto shorter = random_bipolar(100, Seed{1}, 7);
  CHECK(std::equal(shorter.elements().begin(), shorter.elements().end(), a.elements().begin()));
}

TEST_CASE("random_bipolar element balance within 3 sigma") {
  const std::size_t n = 100000;
  const auto h = random_bipolar(n, Seed{2024}, 1);
  const auto plus = std::count(h.elements().begin(), h.elements().end(), 1);
  const double sigma = std::sqrt(n * 0.25);
  CHECK(std::abs(static_cast<double>(plus) - n / 2.0) < 3 * sigma);
}

TEST_CASE("random_bipolar quasi-orthogonality") {
  const std::size_t dim = 10000;
  double sum = 0.0;
  double worst = 0.0;
  for (std::uint64_t p = 0; p < 1000; ++p) {
    const double c = std::abs(cosine(random_bipolar(dim, Seed{11}, 2 * p),
                                     random_bipolar(dim, Seed{11}, 2 * p + 1)));
    sum += c;
    worst = std::max(worst, c);
  }
  const double mean = sum / 1000;
  CHECK(mean < 0.02);
  CHECK(worst < 0.05);
  // E|cos| = sqrt(2 / (pi D)) for independent bipolar vectors.
  CHECK(std::abs(mean - std::sqrt(2.0 / (M_PI * dim))) < 0.001);
}
