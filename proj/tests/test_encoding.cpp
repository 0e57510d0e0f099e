#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "enhdc/encoding.hpp"
#include "enhdc/random.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace enhdc;

namespace {

std::vector<std::vector<int>> level_table(const LevelMemory& mem) {
  std::vector<std::vector<int>> out;
  for (std::size_t l = 0; l < mem.size(); ++l) out.push_back(fixtures::as_ints(mem[l]));
  return out;
}

std::vector<std::vector<int>> base_table(const BaseMemory& mem) {
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < mem.size(); ++i) out.push_back(fixtures::as_ints(mem[i]));
  return out;
}

}  // namespace

TEST_CASE("encoder kind names") {
  CHECK(to_string(EncoderKind::Record) == "record");
  CHECK(to_string(EncoderKind::NGram) == "ngram");
  CHECK(encoder_kind_from_string("ngram") == EncoderKind::NGram);
  CHECK_THROWS(encoder_kind_from_string("permutation"));
}

TEST_CASE("quantizer") {
  const std::vector<float> values{0, 3, 10, 7};
  const auto q = fit_quantizer(values, 11);
  CHECK(q == Quantizer(0, 10, 11));
  CHECK(q.quantize(10) == 10);
  CHECK(q.quantize(0) == 0);
  CHECK(q.quantize(5.0) == 5);
  CHECK(q.quantize(-4) == 0);
  CHECK(q.quantize(99) == 10);
  CHECK(Quantizer(0, 1, 2).quantize(0.5) == 1);
  CHECK(Quantizer(0, 1, 2).quantize(0.49) == 0);
  CHECK_THROWS(fit_quantizer(std::vector<float>{2, 2, 2}, 4));
  CHECK_THROWS(fit_quantizer(std::vector<float>{}, 4));
  CHECK_THROWS(fit_quantizer(values, 1));
  CHECK_THROWS(Quantizer(1, 1, 4));

  SplitMix64 rng(Seed{1});
  for (int t = 0; t < 1000; ++t) {
    const double lo = rng.uniform() * 10 - 5;
    const double hi = lo + 0.1 + rng.uniform() * 10;
    const int p = 2 + static_cast<int>(rng.below(40));
    const Quantizer quant(lo, hi, p);
    const double v = lo - 1 + rng.uniform() * (hi - lo + 2);
    CHECK(quant.quantize(v) == oracle::quantize(v, lo, hi, p));
    CHECK(quant.quantize(lo) == 0);
    CHECK(quant.quantize(hi) == p - 1);
  }
}

TEST_CASE("per-feature quantizer") {
  // Two columns: [0, 10] and a constant 4.
  const std::vector<float> values{0, 4, 10, 4, 5, 4};
  const auto q = fit_per_feature_quantizer(values, 2, 11);
  CHECK(q.per_feature());
  REQUIRE(q.ranges().size() == 2);
  CHECK(q.ranges()[0] == Quantizer::Range{0, 10});
  CHECK(q.ranges()[1] == Quantizer::Range{4, 4});
  CHECK(q.quantize(7, 0) == 7);
  CHECK(q.quantize(4, 1) == 0);
  CHECK(q.quantize(3, 1) == 0);
  CHECK(q.quantize(4.5, 1) == 10);
  CHECK_THROWS(q.quantize(1, 2));
  CHECK_THROWS(fit_per_feature_quantizer(values, 4, 11));
  CHECK_THROWS(Quantizer(std::vector<Quantizer::Range>{{2, 1}}, 4));
  CHECK_FALSE(q == fit_quantizer(values, 11));

  SplitMix64 rng(Seed{2});
  const std::size_t m = 5;
  std::vector<float> data(m * 30);
  for (std::size_t i = 0; i < data.size(); ++i)
    data[i] = static_cast<float>((i % m) * 3.0 + rng.uniform() * (1.0 + static_cast<double>(i % m)));
  const auto fitted = fit_per_feature_quantizer(data, m, 9);
  for (std::size_t j = 0; j < m; ++j) {
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = j; i < data.size(); i += m) {
      lo = std::min<double>(lo, data[i]);
      hi = std::max<double>(hi, data[i]);
    }
    for (std::size_t i = j; i < data.size(); i += m)
      CHECK(fitted.quantize(data[i], j) == oracle::quantize(data[i], lo, hi, 9));
  }

  // The encoder feeds feature i through range i.
  Encoder enc(EncoderSpec{EncoderKind::Record, 64, 3, Seed{4}}, fitted, m);
  const std::vector<float> row(data.begin(), data.begin() + m);
  std::vector<float> global_row(m);
  for (std::size_t j = 0; j < m; ++j)
    global_row[j] = static_cast<float>(fitted.quantize(row[j], j));
  Encoder reference(EncoderSpec{EncoderKind::Record, 64, 3, Seed{4}}, Quantizer(0, 8, 9), m);
  CHECK(enc.encode(row) == reference.encode(global_row));
  CHECK_THROWS(Encoder(EncoderSpec{EncoderKind::Record, 64, 3, Seed{4}}, fitted, m + 1));
}

TEST_CASE("item memories are bipolar, deterministic and seed-dependent") {
  const LevelMemory a(4, 256, Seed{1});
  const LevelMemory b(4, 256, Seed{1});
  const LevelMemory c(4, 256, Seed{2});
  const BaseMemory base(4, 256, Seed{1});
  for (std::size_t l = 0; l < 4; ++l) {
    CHECK(a[l].is_bipolar());
    CHECK(a[l] == b[l]);
    CHECK_FALSE(a[l] == c[l]);
    CHECK_FALSE(a[l] == base[l]);
  }
  CHECK_FALSE(a[0] == a[1]);
  const ProjectionMemory p(64, 3, Seed{1});
  CHECK(p.hash_hv().is_bipolar());
  CHECK(p.hash_hv() == ProjectionMemory(64, 3, Seed{1}).hash_hv());
  CHECK_THROWS(ProjectionMemory(4, 5, Seed{1}));
  CHECK_THROWS(ProjectionMemory(4, 0, Seed{1}));
}

TEST_CASE("base hypervectors are quasi-orthogonal") {
  const BaseMemory base(20, 10000, Seed{3});
  for (std::size_t i = 0; i < base.size(); ++i)
    for (std::size_t j = i + 1; j < base.size(); ++j) CHECK(std::abs(cosine(base[i], base[j])) < 0.05);
}

TEST_CASE("encode_record") {
  const Quantizer q(0, 1, 4);
  SUBCASE("single feature is a bound pair") {
    const LevelMemory levels(4, 32, Seed{5});
    const BaseMemory bases(1, 32, Seed{5});
    const std::vector<float> f{1.0F};
    const auto h = encode_record(f, levels, bases, q);
    CHECK(h == multiply(levels[3], bases[0]));
    CHECK(h.is_bipolar());
  }
  SUBCASE("m = 3, D = 8 matches the oracle") {
    const LevelMemory levels(4, 8, Seed{6});
    const BaseMemory bases(3, 8, Seed{6});
    const std::vector<float> f{0.1F, 0.6F, 0.9F};
    const auto h = encode_record(f, levels, bases, q);
    CHECK(fixtures::as_wide(h) == oracle::record(f, level_table(levels), base_table(bases), 0, 1));
  }
  SUBCASE("identical levels encode identically") {
    const LevelMemory levels(4, 64, Seed{7});
    const BaseMemory bases(2, 64, Seed{7});
    const std::vector<float> a{0.30F, 0.70F};
    const std::vector<float> b{0.32F, 0.68F};
    CHECK(encode_record(a, levels, bases, q) == encode_record(b, levels, bases, q));
  }
  SUBCASE("length mismatch") {
    const LevelMemory levels(4, 8, Seed{6});
    const BaseMemory bases(3, 8, Seed{6});
    const std::vector<float> f{0.1F, 0.6F};
    CHECK_THROWS_AS((void)encode_record(f, levels, bases, q), DimensionError);
    const BaseMemory wide(2, 16, Seed{6});
    CHECK_THROWS_AS((void)encode_record(f, levels, wide, q), DimensionError);
  }
}

TEST_CASE("encode_record range and parity") {
  SplitMix64 rng(Seed{8});
  for (int t = 0; t < 30; ++t) {
    const std::size_t m = 1 + rng.below(12);
    const std::size_t dim = 1 + rng.below(64);
    const Quantizer q(0, 1, 8);
    const LevelMemory levels(8, dim, Seed{rng()});
    const BaseMemory bases(m, dim, Seed{rng()});
    std::vector<float> f(m);
    for (auto& v : f) v = static_cast<float>(rng.uniform());
    const auto h = encode_record(f, levels, bases, q);
    for (const auto v : h.elements()) {
      CHECK(std::abs(v) <= static_cast<int>(m));
      CHECK(std::abs(v) % 2 == static_cast<int>(m % 2));
    }
  }
}

TEST_CASE("encode_record locality") {
  const std::size_t m = 10;
  const Quantizer q(0, 1, 8);
  const LevelMemory levels(8, 10000, Seed{9});
  const BaseMemory bases(m, 10000, Seed{9});
  std::vector<float> a(m, 0.5F);
  auto b = a;
  b[3] = 1.0F;
  const double sim = cosine(encode_record(a, levels, bases, q), encode_record(b, levels, bases, q));
  CHECK(sim >= (m - 2.0) / m - 0.15);
}

TEST_CASE("extend_features") {
  const std::vector<int> two{1, 2};
  CHECK(extend_features<int>(two, 3) == std::vector<int>{1, 2, 1});
  CHECK(extend_features<int>(two, 2) == two);
  CHECK_THROWS(extend_features<int>(std::vector<int>{}, 3));
  CHECK_THROWS(extend_features<int>(two, 1));

  std::vector<int> f(768);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<int>(i);
  const auto e = extend_features<int>(f, 10000);
  REQUIRE(e.size() == 10000);
  // 13 full copies follow the original, then a partial 14th.
  CHECK(10000 / 768 == 13);
  for (std::size_t c = 0; c < 13; ++c) CHECK(e[c * 768] == 0);
  CHECK(e[13 * 768] == 0);
  CHECK(e.back() == static_cast<int>((10000 - 1) % 768));
}

TEST_CASE("encode_ngram") {
  const ProjectionMemory p(Hypervector{1, -1, 1}, 2);
  const std::vector<std::int32_t> f{1, 2, 1};
  CHECK(encode_ngram(f, p) == Hypervector{-1, -1, 2});

  SUBCASE("window 1 is element-wise binding") {
    const ProjectionMemory p1(32, 1, Seed{2});
    std::vector<std::int32_t> g(32);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<int>(i % 5) - 2;
    CHECK(encode_ngram(g, p1) == multiply(Hypervector(g), p1.hash_hv()));
  }
  SUBCASE("random D = 64 instance matches the oracle") {
    SplitMix64 rng(Seed{3});
    const ProjectionMemory p64(64, 4, Seed{3});
    std::vector<std::int32_t> g(64);
    for (auto& v : g) v = static_cast<int>(rng.below(32));
    CHECK(fixtures::as_wide(encode_ngram(g, p64)) ==
          oracle::ngram({g.begin(), g.end()}, fixtures::as_ints(p64.hash_hv()), 4));
  }
  SUBCASE("unextended input is rejected") {
    const std::vector<std::int32_t> shortf{1, 2};
    CHECK_THROWS_AS((void)encode_ngram(shortf, p), DimensionError);
  }
}

TEST_CASE("Encoder dispatch") {
  const Quantizer q(0, 1, 4);
  const std::vector<float> f{0.0F, 0.4F, 1.0F};
  SUBCASE("record") {
    const Encoder enc(EncoderSpec{EncoderKind::Record, 50, 3, Seed{4}}, q, 3);
    REQUIRE(enc.level_memory() != nullptr);
    REQUIRE(enc.projection_memory() == nullptr);
    CHECK(enc.encode(f) == encode_record(f, *enc.level_memory(), *enc.base_memory(), q));
    CHECK(enc.element_bound() == 3);
  }
  SUBCASE("ngram uses quantized levels") {
    const Encoder enc(EncoderSpec{EncoderKind::NGram, 50, 3, Seed{4}}, q, 3);
    REQUIRE(enc.projection_memory() != nullptr);
    const std::vector<std::int32_t> levels{0, 1, 3};
    CHECK(enc.encode(f) == encode_ngram(extend_features<std::int32_t>(levels, 50),
                                        *enc.projection_memory()));
    CHECK(enc.element_bound() == 9);
  }
  SUBCASE("feature count is checked") {
    const Encoder enc(EncoderSpec{EncoderKind::Record, 50, 3, Seed{4}}, q, 4);
    CHECK_THROWS_AS((void)enc.encode(f), DimensionError);
  }
  SUBCASE("ngram needs m <= D") {
    CHECK_THROWS(Encoder(EncoderSpec{EncoderKind::NGram, 2, 1, Seed{4}}, q, 3));
  }
}

TEST_CASE("different seeds give unrelated encodings") {
  const Quantizer q(0, 1, 16);
  std::vector<float> f(40);
  SplitMix64 rng(Seed{10});
  for (auto& v : f) v = static_cast<float>(rng.uniform());
  for (const auto kind : {EncoderKind::Record, EncoderKind::NGram}) {
    const Encoder a(EncoderSpec{kind, 10000, 3, Seed{1}}, q, f.size());
    const Encoder b(EncoderSpec{kind, 10000, 3, Seed{2}}, q, f.size());
    CHECK(std::abs(cosine(a.encode(f), b.encode(f))) < 0.1);
    CHECK(a.encode(f) == Encoder(EncoderSpec{kind, 10000, 3, Seed{1}}, q, f.size()).encode(f));
  }
}

TEST_CASE("oracle equivalence over random small instances") {
  SplitMix64 rng(Seed{12});
  for (int t = 0; t < 200; ++t) {
    const std::size_t dim = 1 + rng.below(64);
    const std::size_t m = 1 + rng.below(std::min<std::size_t>(8, dim));
    const int p = 2 + static_cast<int>(rng.below(7));
    const std::size_t w = 1 + rng.below(std::min<std::size_t>(4, dim));
    const Quantizer q(-1, 1, p);
    std::vector<float> f(m);
    for (auto& v : f) v = static_cast<float>(rng.uniform() * 2.4 - 1.2);

    const Encoder rec(EncoderSpec{EncoderKind::Record, dim, w, Seed{rng()}}, q, m);
    CHECK(fixtures::as_wide(rec.encode(f)) ==
          oracle::record(f, level_table(*rec.level_memory()), base_table(*rec.base_memory()), -1, 1));

    const Encoder ng(EncoderSpec{EncoderKind::NGram, dim, w, Seed{rng()}}, q, m);
    std::vector<int> levels(m);
    for (std::size_t i = 0; i < m; ++i) levels[i] = oracle::quantize(f[i], -1, 1, p);
    CHECK(fixtures::as_wide(ng.encode(f)) ==
          oracle::ngram(levels, fixtures::as_ints(ng.projection_memory()->hash_hv()), w));
  }
}
