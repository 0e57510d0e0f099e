#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "enhdc/classifier.hpp"
#include "enhdc/dataset.hpp"
#include "enhdc/hypervector.hpp"
#include "enhdc/random.hpp"

namespace fixtures {

// Gaussian-ish blobs: class c is centred at a class-specific random point in
// [0, 1]^m with uniform noise of +-spread.
inline enhdc::Dataset blobs(std::size_t n, std::size_t m, std::size_t k, std::uint64_t seed,
                            float spread = 0.25F) {
  enhdc::SplitMix64 rng(enhdc::Seed{seed}, 77);
  std::vector<std::vector<float>> centres(k, std::vector<float>(m));
  for (auto& c : centres)
    for (auto& v : c) v = static_cast<float>(rng.uniform());
  enhdc::Dataset d;
  d.name = "blobs";
  d.features = m;
  for (std::size_t c = 0; c < k; ++c) d.label_names.push_back("c" + std::to_string(c));
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(rng.below(k));
    d.labels.push_back(static_cast<std::int32_t>(c));
    for (std::size_t j = 0; j < m; ++j) {
      d.values.push_back(centres[c][j] + spread * static_cast<float>(2.0 * rng.uniform() - 1.0));
    }
  }
  return d;
}

inline std::vector<int> as_ints(const enhdc::Hypervector& hv) {
  return {hv.elements().begin(), hv.elements().end()};
}

inline std::vector<std::int64_t> as_wide(const enhdc::Hypervector& hv) {
  return {hv.elements().begin(), hv.elements().end()};
}

// A fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("enhdc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Writes `d` as a CSV with header f0..f{m-1},label.
inline void write_csv(const enhdc::Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  out.precision(9);
  for (std::size_t j = 0; j < d.features; ++j) out << 'f' << j << ',';
  out << "label\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (const float v : d.row(i)) out << v << ',';
    out << d.label_names[static_cast<std::size_t>(d.labels[i])] << '\n';
  }
}

inline void put_be32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b, 4);
}

// Writes an IDX image/label pair of n rows x cols images.
inline void write_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                      std::size_t n, std::size_t rows, std::size_t cols, std::uint64_t seed) {
  enhdc::SplitMix64 rng(enhdc::Seed{seed}, 5);
  std::ofstream img(images, std::ios::binary);
  put_be32(img, 0x00000803);
  put_be32(img, static_cast<std::uint32_t>(n));
  put_be32(img, static_cast<std::uint32_t>(rows));
  put_be32(img, static_cast<std::uint32_t>(cols));
  std::ofstream lab(labels, std::ios::binary);
  put_be32(lab, 0x00000801);
  put_be32(lab, static_cast<std::uint32_t>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = static_cast<unsigned char>(rng.below(3));
    lab.put(static_cast<char>(label));
    for (std::size_t p = 0; p < rows * cols; ++p) {
      // Class-dependent stripe plus noise.
      const bool on = (p % 3) == label;
      img.put(static_cast<char>(on ? 200 + rng.below(56) : rng.below(40)));
    }
  }
}

}  // namespace fixtures
