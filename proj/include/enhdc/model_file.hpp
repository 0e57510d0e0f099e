#pragma once

// Binary ensemble model file.
//
//   header   "EHDC" | u32 version | u32 member count | u8 voting |
//            u32 crc32(payload) | u64 payload length
//   payload  per member:
//              u64 dim | u8 width bits | u8 encoder | i32 levels | u64 window |
//              u64 seed | i32 retrain epochs | u8 shuffle flag | u8 storage mode |
//              u64 features | u8 quantizer kind (0 global, 1 per-feature) |
//              ranges x (f64 min | f64 max), one range or one per feature |
//              u64 classes | classes x (u32 length | label bytes) |
//              classes x dim elements stored at the member's width
//
// All integers little-endian. Item memories are not stored: they are
// regenerated from the member seed.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "enhdc/ensemble.hpp"

namespace enhdc {

inline constexpr std::uint32_t kModelFormatVersion = 1;

class ModelFormatError : public std::runtime_error {
 public:
  enum class Kind { Io, BadMagic, Version, Checksum, Corrupt };

  ModelFormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Members must be finalized (clipped to their width).
[[nodiscard]] std::vector<std::uint8_t> serialize_model(const EnsembleModel& model);
[[nodiscard]] EnsembleModel deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const EnsembleModel& model, const std::filesystem::path& path);
[[nodiscard]] EnsembleModel load_model(const std::filesystem::path& path);

// CRC-32 of the payload as recorded in the header.
[[nodiscard]] std::uint32_t model_checksum(const std::vector<std::uint8_t>& bytes);

}  // namespace enhdc
