#pragma once

#include "hatelab/model.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace hatelab {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout, little-endian:
//   "HLCK" | u32 version | u64 body length
//   body: u32 n, n bytes of JSON {config, vocab}
//         u32 param count; per param: u32 name length, name, u32 rows, u32 cols, f32 values
//   u32 CRC-32 of every preceding byte
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class CheckpointFormatError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class CheckpointVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class CheckpointTruncatedError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class CheckpointChecksumError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

std::vector<std::uint8_t> serialize_checkpoint(const Classifier<float>& model);
Classifier<float> deserialize_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Classifier<float>& model, const std::filesystem::path& path);
Classifier<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace hatelab
