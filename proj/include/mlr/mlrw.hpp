#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mlr/tensor.hpp"

namespace mlr {

/// MLRW v1 container: "MLRW", u32 version, u32 tensor count, then per tensor
/// u32 name length, UTF-8 name, u32 rank, u32 dims, f32 payload; a trailing
/// u64 FNV-1a of every preceding byte. All little-endian.
inline constexpr std::uint32_t kMlrwVersion = 1;

struct NamedTensor {
  std::string name;
  TensorF tensor;
};

std::vector<std::uint8_t> encode_mlrw(const std::vector<NamedTensor>& tensors);

/// Errors: FormatError (bad magic), VersionError, TruncatedError,
/// TensorCountError (bytes left over after the declared tensors),
/// ChecksumError.
std::vector<NamedTensor> decode_mlrw(std::span<const std::uint8_t> bytes,
                                     const std::string& context);

void save_mlrw(const std::string& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_mlrw(const std::string& path);

/// Null when absent.
const NamedTensor* find_tensor(const std::vector<NamedTensor>& tensors, const std::string& name);

}  // namespace mlr
