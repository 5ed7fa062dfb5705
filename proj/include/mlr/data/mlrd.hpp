#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "mlr/data/dataset.hpp"

namespace mlr::data {

/// MLRD v1: a UTF-8 `key = value` manifest next to a little-endian binary
/// blob. See docs/formats.md for the exact layout.
struct DatasetManifest {
  int version = 1;
  std::string dataset;
  std::string split;
  std::size_t count = 0;
  std::size_t timesteps = kTimesteps;
  std::size_t features = 0;
  std::vector<Block> blocks;
  std::vector<LabelField> label_schema;
  std::string blob;  // file name relative to the manifest
  std::uint64_t blob_bytes = 0;
  std::uint64_t checksum = 0;
};

inline constexpr int kMlrdVersion = 1;

std::string format_manifest(const DatasetManifest& m);
/// Throws FormatError on unknown keys, missing keys or bad values.
DatasetManifest parse_manifest(const std::string& text);

/// Writes `<manifest_path>` and its blob (same stem, `.bin`). Returns the
/// manifest written.
DatasetManifest save_dataset(const Dataset& d, const std::string& manifest_path);

/// Loads and validates a dataset. Errors: IoError (missing files),
/// TruncatedError (blob shorter than declared), ChecksumError, FormatError
/// (width/count inconsistencies). Nothing partial is returned.
Dataset load_dataset(const std::string& manifest_path);

std::string label_kind_name(LabelKind k);
LabelKind label_kind_from_name(const std::string& s);

}  // namespace mlr::data
