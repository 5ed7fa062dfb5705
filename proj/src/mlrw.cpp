#include "mlr/mlrw.hpp"

#include <cstring>
#include <unordered_set>

#include "mlr/binary_io.hpp"

namespace mlr {

namespace {
constexpr char kMagic[4] = {'M', 'L', 'R', 'W'};
}

std::vector<std::uint8_t> encode_mlrw(const std::vector<NamedTensor>& tensors) {
  std::unordered_set<std::string> seen;
  ByteWriter w;
  w.bytes(std::string_view(kMagic, 4));
  w.u32(kMlrwVersion);
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    if (!seen.insert(t.name).second) throw UsageError("duplicate tensor name '" + t.name + "'");
    w.u32(static_cast<std::uint32_t>(t.name.size()));
    w.bytes(t.name);
    w.u32(static_cast<std::uint32_t>(t.tensor.rank()));
    for (auto d : t.tensor.dims()) w.u32(static_cast<std::uint32_t>(d));
    w.f32_array(t.tensor.values());
  }
  w.u64(fnv1a64(w.buffer()));
  return std::move(w.buffer());
}

std::vector<NamedTensor> decode_mlrw(std::span<const std::uint8_t> bytes,
                                     const std::string& context) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError(context + ": not an MLRW file (bad magic)");
  }
  if (bytes.size() < 12 + 8) throw TruncatedError(context + ": header truncated");
  const auto body = bytes.first(bytes.size() - 8);
  ByteReader r(body, context);
  r.bytes(4);
  const auto version = r.u32();
  if (version != kMlrwVersion) {
    throw VersionError(context + ": MLRW version " + std::to_string(version) + ", expected " +
                       std::to_string(kMlrwVersion));
  }
  const auto count = r.u32();
  std::vector<NamedTensor> out;
  std::unordered_set<std::string> seen;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.u32();
    if (name_len > r.remaining()) {
      throw TruncatedError(context + ": tensor " + std::to_string(i) + " name runs past the end");
    }
    NamedTensor t;
    t.name = r.bytes(name_len);
    const auto rank = r.u32();
    if (rank == 0 || rank > 8) {
      throw FormatError(context + ": tensor '" + t.name + "' has rank " + std::to_string(rank));
    }
    Shape dims(rank);
    std::uint64_t n = 1;
    for (auto& d : dims) {
      d = r.u32();
      if (d == 0) throw FormatError(context + ": tensor '" + t.name + "' has a zero dimension");
      n *= d;
    }
    if (n * 4 > r.remaining()) {
      throw TruncatedError(context + ": payload of tensor '" + t.name + "' is truncated");
    }
    t.tensor = TensorF(dims);
    r.f32_array(t.tensor.values());
    if (!seen.insert(t.name).second) {
      throw FormatError(context + ": duplicate tensor name '" + t.name + "'");
    }
    out.push_back(std::move(t));
  }
  if (r.remaining() != 0) {
    throw TensorCountError(context + ": header declares " + std::to_string(count) + " tensors but " +
                           std::to_string(r.remaining()) + " bytes follow them");
  }
  ByteReader tail(bytes.last(8), context);
  const auto stored = tail.u64();
  const auto actual = fnv1a64(body);
  if (stored != actual) {
    throw ChecksumError(context + ": checksum mismatch (stored " + hex64(stored) + ", computed " +
                        hex64(actual) + ")");
  }
  return out;
}

void save_mlrw(const std::string& path, const std::vector<NamedTensor>& tensors) {
  write_file_bytes(path, encode_mlrw(tensors));
}

std::vector<NamedTensor> load_mlrw(const std::string& path) {
  return decode_mlrw(read_file_bytes(path), path);
}

const NamedTensor* find_tensor(const std::vector<NamedTensor>& tensors, const std::string& name) {
  for (const auto& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

}  // namespace mlr
