#include "mlr/data/mlrd.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mlr/binary_io.hpp"

namespace mlr::data {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw FormatError("manifest key '" + key + "' expects an unsigned integer, got '" + v + "'");
  }
  return out;
}

std::pair<std::string, std::string> name_value(const std::string& item, const std::string& key) {
  const auto colon = item.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == item.size()) {
    throw FormatError("manifest key '" + key + "' expects name:value items, got '" + item + "'");
  }
  return {item.substr(0, colon), item.substr(colon + 1)};
}

}  // namespace

std::string label_kind_name(LabelKind k) { return k == LabelKind::binary ? "binary" : "signed"; }

LabelKind label_kind_from_name(const std::string& s) {
  if (s == "binary") return LabelKind::binary;
  if (s == "signed") return LabelKind::signed_score;
  throw FormatError("unknown label kind '" + s + "'");
}

std::string format_manifest(const DatasetManifest& m) {
  std::ostringstream out;
  out << "format = MLRD\n";
  out << "version = " << m.version << "\n";
  out << "dataset = " << m.dataset << "\n";
  out << "split = " << m.split << "\n";
  out << "count = " << m.count << "\n";
  out << "timesteps = " << m.timesteps << "\n";
  out << "features = " << m.features << "\n";
  out << "blocks = ";
  for (std::size_t i = 0; i < m.blocks.size(); ++i) {
    out << (i ? "," : "") << m.blocks[i].name << ":" << m.blocks[i].width;
  }
  out << "\nlabels = ";
  for (std::size_t i = 0; i < m.label_schema.size(); ++i) {
    out << (i ? "," : "") << m.label_schema[i].name << ":" << label_kind_name(m.label_schema[i].kind);
  }
  out << "\nblob = " << m.blob << "\n";
  out << "blob_bytes = " << m.blob_bytes << "\n";
  out << "checksum = fnv1a64:" << hex64(m.checksum) << "\n";
  return out.str();
}

DatasetManifest parse_manifest(const std::string& text) {
  static const std::set<std::string> required = {"format",   "version", "dataset", "split",
                                                 "count",    "timesteps", "features", "blocks",
                                                 "labels",   "blob",    "blob_bytes", "checksum"};
  DatasetManifest m;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw FormatError("manifest line " + std::to_string(lineno) + " is not key = value");
    }
    const auto key = trim(t.substr(0, eq));
    const auto value = trim(t.substr(eq + 1));
    if (!required.count(key)) throw FormatError("manifest has unknown key '" + key + "'");
    if (!seen.insert(key).second) throw FormatError("manifest repeats key '" + key + "'");

    if (key == "format") {
      if (value != "MLRD") throw FormatError("manifest format is '" + value + "', expected MLRD");
    } else if (key == "version") {
      m.version = static_cast<int>(parse_uint(key, value));
      if (m.version != kMlrdVersion) {
        throw FormatError("unsupported MLRD version " + value);
      }
    } else if (key == "dataset") {
      m.dataset = value;
    } else if (key == "split") {
      m.split = value;
    } else if (key == "count") {
      m.count = parse_uint(key, value);
    } else if (key == "timesteps") {
      m.timesteps = parse_uint(key, value);
    } else if (key == "features") {
      m.features = parse_uint(key, value);
    } else if (key == "blocks") {
      for (const auto& item : split(value, ',')) {
        auto [n, w] = name_value(item, key);
        m.blocks.push_back({n, parse_uint(key, w)});
      }
    } else if (key == "labels") {
      for (const auto& item : split(value, ',')) {
        auto [n, k] = name_value(item, key);
        m.label_schema.push_back({n, label_kind_from_name(k)});
      }
    } else if (key == "blob") {
      m.blob = value;
    } else if (key == "blob_bytes") {
      m.blob_bytes = parse_uint(key, value);
    } else if (key == "checksum") {
      const std::string prefix = "fnv1a64:";
      if (value.rfind(prefix, 0) != 0 || value.size() != prefix.size() + 16) {
        throw FormatError("manifest checksum must be fnv1a64:<16 hex digits>");
      }
      const auto hex = value.substr(prefix.size());
      const auto [p, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), m.checksum, 16);
      if (ec != std::errc() || p != hex.data() + hex.size()) {
        throw FormatError("manifest checksum is not hexadecimal");
      }
    }
  }
  for (const auto& k : required) {
    if (!seen.count(k)) throw FormatError("manifest is missing key '" + k + "'");
  }
  std::size_t sum = 0;
  for (const auto& b : m.blocks) {
    if (b.width == 0) throw FormatError("block '" + b.name + "' has zero width");
    sum += b.width;
  }
  if (m.blocks.empty() || sum != m.features) {
    throw FormatError("block widths sum to " + std::to_string(sum) + " but features = " +
                      std::to_string(m.features));
  }
  if (m.timesteps == 0) throw FormatError("timesteps must be positive");
  return m;
}

DatasetManifest save_dataset(const Dataset& d, const std::string& manifest_path) {
  d.validate();
  ByteWriter w;
  for (const auto& r : d.records) w.f32_array(r.x.values());
  for (const auto& r : d.records) w.f32_array(std::span<const float>(r.labels));
  for (const auto& r : d.records) {
    w.u32(static_cast<std::uint32_t>(r.id.size()));
    w.bytes(r.id);
  }

  DatasetManifest m;
  m.dataset = d.name;
  m.split = d.split;
  m.count = d.records.size();
  m.timesteps = d.timesteps;
  m.features = d.width();
  m.blocks = d.blocks;
  m.label_schema = d.label_schema;
  const fs::path mp(manifest_path);
  m.blob = mp.stem().string() + ".bin";
  m.blob_bytes = w.buffer().size();
  m.checksum = fnv1a64(w.buffer());

  write_file_bytes((mp.parent_path() / m.blob).string(), w.buffer());
  const auto text = format_manifest(m);
  write_file_bytes(manifest_path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                            text.size()));
  return m;
}

Dataset load_dataset(const std::string& manifest_path) {
  const auto raw = read_file_bytes(manifest_path);
  const auto m = parse_manifest(std::string(raw.begin(), raw.end()));
  const auto blob_path = (fs::path(manifest_path).parent_path() / m.blob).string();
  const auto blob = read_file_bytes(blob_path);
  if (blob.size() < m.blob_bytes) {
    throw TruncatedError("blob '" + blob_path + "' has " + std::to_string(blob.size()) +
                         " bytes, manifest declares " + std::to_string(m.blob_bytes));
  }
  if (blob.size() != m.blob_bytes) {
    throw FormatError("blob '" + blob_path + "' is longer than the manifest declares");
  }
  if (fnv1a64(blob) != m.checksum) {
    throw ChecksumError("checksum mismatch for '" + blob_path + "': manifest " +
                        hex64(m.checksum) + ", blob " + hex64(fnv1a64(blob)));
  }

  Dataset d;
  d.name = m.dataset;
  d.split = m.split;
  d.timesteps = m.timesteps;
  d.blocks = m.blocks;
  d.label_schema = m.label_schema;
  ByteReader r(blob, "blob '" + blob_path + "'");
  const std::size_t per = m.timesteps * m.features;
  const std::size_t nl = m.label_schema.size();
  if (m.count * (per + nl) * 4 > blob.size()) {
    throw FormatError("blob '" + blob_path + "' is too small for " + std::to_string(m.count) +
                      " utterances of " + std::to_string(m.timesteps) + "x" +
                      std::to_string(m.features));
  }
  d.records.resize(m.count);
  for (auto& rec : d.records) {
    rec.x = TensorF({m.timesteps, m.features});
    r.f32_array(rec.x.values());
    rec.source_dataset = m.dataset;
  }
  for (auto& rec : d.records) {
    rec.labels.resize(nl);
    r.f32_array(rec.labels);
  }
  for (auto& rec : d.records) rec.id = r.bytes(r.u32());
  if (r.remaining() != 0) {
    throw FormatError("blob '" + blob_path + "' has " + std::to_string(r.remaining()) +
                      " trailing bytes");
  }
  return d;
}

}  // namespace mlr::data
