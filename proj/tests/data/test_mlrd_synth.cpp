#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include <unistd.h>

#include "mlr/binary_io.hpp"
#include "mlr/data/mlrd.hpp"
#include "mlr/data/synth.hpp"
#include "test_util.hpp"

using namespace mlr;
using namespace mlr::data;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& tag) {
  const auto p = fs::temp_directory_path() / ("mlr_test_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Dataset small_dataset(std::size_t n) {
  Dataset d;
  d.name = "toy";
  d.split = "train";
  d.timesteps = 4;
  d.blocks = {{"audio", 3}, {"text", 2}};
  d.label_schema = {{"sentiment", LabelKind::signed_score}, {"happy", LabelKind::binary}};
  for (std::size_t i = 0; i < n; ++i) {
    d.records.push_back({test::random_tensor({4, 5}, i + 1, -2, 2).cast<float>(),
                         {float(i) - 1.5f, float(i % 2)},
                         "utt_" + std::to_string(i),
                         "toy"});
  }
  return d;
}

void flip_byte(const fs::path& p, std::size_t offset) {
  auto bytes = read_file_bytes(p.string());
  bytes.at(offset) ^= 0x5A;
  write_file_bytes(p.string(), bytes);
}

}  // namespace

TEST_CASE("FNV-1a matches published test vectors") {
  auto h = [](std::string_view s) {
    return fnv1a64({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
  };
  CHECK(h("") == 0xcbf29ce484222325ULL);
  CHECK(h("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(h("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("byte writer and reader round-trip little-endian values") {
  ByteWriter w;
  w.u32(0x01020304u);
  w.u64(42);
  w.f32(-1.25f);
  w.bytes("hi");
  CHECK(w.buffer()[0] == 0x04);
  ByteReader r(w.buffer(), "probe");
  CHECK(r.u32() == 0x01020304u);
  CHECK(r.u64() == 42);
  CHECK(r.f32() == -1.25f);
  CHECK(r.bytes(2) == "hi");
  CHECK(r.remaining() == 0);
  CHECK_THROWS_AS(r.u32(), TruncatedError);
}

TEST_CASE("manifest parsing rejects unknown, missing and repeated keys") {
  DatasetManifest m;
  m.dataset = "toy";
  m.split = "val";
  m.count = 3;
  m.timesteps = 4;
  m.features = 5;
  m.blocks = {{"audio", 3}, {"text", 2}};
  m.label_schema = {{"sentiment", LabelKind::signed_score}};
  m.blob = "toy.bin";
  m.blob_bytes = 99;
  m.checksum = 0xdeadbeefULL;
  const auto text = format_manifest(m);
  const auto back = parse_manifest(text);
  CHECK(back.dataset == "toy");
  CHECK(back.blocks == m.blocks);
  CHECK(back.label_schema == m.label_schema);
  CHECK(back.checksum == m.checksum);
  CHECK_THROWS_AS(parse_manifest(text + "colour = blue\n"), FormatError);
  CHECK_THROWS_AS(parse_manifest(text + "split = test\n"), FormatError);
  auto missing = text;
  missing.erase(missing.find("count"), missing.find('\n', missing.find("count")) - missing.find("count") + 1);
  CHECK_THROWS_AS(parse_manifest(missing), FormatError);
}

TEST_CASE("MLRD round trip is bitwise exact") {
  const auto dir = scratch_dir("rt");
  const auto d = small_dataset(6);
  save_dataset(d, (dir / "toy_train.mlrd").string());
  const auto back = load_dataset((dir / "toy_train.mlrd").string());
  CHECK(back.name == d.name);
  CHECK(back.split == d.split);
  CHECK(back.blocks == d.blocks);
  CHECK(back.label_schema == d.label_schema);
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back.records[i].x == d.records[i].x);
    CHECK(back.records[i].labels == d.records[i].labels);
    CHECK(back.records[i].id == d.records[i].id);
  }
  fs::remove_all(dir);
}

TEST_CASE("an empty split round-trips with count zero") {
  const auto dir = scratch_dir("empty");
  auto d = small_dataset(0);
  save_dataset(d, (dir / "e.mlrd").string());
  const auto back = load_dataset((dir / "e.mlrd").string());
  CHECK(back.size() == 0);
  CHECK(back.width() == 5);
  fs::remove_all(dir);
}

TEST_CASE("a corrupted blob byte is a checksum error") {
  const auto dir = scratch_dir("crc");
  save_dataset(small_dataset(3), (dir / "c.mlrd").string());
  flip_byte(dir / "c.bin", 17);
  CHECK_THROWS_AS(load_dataset((dir / "c.mlrd").string()), ChecksumError);
  fs::remove_all(dir);
}

TEST_CASE("a truncated blob is a truncation error") {
  const auto dir = scratch_dir("trunc");
  save_dataset(small_dataset(3), (dir / "t.mlrd").string());
  const auto p = dir / "t.bin";
  fs::resize_file(p, fs::file_size(p) - 7);
  CHECK_THROWS_AS(load_dataset((dir / "t.mlrd").string()), TruncatedError);
  fs::remove_all(dir);
}

TEST_CASE("a manifest width that disagrees with its blocks is a format error") {
  const auto dir = scratch_dir("width");
  const auto path = (dir / "w.mlrd").string();
  save_dataset(small_dataset(2), path);
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  in.close();
  const auto at = text.find("features = 5");
  REQUIRE(at != std::string::npos);
  text.replace(at, 12, "features = 6");
  std::ofstream(path) << text;
  CHECK_THROWS_AS(load_dataset(path), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("a missing manifest is an I/O error") {
  CHECK_THROWS_AS(load_dataset("/nonexistent/dir/x.mlrd"), IoError);
}

TEST_CASE("synth is deterministic in its seed and splits 70/15/15") {
  SynthConfig c;
  c.n_utterances = 200;
  c.blocks = {{"audio", 6}, {"vision", 4}, {"text", 5}};
  const auto a = synth_generate(c);
  const auto b = synth_generate(c);
  CHECK(a.train.size() == 140);
  CHECK(a.val.size() == 30);
  CHECK(a.test.size() == 30);
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train.records[i].x == b.train.records[i].x);
    CHECK(a.train.records[i].id == b.train.records[i].id);
  }
  c.seed = 2;
  const auto other = synth_generate(c);
  CHECK_FALSE(other.train.records[0].x == a.train.records[0].x);

  std::set<std::string> ids;
  for (const auto* s : {&a.train, &a.val, &a.test}) {
    s->validate();
    for (const auto& r : s->records) ids.insert(r.id);
  }
  CHECK(ids.size() == 200);
}

TEST_CASE("synth classes are balanced and labels follow the schema") {
  SynthConfig c;
  c.n_utterances = 400;
  c.blocks = {{"audio", 4}, {"text", 3}};
  const auto two = synth_generate(c);
  std::size_t pos = 0, total = 0;
  for (const auto* s : {&two.train, &two.val, &two.test}) {
    for (const auto& r : s->records) {
      pos += synth_class_of(*s, r);
      ++total;
      CHECK(std::abs(r.labels[0]) >= 0.2f);
    }
  }
  CHECK(pos * 2 == total);

  c.class_count = 4;
  const auto four = synth_generate(c);
  REQUIRE(four.train.label_schema.size() == 4);
  CHECK(four.train.label_schema[0].name == "happy");
  CHECK(four.train.label_schema[3].name == "neutral");
  for (const auto& r : four.train.records) {
    float sum = 0;
    for (auto v : r.labels) sum += v;
    CHECK(sum == 1.0f);
  }
}

TEST_CASE("synth Bayes accuracy is Phi(1/sigma)") {
  CHECK(synth_latent_bayes_accuracy(1.0) == doctest::Approx(0.8413447460685429));
  CHECK(synth_latent_bayes_accuracy(0.78) == doctest::Approx(0.90).epsilon(0.01));
  CHECK(synth_latent_bayes_accuracy(0.0) == 1.0);
}

TEST_CASE("synth rejects bad configs") {
  SynthConfig c;
  c.class_count = 1;
  CHECK_THROWS_AS(synth_generate(c), ConfigError);
  c = SynthConfig{};
  c.signal_blocks = {"smell"};
  CHECK_THROWS_AS(synth_generate(c), ConfigError);
}

TEST_CASE("selecting and stacking blocks") {
  const auto d = small_dataset(3);
  const auto t = select_blocks(d, {"text"});
  CHECK(t.width() == 2);
  CHECK(t.records[1].x(2, 1) == d.records[1].x(2, 4));
  const auto batch = stack_inputs(d.records);
  CHECK(batch.dims() == Shape{3, 1, 4, 5});
  CHECK(batch(2, 0, 3, 4) == d.records[2].x(3, 4));
  CHECK_THROWS_AS(select_blocks(d, {"vision"}), ConfigError);
}
