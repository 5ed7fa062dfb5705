#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <sys/wait.h>
#include <unistd.h>

#include "mlr/binary_io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& work() {
  static const fs::path p = [] {
    auto d = fs::temp_directory_path() / ("mlr_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + MLR_CLI_PATH + "\" " + args + " > \"" +
                          (work() / "last.log").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string last_log() {
  std::ifstream in(work() / "last.log");
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string write_config(const std::string& name, const std::string& body) {
  const auto p = (work() / name).string();
  std::ofstream(p) << body;
  return p;
}

std::string w(const std::string& p) { return (work() / p).string(); }

const char* kSynth = R"({
  "synth": {"name": "cli", "n_utterances": 60, "noise_std": 0.3,
            "blocks": [{"name": "audio", "width": 16}, {"name": "vision", "width": 8}, {"name": "text", "width": 16}]},
  "datasets": [{"name": "cli", "dir": "%DIR%"}],
  "train": {"batch_size": 16, "max_epochs": 1}
})";

std::string synth_config() {
  std::string body = kSynth;
  body.replace(body.find("%DIR%"), 5, w("data"));
  return write_config("run.json", body);
}

}  // namespace

TEST_CASE("cli: the full verb chain succeeds and writes its outputs") {
  const auto cfg = synth_config();
  CHECK(run("--config " + cfg + " --out " + w("data") + " synth") == 0);
  CHECK(fs::exists(w("data/train.mlrd")));
  CHECK(run("--config " + cfg + " --out " + w("cae") + " train-cae") == 0);
  CHECK(fs::exists(w("cae/cae.mlrw")));
  CHECK(fs::exists(w("cae/history.csv")));
  CHECK(run("--config " + cfg + " --out " + w("emb") + " embed --weights " + w("cae/cae.mlrw") +
            " --data " + w("data/train.mlrd")) == 0);
  CHECK(run("--config " + cfg + " embed --weights " + w("cae/cae.mlrw") + " --data " +
            w("data/test.mlrd") + " --output " + w("emb/test.mlrd")) == 0);
  CHECK(fs::exists(w("emb/train.mlrd")));
  CHECK(run("--config " + cfg + " --out " + w("clf") + " train-clf --train " + w("emb/train.mlrd") +
            " --test " + w("emb/test.mlrd")) == 0);
  CHECK(fs::exists(w("clf/report.csv")));
  CHECK(run("--out " + w("ev") + " eval --classifier " + w("clf/classifier.mlrw") + " --data " +
            w("emb/test.mlrd")) == 0);
  CHECK(last_log().find("sentiment") != std::string::npos);
  CHECK(run("--out " + w("cp") + " count-params --weights " + w("cae/cae.mlrw")) == 0);
  CHECK(last_log().find("encoder_total") != std::string::npos);
}

TEST_CASE("cli: count-params on the default config prints the reference totals") {
  CHECK(run("--out " + w("cp2") + " count-params") == 0);
  const auto log = last_log();
  CHECK(log.find("256202") != std::string::npos);
  CHECK(log.find("256453") != std::string::npos);
  CHECK(log.find("257206") != std::string::npos);
}

TEST_CASE("cli: exit codes distinguish config, data, numeric and io failures") {
  CHECK(run("") == 2);
  CHECK(run("no-such-verb") == 2);
  CHECK(run("--config " + w("absent.json") + " train-cae") == 2);
  CHECK(run("--config " + write_config("bad.json", R"({"trian": {}})") + " train-cae") == 2);
  CHECK(last_log().find("trian") != std::string::npos);
  CHECK(run("--precision 16 count-params") == 2);

  // io: dataset directory missing
  CHECK(run("--config " + write_config("ghost.json", R"({"datasets": [{"name": "g", "dir": ")" +
                                                         w("ghost") + R"("}]})") +
            " --out " + w("g") + " train-cae") == 5);

  // data: corrupted weights
  const auto cfg = synth_config();
  REQUIRE(run("--config " + cfg + " --out " + w("data2") + " synth") == 0);
  mlr::write_file_bytes(w("junk.mlrw"), std::vector<std::uint8_t>(64, 7));
  CHECK(run("--out " + w("e") + " embed --weights " + w("junk.mlrw") + " --data " +
            w("data2/train.mlrd")) == 3);
  CHECK(run("--out " + w("e") + " embed --weights " + w("absent.mlrw") + " --data " +
            w("data2/train.mlrd")) == 5);

  // numeric: gradcheck with an injected fault
  CHECK(run("gradcheck --seeds 3 --op sigmoid --inject-fault sigmoid") == 4);
  CHECK(last_log().find("FAIL") != std::string::npos);
  CHECK(run("gradcheck --seeds 3 --op sigmoid") == 0);
  CHECK(run("gradcheck --op nonsense") == 2);
  fs::remove_all(work());
}
