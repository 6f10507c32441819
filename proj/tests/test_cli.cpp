#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "morphoguard/manifest.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(MG_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe) != nullptr) r.output += buf.data();
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string robot(const std::string& name) { return mgtest::data_path(name + ".robot"); }
std::string skin(const std::string& name) { return mgtest::data_path(name + ".skin"); }

// One generated planar2 dataset shared by the tests below.
const mgtest::TempDir& workspace() {
  static mgtest::TempDir dir("cli");
  static const bool made = [] {
    const auto r = run("gen-data --robot " + robot("planar2") + " --skin " + skin("planar2") + " --out " +
                       dir / "d.mgd" + " --pairs 1000 --pairs-per-trajectory 500 --seed 5");
    REQUIRE(r.code == 0);
    return true;
  }();
  (void)made;
  return dir;
}

}  // namespace

TEST_CASE("help and version exit cleanly") {
  CHECK(run("--help").code == 0);
  for (const char* sub : {"gen-data", "train", "eval", "track", "sweep", "report"}) {
    const auto r = run(std::string(sub) + " --help");
    CAPTURE(sub);
    CHECK(r.code == 0);
    CHECK(r.output.find("--") != std::string::npos);
  }
  const auto v = run("--version");
  CHECK(v.code == 0);
  CHECK(v.output.find("0.1.0") != std::string::npos);
}

TEST_CASE("argument errors exit with code 2") {
  CHECK(run("").code != 0);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("gen-data --robot x.robot").code == 2);
  CHECK(run("train --data /nonexistent.mgd --preset ci_128 --out /tmp/x").code == 2);
  CHECK(run("gen-data --robot /nonexistent.robot --skin " + skin("planar2") + " --out /tmp/mg_x.mgd").code == 2);
}

TEST_CASE("gen-data prints the split and writes a verifiable manifest") {
  mgtest::TempDir dir("cli_gen");
  const auto r = run("gen-data --robot " + robot("planar2") + " --skin " + skin("planar2") + " --out " + dir / "d.mgd" +
                     " --pairs 1000 --pairs-per-trajectory 500 --seed 5");
  REQUIRE(r.code == 0);
  CHECK(r.output.find("split train 980 val 10 test 10") != std::string::npos);
  CHECK(fs::exists(dir / "d.mgd"));
  CHECK(fs::exists(dir / "d.mgd.q0"));
  const auto check = morphoguard::report::verify_manifest(dir / "manifest.json");
  CHECK(check.ok);

  std::ofstream(dir / "d.mgd", std::ios::app) << "x";
  CHECK_FALSE(morphoguard::report::verify_manifest(dir / "manifest.json").ok);

  const auto bad = run("gen-data --robot " + robot("planar2") + " --skin " + skin("arm7") + " --out " + dir / "e.mgd");
  CHECK(bad.code == 2);
}

TEST_CASE("train, eval, track and report run end to end") {
  const auto& ws = workspace();
  const auto out = ws / "run";
  const auto t = run("train --data " + ws / "d.mgd" + " --preset ci_128 --epochs 2 --max-train 400 --seed 3 --no-timing --out " + out);
  INFO(t.output);
  REQUIRE(t.code == 0);
  CHECK(t.output.find("epoch 2") != std::string::npos);
  CHECK(fs::exists(out + "/best.mgc"));
  CHECK(fs::exists(out + "/metrics.csv"));
  CHECK(morphoguard::report::verify_manifest(out + "/manifest.json").ok);

  const auto e = run("eval --data " + ws / "d.mgd" + " --ckpt " + out + "/best.mgc --report " + ws / "eval/e.csv");
  INFO(e.output);
  CHECK(e.code == 0);
  CHECK(fs::exists(ws / "eval/e.csv"));
  CHECK(morphoguard::report::verify_manifest(ws / "eval/manifest.json").ok);

  const auto o = run("eval --data " + ws / "d.mgd" + " --predictor oracle");
  CHECK(o.code == 0);
  CHECK(run("eval --data " + ws / "d.mgd" + " --predictor net").code == 2);
  CHECK(run("eval --data " + ws / "d.mgd" + " --predictor psychic").code == 2);

  const auto k = run("track --ckpt " + out + "/best.mgc --robot " + robot("planar2") + " --skin " + skin("planar2") +
                     " --from 0.1,0.2 --to 0.6,0.9 --steps 30 --out " + ws / "track/t.csv");
  INFO(k.output);
  CHECK(k.code == 0);
  CHECK(k.output.find("max_step_error") != std::string::npos);
  CHECK(run("track --ckpt " + out + "/best.mgc --robot " + robot("planar2") + " --skin " + skin("planar2") +
            " --from 0.1,0.2,0.3 --to 0.6,0.9 --steps 30").code == 2);
  CHECK(run("track --ckpt " + out + "/best.mgc --robot " + robot("arm7") + " --skin " + skin("arm7") +
            " --from 0,0,0,0,0,0,0 --to 0,0,0,0,0,0,0.1").code == 2);

  const auto rp = run("report --csv " + out + "/metrics.csv --svg " + ws / "plot/m.svg");
  CHECK(rp.code == 0);
  CHECK(fs::exists(ws / "plot/m.svg"));
  CHECK(run("report --csv " + ws / "d.mgd.q0 --svg " + ws / "plot/bad.svg").code == 2);
}

TEST_CASE("reruns with the same seed are byte identical") {
  const auto& ws = workspace();
  for (const char* name : {"a", "b"}) {
    const auto r = run("train --data " + ws / "d.mgd" + " --preset ci_128 --epochs 1 --max-train 200 --seed 8 --no-timing --quiet --out " +
                       ws / name);
    REQUIRE(r.code == 0);
  }
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  CHECK(slurp(ws / "a/metrics.csv") == slurp(ws / "b/metrics.csv"));
  CHECK(slurp(ws / "a/best.mgc") == slurp(ws / "b/best.mgc"));
}

TEST_CASE("config with mismatched dims is rejected with a clear message") {
  const auto& ws = workspace();
  std::ofstream(ws / "arm.toml") << "preset = \"custom\"\ninput_dim = 63\noutput_dim = 7\nencoder_widths = [32, 32]\n"
                                    "layers = 2\nwidth = 32\n";
  const auto r = run("train --data " + ws / "d.mgd" + " --config " + ws / "arm.toml" + " --epochs 1 --out " + ws / "mm");
  CHECK(r.code == 2);
  CHECK(r.output.find("input_dim 63 ≠ dataset 3M=12") != std::string::npos);
  CHECK(run("train --data " + ws / "d.mgd" + " --preset ci_128 --config " + ws / "arm.toml" + " --out " + ws / "mm").code == 2);
}

TEST_CASE("sweep writes its tables") {
  const auto& ws = workspace();
  const auto r = run("sweep --kind fusion --data " + ws / "d.mgd" + " --seeds 1,2 --epochs 1 --max-train 128 --out-dir " +
                     ws / "sw");
  INFO(r.output);
  REQUIRE(r.code == 0);
  for (const char* f : {"sweep.csv", "curves.csv", "sweep.md", "curves.svg", "manifest.json"}) CHECK(fs::exists(ws / "sw/" + f));
  CHECK(run("sweep --kind depth --data " + ws / "d.mgd" + " --out-dir " + ws / "sw2").code == 2);
  CHECK(run("report --csv " + ws / "sw/curves.csv --svg " + ws / "sw/c2.svg --log-y").code == 0);
}
