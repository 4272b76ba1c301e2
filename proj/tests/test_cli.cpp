#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "moddisc/serialize.hpp"
#include "moddisc/wav.hpp"

using namespace moddisc;
namespace fs = std::filesystem;

namespace {

const fs::path& root() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "moddisc_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(MODDISC_CLI) + " " + args + " > " + (root() / "last.log").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Two short entries shared by the tests below.
const fs::path& dataset() {
  static const fs::path d = [] {
    const fs::path out = root() / "data";
    REQUIRE(run("gen-data --out " + out.string() + " --entries 2 --seed 7 --duration 0.5") == 0);
    return out;
  }();
  return d;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("gen-data and verify", "[cli]") {
  const auto& d = dataset();
  CHECK(fs::exists(d / "manifest.json"));
  CHECK(fs::exists(d / "entry_0000" / "audio.wav"));
  CHECK(run("gen-data --out " + q(d) + " --verify") == 0);
  const auto other = root() / "data_copy";
  fs::copy(d, other, fs::copy_options::recursive);
  {
    std::ofstream out(other / "entry_0000" / "meta.json", std::ios::app);
    out << " ";
  }
  CHECK(run("gen-data --out " + q(other) + " --verify") != 0);
  CHECK(run("gen-data --out " + q(root() / "bad") + " --entries 0") == 1);
}

TEST_CASE("render reproduces stored audio", "[cli]") {
  const auto e = dataset() / "entry_0001";
  const auto out = root() / "render.wav";
  CHECK(run("render --add " + q(e / "add.json") + " --sub " + q(e / "sub.json") + " --env " + q(e / "env.json") +
            " --meta " + q(e / "meta.json") + " --out " + q(out)) == 0);
  CHECK(read_wav(out).samples == read_wav(e / "audio.wav").samples);

  ModSignal zero;
  zero.rate_hz = 500.0;
  zero.values.assign(251, 0.0);
  write_text(root() / "zero.csv", mod_signal_to_csv(zero));
  const auto silent = root() / "silent.wav";
  CHECK(run("render --add " + q(e / "add.csv") + " --sub " + q(e / "sub.csv") + " --env " + q(root() / "zero.csv") +
            " --meta " + q(e / "meta.json") + " --out " + q(silent)) == 0);
  for (double v : read_wav(silent).samples) CHECK(v == 0.0);

  write_text(root() / "broken.json", "{\"degree\": 3, \"knots\": [0, ");
  CHECK(run("render --add " + q(root() / "broken.json") + " --sub " + q(e / "sub.json") + " --env " +
            q(e / "env.json") + " --meta " + q(e / "meta.json") + " --out " + q(root() / "x.wav")) != 0);
  CHECK(run("render --add " + q(root() / "missing.json") + " --sub " + q(e / "sub.json") + " --env " +
            q(e / "env.json") + " --meta " + q(e / "meta.json") + " --out " + q(root() / "x.wav")) == 2);
}

TEST_CASE("single fit outputs and determinism", "[cli]") {
  const auto e = dataset() / "entry_0000";
  const std::string base = "fit --target " + q(e / "audio.wav") + " --meta " + q(e / "meta.json") + " --param lpf";
  const auto a = root() / "fit_a", b = root() / "fit_b";
  REQUIRE(run(base + " --steps 5 --seed 3 --out " + q(a)) == 0);
  REQUIRE(run(base + " --steps 5 --seed 3 --out " + q(b)) == 0);
  for (const char* f : {"add.csv", "sub.csv", "env.csv", "render.wav", "loss.csv", "plot.svg", "result.json"}) {
    CHECK(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const auto r = read_json(a / "result.json");
  CHECK(r.contains("final_loss"));
  CHECK(read_wav(a / "render.wav").samples.size() == 24000);

  const auto z = root() / "fit_zero";
  REQUIRE(run(base + " --steps 0 --out " + q(z)) == 0);
  const auto loss = slurp(z / "loss.csv");
  CHECK(loss.rfind("step,loss\n", 0) == 0);

  CHECK(run(base + " --steps 3 --param nonsense --out " + q(root() / "fit_bad")) == 1);
  CHECK(run("fit --out " + q(root() / "fit_none")) == 1);
}

TEST_CASE("batch fit and eval", "[cli]") {
  const auto fits = root() / "fits";
  REQUIRE(run("fit --dataset " + q(dataset()) + " --params lpf,spline --steps 3 --out " + q(fits)) == 0);
  for (const char* m : {"lpf", "spline"})
    for (const char* e : {"entry_0000", "entry_0001"}) CHECK(fs::exists(fits / m / e / "env.csv"));
  CHECK(fs::exists(fits / "spline" / "entry_0000" / "add.curve.json"));

  const auto report = root() / "report.csv";
  REQUIRE(run("eval --dataset " + q(dataset()) + " --fits " + q(fits) + " --out " + q(report)) == 0);
  const auto text = slurp(report);
  CHECK(text.rfind("#", 0) == 0);
  CHECK(text.find("rand_frame") != std::string::npos);
  CHECK(text.find("spline") != std::string::npos);
  REQUIRE(run("eval --dataset " + q(dataset()) + " --fits " + q(fits) + " --mode discovery --no-audio --out " +
              q(root() / "report_d.csv")) == 0);
  CHECK(slurp(root() / "report_d.csv").find("lls3") != std::string::npos);
  CHECK(run("eval --dataset " + q(root() / "nope") + " --fits " + q(fits)) == 2);
}

TEST_CASE("features", "[cli]") {
  std::vector<double> tone(144000), silence(144000, 0.0);
  for (std::size_t i = 0; i < tone.size(); ++i) tone[i] = 0.5 * std::sin(0.05 * static_cast<double>(i));
  fs::create_directories(root() / "wavs");
  write_wav(root() / "wavs" / "tone.wav", tone, 48000.0);
  write_wav(root() / "wavs" / "silence.wav", silence, 48000.0);
  const auto out = root() / "features";
  REQUIRE(run("features --in " + q(root() / "wavs") + " --out " + q(out)) == 0);
  const auto rms = mod_signal_from_csv(slurp(out / "tone_rms.csv"));
  CHECK(rms.values.size() == 1501);
  const auto sf = mod_signal_from_csv(slurp(out / "tone_sf.csv"));
  CHECK(sf.values.size() == 1501);
  for (double v : mod_signal_from_csv(slurp(out / "silence_rms.csv")).values) CHECK(v == 0.0);
  CHECK(run("features --in " + q(root() / "nothing.wav") + " --out " + q(out)) == 2);
}

TEST_CASE("plot", "[cli]") {
  const auto e = dataset() / "entry_0000";
  const auto a = root() / "a.svg", b = root() / "b.svg";
  REQUIRE(run("plot add=" + q(e / "add.csv") + " " + q(e / "env.json") + " --frames 251 --out " + q(a)) == 0);
  REQUIRE(run("plot add=" + q(e / "add.csv") + " " + q(e / "env.json") + " --frames 251 --out " + q(b)) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).find("<svg") != std::string::npos);
  CHECK(run("plot") == 1);
  CHECK(run("--bogus") == 1);
  CHECK(run("") == 1);
}
