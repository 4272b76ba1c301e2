#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "moddisc/dataset.hpp"
#include "moddisc/error.hpp"
#include "moddisc/evaluate.hpp"
#include "moddisc/wav.hpp"

using namespace moddisc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "moddisc_test_harness" / name;
  fs::remove_all(dir);
  fs::create_directories(dir.parent_path());
  return dir;
}

// The dataset is generated once and shared by the read-only tests.
const fs::path& shared_dataset() {
  static const fs::path dir = [] {
    const fs::path d = scratch("data");
    DatasetConfig cfg;
    cfg.entries = 8;
    cfg.seed = 3;
    generate_dataset(cfg, d);
    return d;
  }();
  return dir;
}

void copy_truth_as_fit(const Dataset& data, const fs::path& fits, const std::string& method) {
  for (const auto& name : data.entries) {
    const fs::path out = fits / method / name;
    fs::create_directories(out);
    for (const char* role : kRoles)
      fs::copy_file(data.dir / name / (std::string(role) + ".csv"), out / (std::string(role) + ".csv"),
                    fs::copy_options::overwrite_existing);
  }
}

}  // namespace

TEST_CASE("generated dataset layout", "[harness]") {
  const auto data = load_dataset(shared_dataset());
  REQUIRE(data.entries.size() == 8);
  CHECK(data.config.frames() == 1501);
  for (const auto& name : data.entries) {
    const auto w = read_wav(data.dir / name / "audio.wav");
    CHECK(w.samples.size() == 144000);
    CHECK(w.sample_rate == 48000.0);
    for (const char* f : {"add.json", "sub.json", "env.json", "add.csv", "sub.csv", "env.csv", "meta.json"})
      CHECK(fs::exists(data.dir / name / f));
    const auto e = load_entry(data.dir / name);
    for (const auto* c : {&e.add, &e.sub, &e.env}) CHECK(validate(*c).empty());
    CHECK(e.meta.frames == 1501);
    CHECK(e.meta.midi >= 33);
    CHECK(e.meta.midi <= 69);
    CHECK(e.meta.f0 == midi_to_hz(e.meta.midi));
    CHECK(e.meta.phase >= 0.0);
    CHECK(e.meta.phase < 1.0);
  }
}

TEST_CASE("stored audio re-renders exactly", "[harness]") {
  const auto data = load_dataset(shared_dataset());
  for (std::size_t i = 0; i < 2; ++i) {
    const auto e = load_entry(data.dir / data.entries[i]);
    const auto wt = resolve_wavetable(e.meta.wavetable, e.meta.positions);
    CHECK(render_entry(e, wt) == read_wav(data.dir / data.entries[i] / "audio.wav").samples);
  }
}

TEST_CASE("entry draws are deterministic and in range", "[harness]") {
  DatasetConfig cfg;
  cfg.seed = 42;
  const auto a = make_entry(cfg, 5), b = make_entry(cfg, 5), c = make_entry(cfg, 6);
  CHECK(a.meta.seed == b.meta.seed);
  CHECK(a.add == b.add);
  CHECK(a.meta.q == b.meta.q);
  CHECK(a.meta.seed != c.meta.seed);
  CHECK(entry_seed(42, 5) != entry_seed(43, 5));

  double qmin = 1e9, qmax = 0;
  for (std::size_t i = 0; i < 10000; ++i) {
    cfg.entries = 10000;
    const auto e = make_entry(cfg, i);
    qmin = std::min(qmin, e.meta.q);
    qmax = std::max(qmax, e.meta.q);
  }
  CHECK(qmin >= 0.70710678118654752);
  CHECK(qmax <= 4.0);
  CHECK(qmin < 0.75);
  CHECK(qmax > 3.8);
}

TEST_CASE("dataset config validation", "[harness]") {
  DatasetConfig cfg;
  cfg.duration_s = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.midi_min = 80;
  cfg.midi_max = 60;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_THROWS_AS(resolve_wavetable("/nonexistent/table.wav", 16), IoError);
  const auto j = dataset_config_to_json(DatasetConfig{});
  CHECK(dataset_config_to_json(dataset_config_from_json(j)).dump() == j.dump());
}

TEST_CASE("verification detects tampering", "[harness]") {
  const fs::path d = scratch("tamper");
  DatasetConfig cfg;
  cfg.entries = 2;
  cfg.duration_s = 0.5;
  generate_dataset(cfg, d);
  CHECK(verify_dataset(d).empty());
  {
    std::ofstream out(d / "entry_0001" / "add.csv", std::ios::app);
    out << "\n";
  }
  const auto bad = verify_dataset(d);
  REQUIRE(bad.size() == 1);
  CHECK(bad[0] == "entry_0001");
}

TEST_CASE("oracle fits score perfectly", "[harness]") {
  const auto data = load_dataset(shared_dataset());
  const fs::path fits = scratch("fits_oracle");
  copy_truth_as_fit(data, fits, "oracle");
  EvalOptions opt;
  opt.audio_metrics = false;
  const auto rep = evaluate(data, fits, opt);
  CHECK(rep.skipped.empty());
  // per entry: 3 roles for the oracle plus 3 for each of two baselines
  CHECK(rep.rows.size() == 8 * 3 * 3);
  for (const auto& r : rep.rows) {
    if (r.method != "oracle") continue;
    CHECK(r.proc == "raw");
    CHECK(r.dist.l1 == 0.0);
    CHECK(r.dist.grad_l1 == 0.0);
    CHECK(r.dist.frechet == 0.0);
    if (std::isfinite(r.dist.pcc)) CHECK(r.dist.pcc == Catch::Approx(1.0).epsilon(1e-12));
  }

  opt.mode = FitMode::Discovery;
  const auto disc = evaluate(data, fits, opt);
  CHECK(disc.rows.size() == 8 * 3 * 3 * 2);
  for (const auto& r : disc.rows) {
    if (r.method != "oracle") continue;
    CHECK(r.dist.l1 < 1e-9);
    CHECK(r.lls_residual < 1e-9);
  }
  const auto csv = report_to_csv(disc);
  CHECK(csv.rfind("#", 0) == 0);
}

TEST_CASE("random frame baseline is uncorrelated", "[harness]") {
  const auto data = load_dataset(shared_dataset());
  const fs::path fits = scratch("fits_none");
  fs::create_directories(fits / "none");
  EvalOptions opt;
  opt.audio_metrics = false;
  opt.methods = {"none"};
  const auto rep = evaluate(data, fits, opt);
  CHECK(rep.skipped.size() == 8);
  double sum = 0;
  int n = 0;
  for (const auto& r : rep.rows) {
    CHECK(r.method != "none");
    if (r.method == "rand_frame") {
      sum += r.dist.pcc;
      ++n;
    }
  }
  REQUIRE(n == 24);
  CHECK(std::abs(sum / n) < 0.05);
}

TEST_CASE("missing fits are skipped and aggregates exclude them", "[harness]") {
  const auto data = load_dataset(shared_dataset());
  const fs::path fits = scratch("fits_partial");
  copy_truth_as_fit(data, fits, "oracle");
  fs::remove_all(fits / "oracle" / data.entries[3]);
  EvalOptions opt;
  opt.audio_metrics = false;
  opt.baselines = false;
  const auto rep = evaluate(data, fits, opt);
  REQUIRE(rep.skipped.size() == 1);
  CHECK(rep.skipped[0].find(data.entries[3]) != std::string::npos);
  CHECK(rep.rows.size() == 7 * 3);
  bool found = false;
  for (const auto& a : rep.aggregates) {
    if (a.entry == "mean" && a.role == "all" && a.method == "oracle") {
      found = true;
      CHECK(a.dist.l1 == 0.0);
    }
    if (a.entry == "std" && a.role == "add") CHECK(a.dist.l1 == 0.0);
  }
  CHECK(found);
}

TEST_CASE("aggregates use mean and sample std", "[harness]") {
  std::vector<MetricRow> rows(3);
  const double vals[] = {1.0, 2.0, 4.0};
  for (int i = 0; i < 3; ++i) {
    rows[i].entry = "e" + std::to_string(i);
    rows[i].role = "add";
    rows[i].method = "m";
    rows[i].proc = "raw";
    rows[i].dist.l1 = vals[i];
    rows[i].dist.pcc = i == 1 ? std::nan("") : vals[i];
  }
  const auto agg = aggregate_rows(rows);
  for (const auto& a : agg) {
    if (a.role != "add") continue;
    if (a.entry == "mean") {
      CHECK(a.dist.l1 == Catch::Approx(7.0 / 3.0));
      CHECK(a.dist.pcc == Catch::Approx(2.5));
    } else {
      CHECK(a.dist.l1 == Catch::Approx(std::sqrt(((4.0 / 3) * (4.0 / 3) + (1.0 / 3) * (1.0 / 3) + (5.0 / 3) * (5.0 / 3)) / 2)));
      CHECK(a.dist.pcc == Catch::Approx(std::sqrt(4.5)));
    }
  }
}
