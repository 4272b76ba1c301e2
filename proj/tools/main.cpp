// moddisc command-line harness: gen-data, render, fit, eval, features, plot.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "moddisc/dataset.hpp"
#include "moddisc/error.hpp"
#include "moddisc/evaluate.hpp"
#include "moddisc/fit.hpp"
#include "moddisc/metrics.hpp"
#include "moddisc/serialize.hpp"
#include "moddisc/svg.hpp"
#include "moddisc/wav.hpp"

namespace fs = std::filesystem;
using namespace moddisc;

namespace {

std::mutex log_mutex;

void log_line(const std::string& s) {
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << s << "\n";
}

std::size_t worker_count() {
  const char* env = std::getenv("MODDISC_WORKERS");
  if (env == nullptr || *env == '\0') return std::max(1u, std::thread::hardware_concurrency());
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError("MODDISC_WORKERS must be a positive integer");
  return static_cast<std::size_t>(n);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = std::min(s.find(',', start), s.size());
    if (comma > start) out.push_back(s.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

// ---- gen-data ---------------------------------------------------------

struct GenArgs {
  std::string out;
  std::string config;
  std::size_t entries = 0;
  std::uint64_t seed = 0;
  std::string wavetable;
  double duration = 0.0;
  bool verify = false;
  CLI::App* app = nullptr;
};

int run_gen_data(const GenArgs& a) {
  if (a.verify) {
    const auto bad = verify_dataset(a.out);
    if (!bad.empty()) {
      for (const auto& b : bad) std::cerr << "mismatch: " << b << "\n";
      throw ValidationError(std::to_string(bad.size()) + " entries differ from their regeneration");
    }
    std::cout << "verified " << load_dataset(a.out).entries.size() << " entries\n";
    return 0;
  }
  DatasetConfig cfg;
  if (!a.config.empty()) cfg = dataset_config_from_json(read_json(a.config));
  if (a.app->count("--entries")) cfg.entries = a.entries;
  if (a.app->count("--seed")) cfg.seed = a.seed;
  if (a.app->count("--wavetable")) cfg.wavetable = a.wavetable;
  if (a.app->count("--duration")) cfg.duration_s = a.duration;
  cfg.validate();
  generate_dataset(cfg, a.out);
  std::cout << "wrote " << cfg.entries << " entries to " << a.out << "\n";
  return 0;
}

// ---- patch options shared by render and fit ---------------------------

struct PatchArgs {
  std::string meta;
  std::optional<double> f0, q, phase;
  std::string wavetable;
  std::size_t positions = 16;

  void add(CLI::App* app) {
    app->add_option("--meta", meta, "Entry meta.json supplying f0, phase, Q and wavetable");
    app->add_option("--f0", f0, "Fundamental in Hz (overrides --meta)");
    app->add_option("--q", q, "Filter Q (overrides --meta)");
    app->add_option("--phase", phase, "Initial phase in turns (overrides --meta)");
    app->add_option("--wavetable", wavetable, "'default' or a wavetable WAV (overrides --meta)");
    app->add_option("--positions", positions, "Positions of the default wavetable")->check(CLI::PositiveNumber);
  }

  EntryMeta resolve() const {
    EntryMeta m;
    m.wavetable = "default";
    m.positions = positions;
    m.q = FilterRange{}.q_min;
    m.f0 = 0.0;
    if (!meta.empty()) m = entry_meta_from_json(read_json(meta));
    if (f0) m.f0 = *f0;
    if (q) m.q = *q;
    if (phase) m.phase = *phase;
    if (!wavetable.empty()) m.wavetable = wavetable;
    if (!(m.f0 > 0.0)) throw ConfigError("an f0 is required (--f0 or --meta)");
    return m;
  }
};

// ---- render -----------------------------------------------------------

struct RenderArgs {
  std::string add, sub, env, out;
  double duration = 3.0;
  PatchArgs patch;
  CLI::App* app = nullptr;
};

int run_render(const RenderArgs& a) {
  EntryMeta m = a.patch.resolve();
  if (a.patch.meta.empty() || a.app->count("--duration")) {
    const auto samples = static_cast<std::size_t>(std::llround(a.duration * m.sample_rate));
    if (samples % m.hop != 0 || samples < m.hop) throw ConfigError("duration must span whole hops");
    m.frames = frames_for_samples(samples, m.hop);
  }
  const double rate = m.sample_rate / static_cast<double>(m.hop);
  const ModSet mods{load_mod_signal(a.add, m.frames, rate), load_mod_signal(a.sub, m.frames, rate),
                    load_mod_signal(a.env, m.frames, rate)};
  const Wavetable wt = resolve_wavetable(m.wavetable, m.positions);
  write_wav(a.out, quantize_float32(mod_synth_render(entry_patch(m, wt), mods)), m.sample_rate);
  return 0;
}

// ---- fit --------------------------------------------------------------

struct FitArgs {
  std::string target, out, config, dataset, params_list;
  std::string param, mode;
  long steps = 0;
  double lr = 0.0;
  std::uint64_t seed = 0;
  PatchArgs patch;
  CLI::App* app = nullptr;
};

FitConfig fit_config(const FitArgs& a) {
  FitConfig cfg;
  if (!a.config.empty()) cfg = fit_config_from_json(read_json(a.config));
  if (a.app->count("--param")) cfg.parameterization = parse_parameterization(a.param);
  if (a.app->count("--mode")) cfg.mode = parse_fit_mode(a.mode);
  if (a.app->count("--steps")) cfg.steps = a.steps;
  if (a.app->count("--lr")) cfg.lr_mods = a.lr;
  if (a.app->count("--seed")) cfg.seed = a.seed;
  cfg.validate();
  return cfg;
}

// Brings the target to the patch rate and a whole number of hops.
std::vector<double> prepare_target(const WavData& wav, const EntryMeta& m, const std::string& label) {
  std::vector<double> x = wav.samples;
  if (wav.sample_rate != m.sample_rate) {
    log_line("warning: " + label + " is " + std::to_string(wav.sample_rate) + " Hz; resampling linearly");
    const double ratio = wav.sample_rate / m.sample_rate;
    const auto n = static_cast<std::size_t>(std::floor(static_cast<double>(x.size() - 1) / ratio)) + 1;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double pos = static_cast<double>(i) * ratio;
      const auto k = std::min(static_cast<std::size_t>(pos), x.size() - 1);
      const double w = pos - static_cast<double>(k);
      y[i] = k + 1 < x.size() ? (1.0 - w) * x[k] + w * x[k + 1] : x[k];
    }
    x = std::move(y);
  }
  const std::size_t expected = static_cast<std::size_t>(std::llround(3.0 * m.sample_rate));
  if (x.size() != expected)
    log_line("warning: " + label + " has " + std::to_string(x.size()) + " samples, expected " +
             std::to_string(expected));
  const std::size_t keep = x.size() / m.hop * m.hop;
  if (keep < 2 * m.hop) throw ValidationError(label + " is too short");
  if (keep != x.size()) {
    log_line("warning: trimming " + label + " to " + std::to_string(keep) + " samples");
    x.resize(keep);
  }
  return x;
}

int write_fit(const fs::path& out, const FitResult& r, const FitConfig& cfg, const SynthPatch& patch) {
  fs::create_directories(out);
  const std::pair<const char*, const ModSignal*> sigs[] = {
      {"add", &r.mods.add}, {"sub", &r.mods.sub}, {"env", &r.mods.env}};
  for (std::size_t i = 0; i < 3; ++i) {
    write_text(out / (std::string(sigs[i].first) + ".csv"), mod_signal_to_csv(*sigs[i].second));
    write_json(out / (std::string(sigs[i].first) + ".json"), mod_signal_to_json(*sigs[i].second));
    if (!r.curves.empty())
      write_json(out / (std::string(sigs[i].first) + ".curve.json"), curve_to_json(r.curves[i]));
  }
  SynthPatch p = patch;
  if (r.wavetable) {
    p.wavetable = *r.wavetable;
    save_wavetable(out / "wavetable.wav", *r.wavetable, patch.sample_rate);
  }
  if (cfg.mode == FitMode::Discovery) p.q = r.q;
  write_wav(out / "render.wav", quantize_float32(mod_synth_render(p, r.mods)), patch.sample_rate);
  std::string loss = "step,loss\n";
  for (std::size_t s = 0; s < r.loss_history.size(); ++s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%zu,%.9g\n", s, r.loss_history[s]);
    loss += buf;
  }
  write_text(out / "loss.csv", loss);
  write_text(out / "plot.svg", plot_svg({{"add", r.mods.add}, {"sub", r.mods.sub}, {"env", r.mods.env}}));
  write_json(out / "result.json", fit_result_to_json(r, cfg));
  return r.diverged ? NumericalError("").exit_code() : 0;
}

int fit_one(const fs::path& target, const EntryMeta& m, FitConfig cfg, const fs::path& out) {
  const WavData wav = read_wav(target);
  const std::vector<double> x = prepare_target(wav, m, target.string());
  const SynthPatch patch = entry_patch(m, resolve_wavetable(m.wavetable, m.positions));
  const FitResult r = fit(x, patch, cfg);
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s [%s/%s]: loss %.4g -> %.4g (best %.4g at step %ld) in %.1fs%s",
                out.string().c_str(), to_string(cfg.parameterization).c_str(), to_string(cfg.mode).c_str(),
                r.initial_loss, r.final_loss, r.best_loss, r.best_step, r.seconds,
                r.diverged ? " DIVERGED" : "");
  log_line(buf);
  return write_fit(out, r, cfg, patch);
}

int run_fit(const FitArgs& a) {
  const FitConfig base = fit_config(a);
  if (a.dataset.empty()) {
    if (a.target.empty()) throw ConfigError("fit needs --target or --dataset");
    return fit_one(a.target, a.patch.resolve(), base, a.out);
  }
  const Dataset d = load_dataset(a.dataset);
  std::vector<Parameterization> params;
  if (a.params_list.empty()) {
    params = {base.parameterization};
  } else {
    for (const auto& p : split_list(a.params_list)) params.push_back(parse_parameterization(p));
  }
  struct Job {
    std::string entry;
    Parameterization param;
  };
  std::vector<Job> jobs;
  for (const auto& e : d.entries)
    for (auto p : params) jobs.push_back({e, p});
  std::atomic<std::size_t> next{0};
  std::atomic<int> worst{0};
  std::mutex err_mutex;
  std::optional<std::string> failure;
  int failure_code = 0;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const Job& job = jobs[j];
      try {
        const fs::path entry_dir = d.dir / job.entry;
        const EntryMeta m = entry_meta_from_json(read_json(entry_dir / "meta.json"));
        FitConfig cfg = base;
        cfg.parameterization = job.param;
        cfg.seed = entry_seed(base.seed ^ m.seed, static_cast<std::size_t>(job.param));
        const int code = fit_one(entry_dir / "audio.wav", m, cfg, fs::path(a.out) / to_string(job.param) / job.entry);
        int prev = worst.load();
        while (code > prev && !worst.compare_exchange_weak(prev, code)) {
        }
      } catch (const Error& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!failure) {
          failure = job.entry + ": " + e.what();
          failure_code = e.exit_code();
        }
      }
    }
  };
  const std::size_t n = std::min(worker_count(), jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) {
    std::cerr << "error: " << *failure << "\n";
    return failure_code;
  }
  return worst.load();
}

// ---- eval -------------------------------------------------------------

struct EvalArgs {
  std::string dataset, fits, out, mode = "extraction", methods;
  bool no_baselines = false;
  bool no_audio = false;
};

int run_eval(const EvalArgs& a) {
  EvalOptions opt;
  opt.mode = parse_fit_mode(a.mode);
  opt.methods = split_list(a.methods);
  opt.baselines = !a.no_baselines;
  opt.audio_metrics = !a.no_audio;
  const MetricReport rep = evaluate(load_dataset(a.dataset), a.fits, opt);
  const std::string csv = report_to_csv(rep);
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    write_text(a.out, csv);
  }
  if (!rep.skipped.empty()) std::cerr << rep.skipped.size() << " fits skipped\n";
  return 0;
}

// ---- features ---------------------------------------------------------

struct FeaturesArgs {
  std::string in, out;
};

int run_features(const FeaturesArgs& a) {
  std::vector<fs::path> files;
  if (fs::is_directory(a.in)) {
    for (const auto& e : fs::recursive_directory_iterator(a.in))
      if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else if (fs::exists(a.in)) {
    files.push_back(a.in);
  } else {
    throw IoError("'" + a.in + "' not found");
  }
  fs::create_directories(a.out);
  for (const auto& f : files) {
    const WavData wav = read_wav(f);
    FeatureSpec spec;
    spec.hop = control_hop(spec.rate_hz, wav.sample_rate);
    std::string stem = fs::relative(f, fs::is_directory(a.in) ? fs::path(a.in) : f.parent_path()).string();
    stem = stem.substr(0, stem.size() - f.extension().string().size());
    std::replace(stem.begin(), stem.end(), '/', '_');
    write_text(fs::path(a.out) / (stem + "_rms.csv"), mod_signal_to_csv(rms_frames(wav.samples, spec)));
    write_text(fs::path(a.out) / (stem + "_sf.csv"), mod_signal_to_csv(spectral_flatness_frames(wav.samples, spec)));
  }
  std::cout << "wrote features for " << files.size() << " files\n";
  return 0;
}

// ---- plot -------------------------------------------------------------

struct PlotArgs {
  std::vector<std::string> curves;
  std::string out;
  std::size_t frames = 1501;
};

int run_plot(const PlotArgs& a) {
  if (a.curves.empty()) throw ConfigError("plot needs at least one curve file");
  std::vector<std::pair<std::string, ModSignal>> sigs;
  for (const auto& spec : a.curves) {
    const auto eq = spec.find('=');
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    const std::string label = eq == std::string::npos ? fs::path(path).stem().string() : spec.substr(0, eq);
    sigs.emplace_back(label, load_mod_signal(path, a.frames));
  }
  const std::string svg = plot_svg(sigs);
  if (a.out.empty()) {
    std::cout << svg;
  } else {
    write_text(a.out, svg);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modulation discovery: fit interpretable mod curves to audio and evaluate them"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  gen.app = g;
  g->add_option("--out", gen.out, "Dataset directory")->required();
  g->add_option("--config", gen.config, "Dataset config JSON");
  g->add_option("--entries", gen.entries, "Number of entries")->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed, "Dataset seed");
  g->add_option("--wavetable", gen.wavetable, "'default' or a wavetable WAV");
  g->add_option("--duration", gen.duration, "Seconds per entry");
  g->add_flag("--verify", gen.verify, "Check an existing dataset against its regeneration");

  RenderArgs ren;
  auto* r = app.add_subcommand("render", "Render audio from three mod curves");
  ren.app = r;
  r->add_option("--add", ren.add, "Wavetable position curve (curve JSON, signal JSON or CSV)")->required();
  r->add_option("--sub", ren.sub, "Filter cutoff curve")->required();
  r->add_option("--env", ren.env, "Amplitude curve")->required();
  r->add_option("--out", ren.out, "Output WAV")->required();
  r->add_option("--duration", ren.duration, "Seconds (default 3, or the meta frame count)");
  ren.patch.add(r);

  FitArgs fa;
  auto* f = app.add_subcommand("fit", "Fit mod curves to a target WAV or to every entry of a dataset");
  fa.app = f;
  f->add_option("--target", fa.target, "Target WAV");
  f->add_option("--dataset", fa.dataset, "Dataset directory (batch mode)");
  f->add_option("--out", fa.out, "Output directory")->required();
  f->add_option("--config", fa.config, "Fit config JSON");
  f->add_option("--param", fa.param, "frame, lpf or spline");
  f->add_option("--params", fa.params_list, "Batch mode: comma-separated parameterizations");
  f->add_option("--mode", fa.mode, "extraction or discovery");
  f->add_option("--steps", fa.steps, "Optimization steps")->check(CLI::NonNegativeNumber);
  f->add_option("--lr", fa.lr, "Mod-signal learning rate")->check(CLI::PositiveNumber);
  f->add_option("--seed", fa.seed, "Fit seed");
  fa.patch.add(f);
  f->footer("Batch fits run in a pool of MODDISC_WORKERS threads (default: hardware concurrency).");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Compare fits with dataset ground truth");
  e->add_option("--dataset", ev.dataset, "Dataset directory")->required();
  e->add_option("--fits", ev.fits, "Fits directory (<method>/<entry>/)")->required();
  e->add_option("--out", ev.out, "Report CSV (stdout if omitted)");
  e->add_option("--mode", ev.mode, "extraction (raw) or discovery (lls1, lls3)");
  e->add_option("--methods", ev.methods, "Comma-separated method directories (default: all)");
  e->add_flag("--no-baselines", ev.no_baselines, "Skip random baselines");
  e->add_flag("--no-audio", ev.no_audio, "Skip MSS and MFCC metrics");

  FeaturesArgs fe;
  auto* ft = app.add_subcommand("features", "Frame-rate RMS and spectral flatness CSVs");
  ft->add_option("--in", fe.in, "WAV file or directory")->required();
  ft->add_option("--out", fe.out, "Output directory")->required();

  PlotArgs pl;
  auto* p = app.add_subcommand("plot", "SVG line plots of mod curves");
  p->add_option("curves", pl.curves, "Curve files, optionally label=path");
  p->add_option("--out", pl.out, "Output SVG (stdout if omitted)");
  p->add_option("--frames", pl.frames, "Frames for curve JSON input")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*g) return run_gen_data(gen);
    if (*r) return run_render(ren);
    if (*f) return run_fit(fa);
    if (*e) return run_eval(ev);
    if (*ft) return run_features(fe);
    if (*p) return run_plot(pl);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return err.exit_code();
  } catch (const std::filesystem::filesystem_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 1;
}
