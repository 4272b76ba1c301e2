#include "moddisc/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include <unistd.h>

#include "moddisc/error.hpp"
#include "moddisc/wav.hpp"

namespace moddisc {

namespace fs = std::filesystem;

std::size_t DatasetConfig::samples() const {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate));
}

void DatasetConfig::validate() const {
  if (entries < 1) throw ConfigError("dataset needs at least one entry");
  if (!(duration_s > 0.0)) throw ConfigError("duration must be positive");
  if (hop == 0 || samples() % hop != 0 || samples() < 2 * hop)
    throw ConfigError("duration * sample_rate must be a multiple of the hop (and span 2 hops)");
  if (midi_min > midi_max || midi_min < 0) throw ConfigError("invalid MIDI range");
  if (!(midi_to_hz(midi_max) < 0.45 * sample_rate)) throw ConfigError("MIDI range exceeds Nyquist");
  if (default_positions < 1) throw ConfigError("wavetable needs at least one position");
  filter.validate(sample_rate);
  curves.validate();
}

Json dataset_config_to_json(const DatasetConfig& c) {
  return Json{{"entries", c.entries},
              {"seed", c.seed},
              {"duration_s", c.duration_s},
              {"sample_rate", c.sample_rate},
              {"hop", c.hop},
              {"wavetable", c.wavetable},
              {"default_positions", c.default_positions},
              {"cutoff_min", c.filter.cutoff_min},
              {"cutoff_max", c.filter.cutoff_max},
              {"q_min", c.filter.q_min},
              {"q_max", c.filter.q_max},
              {"degree_min", c.curves.degree_min},
              {"degree_max", c.curves.degree_max},
              {"segments_min", c.curves.segments_min},
              {"segments_max", c.curves.segments_max},
              {"min_segment_fraction", c.curves.min_segment_fraction},
              {"midi_min", c.midi_min},
              {"midi_max", c.midi_max}};
}

DatasetConfig dataset_config_from_json(const Json& j, DatasetConfig c) {
  try {
    c.entries = j.value("entries", c.entries);
    c.seed = j.value("seed", c.seed);
    c.duration_s = j.value("duration_s", c.duration_s);
    c.sample_rate = j.value("sample_rate", c.sample_rate);
    c.hop = j.value("hop", c.hop);
    c.wavetable = j.value("wavetable", c.wavetable);
    c.default_positions = j.value("default_positions", c.default_positions);
    c.filter.cutoff_min = j.value("cutoff_min", c.filter.cutoff_min);
    c.filter.cutoff_max = j.value("cutoff_max", c.filter.cutoff_max);
    c.filter.q_min = j.value("q_min", c.filter.q_min);
    c.filter.q_max = j.value("q_max", c.filter.q_max);
    c.curves.degree_min = j.value("degree_min", c.curves.degree_min);
    c.curves.degree_max = j.value("degree_max", c.curves.degree_max);
    c.curves.segments_min = j.value("segments_min", c.curves.segments_min);
    c.curves.segments_max = j.value("segments_max", c.curves.segments_max);
    c.curves.min_segment_fraction = j.value("min_segment_fraction", c.curves.min_segment_fraction);
    c.midi_min = j.value("midi_min", c.midi_min);
    c.midi_max = j.value("midi_max", c.midi_max);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed dataset config: ") + e.what());
  }
  c.validate();
  return c;
}

Json entry_meta_to_json(const EntryMeta& m) {
  return Json{{"name", m.name},
              {"seed", m.seed},
              {"midi", m.midi},
              {"f0", m.f0},
              {"phase", m.phase},
              {"q", m.q},
              {"wavetable", m.wavetable},
              {"positions", m.positions},
              {"sample_rate", m.sample_rate},
              {"hop", m.hop},
              {"frames", m.frames},
              {"cutoff_min", m.filter.cutoff_min},
              {"cutoff_max", m.filter.cutoff_max},
              {"q_min", m.filter.q_min},
              {"q_max", m.filter.q_max}};
}

EntryMeta entry_meta_from_json(const Json& j) {
  try {
    EntryMeta m;
    m.name = j.value("name", std::string{});
    m.seed = j.value("seed", std::uint64_t{0});
    m.midi = j.value("midi", 0);
    m.f0 = j.at("f0").get<double>();
    m.phase = j.at("phase").get<double>();
    m.q = j.at("q").get<double>();
    m.wavetable = j.value("wavetable", std::string("default"));
    m.positions = j.value("positions", std::size_t{16});
    m.sample_rate = j.value("sample_rate", kDefaultSampleRate);
    m.hop = j.value("hop", kDefaultHop);
    m.frames = j.at("frames").get<std::size_t>();
    m.filter.cutoff_min = j.value("cutoff_min", m.filter.cutoff_min);
    m.filter.cutoff_max = j.value("cutoff_max", m.filter.cutoff_max);
    m.filter.q_min = j.value("q_min", m.filter.q_min);
    m.filter.q_max = j.value("q_max", m.filter.q_max);
    return m;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed entry metadata: ") + e.what());
  }
}

std::uint64_t entry_seed(std::uint64_t dataset_seed, std::size_t index) {
  std::uint64_t z = dataset_seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double midi_to_hz(int midi) { return 440.0 * std::pow(2.0, (midi - 69) / 12.0); }

DatasetEntry make_entry(const DatasetConfig& cfg, std::size_t index) {
  cfg.validate();
  DatasetEntry e;
  char name[32];
  std::snprintf(name, sizeof name, "entry_%04zu", index);
  e.meta.name = name;
  e.meta.seed = entry_seed(cfg.seed, index);
  std::mt19937_64 rng(e.meta.seed);
  e.add = random_mod_curve(rng, cfg.curves);
  e.sub = random_mod_curve(rng, cfg.curves);
  e.env = random_mod_curve(rng, cfg.curves);
  std::uniform_int_distribution<int> note(cfg.midi_min, cfg.midi_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  e.meta.midi = note(rng);
  e.meta.f0 = midi_to_hz(e.meta.midi);
  e.meta.phase = unit(rng);
  e.meta.q = cfg.filter.q_min * std::pow(cfg.filter.q_max / cfg.filter.q_min, unit(rng));
  e.meta.wavetable = cfg.wavetable;
  e.meta.positions = cfg.default_positions;
  e.meta.sample_rate = cfg.sample_rate;
  e.meta.hop = cfg.hop;
  e.meta.frames = cfg.frames();
  e.meta.filter = cfg.filter;
  return e;
}

Wavetable resolve_wavetable(const std::string& id, std::size_t default_positions) {
  if (id == "default") return default_wavetable(default_positions);
  if (!fs::exists(id)) throw IoError("wavetable file '" + id + "' not found");
  return load_wavetable_wav(id);
}

SynthPatch entry_patch(const EntryMeta& meta, const Wavetable& wt) {
  SynthPatch p;
  p.wavetable = wt;
  p.filter = meta.filter;
  p.f0 = meta.f0;
  p.phase = meta.phase;
  p.sample_rate = meta.sample_rate;
  p.hop = meta.hop;
  p.q = meta.q;
  return p;
}

ModSet entry_mods(const DatasetEntry& e) {
  const double rate = e.meta.sample_rate / static_cast<double>(e.meta.hop);
  return {render_spline(e.add, e.meta.frames, 1.0, rate), render_spline(e.sub, e.meta.frames, 1.0, rate),
          render_spline(e.env, e.meta.frames, 1.0, rate)};
}

std::vector<double> render_entry(const DatasetEntry& e, const Wavetable& wt) {
  return quantize_float32(mod_synth_render(entry_patch(e.meta, wt), entry_mods(e)));
}

namespace {

void write_entry(const DatasetEntry& e, const Wavetable& wt, const fs::path& dir) {
  fs::create_directories(dir);
  write_wav(dir / "audio.wav", render_entry(e, wt), e.meta.sample_rate);
  const ModSet mods = entry_mods(e);
  const std::pair<const char*, const PiecewiseBezier*> curves[] = {
      {"add", &e.add}, {"sub", &e.sub}, {"env", &e.env}};
  const ModSignal* sigs[] = {&mods.add, &mods.sub, &mods.env};
  for (std::size_t i = 0; i < 3; ++i) {
    write_json(dir / (std::string(curves[i].first) + ".json"), curve_to_json(*curves[i].second));
    write_text(dir / (std::string(curves[i].first) + ".csv"), mod_signal_to_csv(*sigs[i]));
  }
  write_json(dir / "meta.json", entry_meta_to_json(e.meta));
}

}  // namespace

void generate_dataset(const DatasetConfig& cfg, const fs::path& dir) {
  cfg.validate();
  const Wavetable wt = resolve_wavetable(cfg.wavetable, cfg.default_positions);
  fs::create_directories(dir);
  Json names = Json::array();
  for (std::size_t i = 0; i < cfg.entries; ++i) {
    const DatasetEntry e = make_entry(cfg, i);
    write_entry(e, wt, dir / e.meta.name);
    names.push_back(e.meta.name);
  }
  write_json(dir / "manifest.json", Json{{"format", 1}, {"config", dataset_config_to_json(cfg)}, {"entries", names}});
}

Dataset load_dataset(const fs::path& dir) {
  const Json manifest = read_json(dir / "manifest.json");
  Dataset d;
  d.dir = dir;
  try {
    d.config = dataset_config_from_json(manifest.at("config"));
    d.entries = manifest.at("entries").get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  }
  return d;
}

DatasetEntry load_entry(const fs::path& entry_dir) {
  DatasetEntry e;
  e.meta = entry_meta_from_json(read_json(entry_dir / "meta.json"));
  e.add = curve_from_json(read_json(entry_dir / "add.json"));
  e.sub = curve_from_json(read_json(entry_dir / "sub.json"));
  e.env = curve_from_json(read_json(entry_dir / "env.json"));
  return e;
}

std::vector<std::string> verify_dataset(const fs::path& dir) {
  const Dataset d = load_dataset(dir);
  const Wavetable wt = resolve_wavetable(d.config.wavetable, d.config.default_positions);
  const fs::path scratch = fs::temp_directory_path() / ("moddisc_verify_" + std::to_string(::getpid()));
  std::vector<std::string> bad;
  for (std::size_t i = 0; i < d.entries.size(); ++i) {
    const DatasetEntry e = make_entry(d.config, i);
    const fs::path fresh = scratch / e.meta.name;
    write_entry(e, wt, fresh);
    bool same = e.meta.name == d.entries[i];
    for (const char* f : {"audio.wav", "add.json", "sub.json", "env.json", "add.csv", "sub.csv", "env.csv", "meta.json"})
      same = same && read_text(fresh / f) == read_text(dir / d.entries[i] / f);
    if (!same) bad.push_back(d.entries[i]);
  }
  fs::remove_all(scratch);
  return bad;
}

}  // namespace moddisc
