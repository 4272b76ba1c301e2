#pragma once

// Synthetic datasets: three random Bezier mod curves per entry rendered
// through the synth with a random pitch, phase and Q.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "moddisc/curves.hpp"
#include "moddisc/serialize.hpp"
#include "moddisc/synth.hpp"

namespace moddisc {

struct DatasetConfig {
  std::size_t entries = 8;
  std::uint64_t seed = 0;
  double duration_s = 3.0;
  double sample_rate = kDefaultSampleRate;
  std::size_t hop = kDefaultHop;
  /// "default" for the built-in table, otherwise a wavetable WAV path.
  std::string wavetable = "default";
  std::size_t default_positions = 16;
  FilterRange filter;
  CurveGenConfig curves;
  /// f0 is drawn uniformly from these MIDI notes (A1..A4).
  int midi_min = 33;
  int midi_max = 69;

  std::size_t samples() const;
  std::size_t frames() const { return frames_for_samples(samples(), hop); }
  void validate() const;
};

Json dataset_config_to_json(const DatasetConfig& cfg);
DatasetConfig dataset_config_from_json(const Json& j, DatasetConfig base = {});

struct EntryMeta {
  std::string name;
  std::uint64_t seed = 0;
  int midi = 0;
  double f0 = 0.0;
  double phase = 0.0;
  double q = 0.0;
  std::string wavetable = "default";
  std::size_t positions = 16;  // used by "default"
  double sample_rate = kDefaultSampleRate;
  std::size_t hop = kDefaultHop;
  std::size_t frames = 0;
  FilterRange filter;
};

Json entry_meta_to_json(const EntryMeta& m);
EntryMeta entry_meta_from_json(const Json& j);

struct DatasetEntry {
  EntryMeta meta;
  PiecewiseBezier add, sub, env;
};

/// Per-entry seed derived from the dataset seed (SplitMix64).
std::uint64_t entry_seed(std::uint64_t dataset_seed, std::size_t index);
double midi_to_hz(int midi);

/// Deterministic draw of entry `index`.
DatasetEntry make_entry(const DatasetConfig& cfg, std::size_t index);

/// Throws IoError for a missing wavetable file.
Wavetable resolve_wavetable(const std::string& id, std::size_t default_positions);

SynthPatch entry_patch(const EntryMeta& meta, const Wavetable& wt);
ModSet entry_mods(const DatasetEntry& e);
/// Float32-quantized render, exactly as stored in audio.wav.
std::vector<double> render_entry(const DatasetEntry& e, const Wavetable& wt);

/// Writes manifest.json and one entry_XXXX directory per entry holding
/// audio.wav, add/sub/env curve JSON and CSV, and meta.json.
void generate_dataset(const DatasetConfig& cfg, const std::filesystem::path& dir);

struct Dataset {
  std::filesystem::path dir;
  DatasetConfig config;
  std::vector<std::string> entries;
};
Dataset load_dataset(const std::filesystem::path& dir);
DatasetEntry load_entry(const std::filesystem::path& entry_dir);

/// Regenerates every entry from the manifest and compares it byte for byte
/// with the stored files. Returns the names of entries that differ.
std::vector<std::string> verify_dataset(const std::filesystem::path& dir);

}  // namespace moddisc
