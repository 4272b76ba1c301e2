#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace moddisc {

struct WavData {
  std::vector<double> samples;  // mono (channels averaged)
  double sample_rate = 0.0;
  int channels = 1;
  int bits = 0;
  bool is_float = false;
};

/// Reads RIFF/WAVE with PCM 16/24/32-bit or IEEE float 32/64-bit samples,
/// including WAVE_FORMAT_EXTENSIBLE. Throws IoError on anything else.
WavData read_wav(const std::filesystem::path& path);

/// Writes mono 32-bit float RIFF/WAVE.
void write_wav(const std::filesystem::path& path, std::span<const double> samples, double sample_rate);

/// Samples exactly as write_wav would store them (rounded to float32).
std::vector<double> quantize_float32(std::span<const double> samples);

}  // namespace moddisc
