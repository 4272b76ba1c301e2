#include "moddisc/wav.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "moddisc/error.hpp"

namespace moddisc {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

namespace {

constexpr std::uint16_t kPcm = 1;
constexpr std::uint16_t kFloat = 3;
constexpr std::uint16_t kExtensible = 0xFFFE;

template <class T>
T read_le(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = " in '" + path.string() + "'";
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw IoError("not a RIFF/WAVE file" + where);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = read_le<std::uint32_t>(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || size > avail) throw IoError("truncated fmt chunk" + where);
      format = read_le<std::uint16_t>(chunk + 8);
      channels = read_le<std::uint16_t>(chunk + 10);
      rate = read_le<std::uint32_t>(chunk + 12);
      bits = read_le<std::uint16_t>(chunk + 22);
      if (format == kExtensible) {
        if (size < 40) throw IoError("truncated extensible fmt chunk" + where);
        format = read_le<std::uint16_t>(chunk + 8 + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = std::min<std::size_t>(size, avail);
    }
    pos = body + size + (size & 1u);
  }
  if (channels == 0 || rate == 0) throw IoError("missing or invalid fmt chunk" + where);
  if (data == nullptr) throw IoError("missing data chunk" + where);

  const bool pcm_ok = format == kPcm && (bits == 16 || bits == 24 || bits == 32);
  const bool float_ok = format == kFloat && (bits == 32 || bits == 64);
  if (!pcm_ok && !float_ok)
    throw IoError("unsupported sample format (format " + std::to_string(format) + ", " +
                  std::to_string(bits) + " bits)" + where);

  const std::size_t width = bits / 8;
  const std::size_t frame_bytes = width * channels;
  const std::size_t frames = data_size / frame_bytes;
  WavData out;
  out.sample_rate = rate;
  out.channels = channels;
  out.bits = bits;
  out.is_float = format == kFloat;
  out.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + f * frame_bytes + c * width;
      double v = 0.0;
      if (format == kFloat) {
        v = bits == 32 ? static_cast<double>(read_le<float>(p)) : read_le<double>(p);
      } else if (bits == 16) {
        v = read_le<std::int16_t>(p) / 32768.0;
      } else if (bits == 24) {
        std::int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
        if (s & 0x800000) s -= 0x1000000;
        v = s / 8388608.0;
      } else {
        v = read_le<std::int32_t>(p) / 2147483648.0;
      }
      acc += v;
    }
    out.samples[f] = acc / channels;
  }
  return out;
}

void write_wav(const std::filesystem::path& path, std::span<const double> samples, double sample_rate) {
  if (!(sample_rate > 0.0) || sample_rate != std::floor(sample_rate))
    throw ConfigError("WAV sample rate must be a positive integer");
  for (double v : samples)
    if (!std::isfinite(v)) throw NumericalError("refusing to write non-finite audio to '" + path.string() + "'");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  const auto rate = static_cast<std::uint32_t>(sample_rate);
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 4);
  out.write("RIFF", 4);
  put<std::uint32_t>(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  put<std::uint32_t>(out, 16);
  put<std::uint16_t>(out, kFloat);
  put<std::uint16_t>(out, 1);
  put<std::uint32_t>(out, rate);
  put<std::uint32_t>(out, rate * 4);
  put<std::uint16_t>(out, 4);
  put<std::uint16_t>(out, 32);
  out.write("data", 4);
  put<std::uint32_t>(out, data_bytes);
  for (double v : samples) put<float>(out, static_cast<float>(v));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<double> quantize_float32(std::span<const double> samples) {
  std::vector<double> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) out[i] = static_cast<float>(samples[i]);
  return out;
}

}  // namespace moddisc
