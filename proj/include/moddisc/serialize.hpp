#pragma once

// JSON and CSV formats for curves, mod signals, fit configs and results.

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "moddisc/curves.hpp"
#include "moddisc/fit.hpp"
#include "moddisc/modsig.hpp"
#include "moddisc/synth.hpp"

namespace moddisc {

using Json = nlohmann::json;

/// {"degree": n, "knots": [x...], "points": [[[x, y], ...] per segment]}.
/// Doubles are written in shortest round-trip form, so the format is
/// lossless.
Json curve_to_json(const PiecewiseBezier& curve);
/// Throws ValidationError on malformed input (including junction points
/// that disagree between neighbouring segments).
PiecewiseBezier curve_from_json(const Json& j);

/// {"rate_hz": r, "values": [...]}
Json mod_signal_to_json(const ModSignal& s);
ModSignal mod_signal_from_json(const Json& j);

/// "# rate_hz=<r>" comment, "frame,value" header, 9 significant digits.
std::string mod_signal_to_csv(const ModSignal& s);
ModSignal mod_signal_from_csv(const std::string& text);

Json fit_config_to_json(const FitConfig& cfg);
/// Keys absent from j keep the values already in `base`.
FitConfig fit_config_from_json(const Json& j, FitConfig base = {});

Json fit_result_to_json(const FitResult& r, const FitConfig& cfg);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

/// Loads a mod signal from a curve JSON (rendered at `frames`), a mod-signal
/// JSON, or a mod-signal CSV, chosen by content.
ModSignal load_mod_signal(const std::filesystem::path& path, std::size_t frames,
                          double rate_hz = kDefaultControlRate);

/// Wavetable file: mono WAV of P * 1024 samples (P concatenated frames).
Wavetable load_wavetable_wav(const std::filesystem::path& path);
/// Writes the WAV and a "<stem>.json" sidecar {positions, frame_len}.
void save_wavetable(const std::filesystem::path& wav_path, const Wavetable& wt, double sample_rate);

}  // namespace moddisc
