#pragma once

// The differentiable modulation synth: wavetable oscillator with modulated
// position -> time-varying resonant low-pass biquad -> amplitude envelope.
// Forward functions are paired with explicit vector-Jacobian products.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "moddisc/modsig.hpp"

namespace moddisc {

inline constexpr std::size_t kWavetableFrameLength = 1024;
inline constexpr double kDefaultSampleRate = 48000.0;
inline constexpr std::size_t kDefaultHop = 96;

class Wavetable {
 public:
  Wavetable() = default;
  /// data holds positions * frame_length samples, row-major.
  Wavetable(std::size_t positions, std::vector<double> data, bool learnable = false,
            std::size_t frame_length = kWavetableFrameLength);

  std::size_t positions() const noexcept { return positions_; }
  std::size_t frame_length() const noexcept { return frame_length_; }
  bool learnable() const noexcept { return learnable_; }
  void set_learnable(bool on) noexcept { learnable_ = on; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> frame(std::size_t p) const;

  friend bool operator==(const Wavetable&, const Wavetable&) = default;

 private:
  std::size_t positions_ = 0;
  std::size_t frame_length_ = kWavetableFrameLength;
  std::vector<double> data_;
  bool learnable_ = false;
};

/// Synthetic default: `positions` frames morphing from a sine to a
/// band-limited saw by interpolating harmonic amplitudes, scaled so the
/// whole table peaks at 1.
Wavetable default_wavetable(std::size_t positions = 16);

struct FilterRange {
  double cutoff_min = 100.0;
  double cutoff_max = 8000.0;
  double q_min = 0.70710678118654752;
  double q_max = 4.0;

  void validate(double sample_rate) const;
};

struct SynthPatch {
  Wavetable wavetable;
  FilterRange filter;
  double f0 = 220.0;
  double phase = 0.0;  // turns, [0, 1)
  double sample_rate = kDefaultSampleRate;
  std::size_t hop = kDefaultHop;
  double q = 0.70710678118654752;

  double control_rate() const noexcept { return sample_rate / static_cast<double>(hop); }
  void validate() const;
};

/// Zeroes harmonics above 0.9 * fs / 2 for a table read at f0 (each frame is
/// one period, so DFT bin h is harmonic h). A fixed orthogonal projection:
/// its own adjoint.
Wavetable antialias_wavetable(const Wavetable& wt, double f0, double sample_rate);
/// Highest harmonic kept by antialias_wavetable.
std::size_t antialias_harmonic_limit(double f0, double sample_rate, std::size_t frame_length);
/// Applies the same projection to a raw data buffer (positions x frame_length).
std::vector<double> antialias_data(std::span<const double> data, std::size_t frame_length,
                                   std::size_t max_harmonic);

/// phase[n + 1] = frac(phase[n] + f0 / fs), starting at phase0.
std::vector<double> oscillator_phase(double f0, double phase0, std::size_t n_samples,
                                     double sample_rate);

/// Affine map of mod values in [0, 1] to positions m * (P - 1).
std::vector<double> map_mod_to_position(std::span<const double> mod, std::size_t positions);

/// Bilinear wavetable read at position mod[n] * (P - 1) and phase[n] * L.
std::vector<double> wavetable_osc(const Wavetable& wt, std::span<const double> mod_audio,
                                  double f0, double phase0, double sample_rate);

struct WavetableOscGrad {
  std::vector<double> mod;    // per audio sample
  std::vector<double> table;  // positions x frame_length
};
WavetableOscGrad wavetable_osc_vjp(const Wavetable& wt, std::span<const double> mod_audio,
                                   double f0, double phase0, double sample_rate,
                                   std::span<const double> upstream, bool want_table);

/// Normalized biquad coefficients; a0 is divided out.
struct BiquadCoeffs {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0, a1 = 0.0, a2 = 0.0;
};

/// Cookbook low-pass. Throws DomainError unless 0 < fc < fs / 2 and Q > 0.
BiquadCoeffs biquad_lp_coeffs(double cutoff_hz, double q, double sample_rate);

/// Partial derivatives of the five coefficients w.r.t. cutoff and Q.
struct BiquadCoeffsJacobian {
  BiquadCoeffs d_cutoff;
  BiquadCoeffs d_q;
};
BiquadCoeffsJacobian biquad_lp_jacobian(double cutoff_hz, double q, double sample_rate);

/// Magnitude of H(e^{i w}) at frequency f.
double biquad_magnitude(const BiquadCoeffs& c, double freq_hz, double sample_rate);

/// Largest pole radius of 1 + a1 z^-1 + a2 z^-2.
double biquad_pole_radius(const BiquadCoeffs& c);

/// Direct-form recursion with per-sample coefficients linearly interpolated
/// between control frames (frames.size() == x.size() / hop + 1, and
/// x.size() must be a multiple of hop). Zero initial state.
std::vector<double> tv_biquad(std::span<const double> x, std::span<const BiquadCoeffs> frames,
                              std::size_t hop);

struct TvBiquadGrad {
  std::vector<double> x;
  std::vector<BiquadCoeffs> frames;
};
TvBiquadGrad tv_biquad_vjp(std::span<const double> x, std::span<const BiquadCoeffs> frames,
                           std::size_t hop, std::span<const double> y,
                           std::span<const double> upstream);

/// f_c = f_min * (f_max / f_min)^m.
std::vector<double> map_mod_to_cutoff(std::span<const double> m, const FilterRange& range);
double cutoff_derivative(double cutoff_hz, const FilterRange& range);

/// Q = q_min * (q_max / q_min)^logistic(raw).
double q_from_raw(double raw, const FilterRange& range);
double q_from_raw_derivative(double raw, const FilterRange& range);

/// y[n] = x[n] * env[n]; env at audio rate.
std::vector<double> apply_envelope(std::span<const double> x, std::span<const double> env_audio);

struct ModSet {
  ModSignal add;  // wavetable position
  ModSignal sub;  // filter cutoff
  ModSignal env;  // amplitude
};

/// Renders (N - 1) * hop samples from three N-frame mod signals.
std::vector<double> mod_synth_render(const SynthPatch& patch, const ModSet& mods);

}  // namespace moddisc
