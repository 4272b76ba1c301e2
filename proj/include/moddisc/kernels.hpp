#pragma once

// Data-parallel inner loops. Every kernel exists twice: a plain serial
// reference and an OpenMP version. Both perform the same floating-point
// operations in the same order per output element, and every cross-element
// reduction is finished serially, so the two agree bit for bit regardless
// of thread count. The library calls the parallel versions; tests and the
// benchmark compare them against the serial ones.

#include <complex>
#include <cstddef>
#include <span>

namespace moddisc::kernels {

/// Framing of a padded signal: frame m starts at m * hop and spans fft_size
/// samples, multiplied by `window` (length fft_size, zero outside the
/// analysis window).
struct StftGeometry {
  std::size_t fft_size = 0;
  std::size_t hop = 0;
  std::size_t frames = 0;
  std::span<const double> window;

  std::size_t bins() const noexcept { return fft_size / 2 + 1; }
};

/// out is frames x bins, row-major.
void stft_serial(std::span<const double> padded, const StftGeometry& g,
                 std::span<std::complex<double>> out);
void stft_parallel(std::span<const double> padded, const StftGeometry& g,
                   std::span<std::complex<double>> out);

/// Adjoint of stft_*: spec_grad holds dL/dRe + i dL/dIm per bin; the result
/// overwrites padded_grad (length of the padded signal).
void stft_adjoint_serial(std::span<const std::complex<double>> spec_grad, const StftGeometry& g,
                         std::span<double> padded_grad);
void stft_adjoint_parallel(std::span<const std::complex<double>> spec_grad, const StftGeometry& g,
                           std::span<double> padded_grad);

/// "Valid" correlation: out[i] = sum_k taps[k] * padded[i + k].
void fir_valid_serial(std::span<const double> padded, std::span<const double> taps,
                      std::span<double> out);
void fir_valid_parallel(std::span<const double> padded, std::span<const double> taps,
                        std::span<double> out);

struct WavetableView {
  std::span<const double> data;  // positions x frame_length, row-major
  std::size_t positions = 0;
  std::size_t frame_length = 0;
};

/// Bilinear table read: position in [0, P-1], phase in [0, 1).
void wavetable_read_serial(const WavetableView& wt, std::span<const double> position,
                           std::span<const double> phase, std::span<double> out);
void wavetable_read_parallel(const WavetableView& wt, std::span<const double> position,
                             std::span<const double> phase, std::span<double> out);

/// Per-frame partial sums of the spectral-convergence numerator and the
/// log-magnitude L1 term between a predicted spectrum and target
/// magnitudes. frame_sq[m] = sum_k (|Y| - |X|)^2,
/// frame_log[m] = sum_k |log(|Y| + floor) - log(|X| + floor)|.
struct SpectralTermsInput {
  std::span<const std::complex<double>> predicted;  // frames x bins
  std::span<const double> target_mag;               // frames x bins
  std::span<const double> target_log;               // log(|Y| + floor)
  std::size_t frames = 0;
  std::size_t bins = 0;
  double floor = 1e-7;
};
void spectral_terms_serial(const SpectralTermsInput& in, std::span<double> frame_sq,
                           std::span<double> frame_log);
void spectral_terms_parallel(const SpectralTermsInput& in, std::span<double> frame_sq,
                             std::span<double> frame_log);

/// Gradient of  sc_weight * sqrt(sum (|Y|-|X|)^2) + log_weight * sum |logY - logX|
/// with respect to the complex spectrum X, given sc_weight already divided
/// by the current numerator norm.
void spectral_grad_serial(const SpectralTermsInput& in, double sc_weight, double log_weight,
                          std::span<std::complex<double>> grad);
void spectral_grad_parallel(const SpectralTermsInput& in, double sc_weight, double log_weight,
                            std::span<std::complex<double>> grad);

/// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int max_threads() noexcept;

}  // namespace moddisc::kernels
