#include <vector>

#include "kernel_common.hpp"
#include "moddisc/error.hpp"

namespace moddisc::kernels {

namespace {
void check_stft(std::size_t padded_len, const StftGeometry& g, std::size_t spec_len) {
  if (g.fft_size == 0 || g.hop == 0 || g.window.size() != g.fft_size)
    throw ConfigError("invalid STFT geometry");
  if (g.frames == 0 || (g.frames - 1) * g.hop + g.fft_size > padded_len)
    moddisc::detail::throw_shape("STFT frames exceed padded signal");
  if (spec_len != g.frames * g.bins()) moddisc::detail::throw_shape("STFT output size mismatch");
}
}  // namespace

void stft_serial(std::span<const double> padded, const StftGeometry& g,
                 std::span<std::complex<double>> out) {
  check_stft(padded.size(), g, out.size());
  const RealFft& fft = fft_plan(g.fft_size);
  std::vector<double> scratch(g.fft_size);
  for (std::size_t m = 0; m < g.frames; ++m)
    detail::stft_frame(padded, g, m, scratch, out.subspan(m * g.bins(), g.bins()), fft);
}

void stft_adjoint_serial(std::span<const std::complex<double>> spec_grad, const StftGeometry& g,
                         std::span<double> padded_grad) {
  check_stft(padded_grad.size(), g, spec_grad.size());
  const RealFft& fft = fft_plan(g.fft_size);
  std::vector<std::complex<double>> z(g.bins());
  std::vector<double> frame(g.fft_size);
  std::fill(padded_grad.begin(), padded_grad.end(), 0.0);
  for (std::size_t m = 0; m < g.frames; ++m) {
    detail::stft_frame_adjoint(spec_grad.subspan(m * g.bins(), g.bins()), g, z, frame, fft);
    double* dst = padded_grad.data() + m * g.hop;
    for (std::size_t n = 0; n < g.fft_size; ++n) dst[n] += frame[n];
  }
}

void fir_valid_serial(std::span<const double> padded, std::span<const double> taps,
                      std::span<double> out) {
  if (taps.empty() || padded.size() < taps.size() || out.size() != padded.size() - taps.size() + 1)
    moddisc::detail::throw_shape("fir_valid: size mismatch");
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = detail::fir_point(padded.data() + i, taps);
}

void wavetable_read_serial(const WavetableView& wt, std::span<const double> position,
                           std::span<const double> phase, std::span<double> out) {
  if (position.size() != out.size() || phase.size() != out.size())
    moddisc::detail::throw_shape("wavetable_read: size mismatch");
  for (std::size_t n = 0; n < out.size(); ++n)
    out[n] = detail::wavetable_point(wt, position[n], phase[n]);
}

void spectral_terms_serial(const SpectralTermsInput& in, std::span<double> frame_sq,
                           std::span<double> frame_log) {
  for (std::size_t m = 0; m < in.frames; ++m)
    detail::spectral_terms_frame(in, m, frame_sq[m], frame_log[m]);
}

void spectral_grad_serial(const SpectralTermsInput& in, double sc_weight, double log_weight,
                          std::span<std::complex<double>> grad) {
  for (std::size_t m = 0; m < in.frames; ++m)
    detail::spectral_grad_frame(in, m, sc_weight, log_weight, grad);
}

}  // namespace moddisc::kernels
