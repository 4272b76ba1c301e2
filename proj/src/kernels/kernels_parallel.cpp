#include <algorithm>
#include <vector>

#include "kernel_common.hpp"
#include "moddisc/error.hpp"

#ifdef MODDISC_HAVE_OPENMP
#include <omp.h>
#endif

namespace moddisc::kernels {

int max_threads() noexcept {
#ifdef MODDISC_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void stft_parallel(std::span<const double> padded, const StftGeometry& g,
                   std::span<std::complex<double>> out) {
  if (g.fft_size == 0 || g.hop == 0 || g.window.size() != g.fft_size)
    throw ConfigError("invalid STFT geometry");
  if (g.frames == 0 || (g.frames - 1) * g.hop + g.fft_size > padded.size() ||
      out.size() != g.frames * g.bins())
    moddisc::detail::throw_shape("STFT size mismatch");
  const RealFft& fft = fft_plan(g.fft_size);
  const std::size_t bins = g.bins();
#pragma omp parallel
  {
    std::vector<double> scratch(g.fft_size);
#pragma omp for schedule(static)
    for (std::size_t m = 0; m < g.frames; ++m)
      detail::stft_frame(padded, g, m, scratch, out.subspan(m * bins, bins), fft);
  }
}

void stft_adjoint_parallel(std::span<const std::complex<double>> spec_grad, const StftGeometry& g,
                           std::span<double> padded_grad) {
  if (g.fft_size == 0 || g.hop == 0 || g.window.size() != g.fft_size)
    throw ConfigError("invalid STFT geometry");
  if (g.frames == 0 || (g.frames - 1) * g.hop + g.fft_size > padded_grad.size() ||
      spec_grad.size() != g.frames * g.bins())
    moddisc::detail::throw_shape("STFT size mismatch");
  const RealFft& fft = fft_plan(g.fft_size);
  const std::size_t bins = g.bins();
  // Frames are transformed in parallel one block at a time and then
  // overlap-added in frame order, same as the serial kernel. Blocks keep the
  // scratch small enough to stay in cache.
  constexpr std::size_t kBlock = 32;
  std::vector<double> frames(kBlock * g.fft_size);
  std::fill(padded_grad.begin(), padded_grad.end(), 0.0);
  for (std::size_t start = 0; start < g.frames; start += kBlock) {
    const std::size_t count = std::min(kBlock, g.frames - start);
#pragma omp parallel
    {
      std::vector<std::complex<double>> z(bins);
#pragma omp for schedule(static)
      for (std::size_t i = 0; i < count; ++i)
        detail::stft_frame_adjoint(spec_grad.subspan((start + i) * bins, bins), g, z,
                                   std::span<double>(frames).subspan(i * g.fft_size, g.fft_size),
                                   fft);
    }
    for (std::size_t i = 0; i < count; ++i) {
      const double* src = frames.data() + i * g.fft_size;
      double* dst = padded_grad.data() + (start + i) * g.hop;
      for (std::size_t n = 0; n < g.fft_size; ++n) dst[n] += src[n];
    }
  }
}

void fir_valid_parallel(std::span<const double> padded, std::span<const double> taps,
                        std::span<double> out) {
  if (taps.empty() || padded.size() < taps.size() || out.size() != padded.size() - taps.size() + 1)
    moddisc::detail::throw_shape("fir_valid: size mismatch");
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = detail::fir_point(padded.data() + i, taps);
}

void wavetable_read_parallel(const WavetableView& wt, std::span<const double> position,
                             std::span<const double> phase, std::span<double> out) {
  if (position.size() != out.size() || phase.size() != out.size())
    moddisc::detail::throw_shape("wavetable_read: size mismatch");
#pragma omp parallel for schedule(static)
  for (std::size_t n = 0; n < out.size(); ++n)
    out[n] = detail::wavetable_point(wt, position[n], phase[n]);
}

void spectral_terms_parallel(const SpectralTermsInput& in, std::span<double> frame_sq,
                             std::span<double> frame_log) {
#pragma omp parallel for schedule(static)
  for (std::size_t m = 0; m < in.frames; ++m)
    detail::spectral_terms_frame(in, m, frame_sq[m], frame_log[m]);
}

void spectral_grad_parallel(const SpectralTermsInput& in, double sc_weight, double log_weight,
                            std::span<std::complex<double>> grad) {
#pragma omp parallel for schedule(static)
  for (std::size_t m = 0; m < in.frames; ++m)
    detail::spectral_grad_frame(in, m, sc_weight, log_weight, grad);
}

}  // namespace moddisc::kernels
