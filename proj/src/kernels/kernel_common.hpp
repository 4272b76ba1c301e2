#pragma once

// Per-element bodies shared by the serial and parallel kernels so the two
// variants cannot drift apart numerically.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>

#include "moddisc/fft.hpp"
#include "moddisc/kernels.hpp"

namespace moddisc::kernels::detail {

inline void stft_frame(std::span<const double> padded, const StftGeometry& g, std::size_t m,
                       std::span<double> scratch, std::span<std::complex<double>> out_row,
                       const RealFft& fft) {
  const double* src = padded.data() + m * g.hop;
  for (std::size_t n = 0; n < g.fft_size; ++n) scratch[n] = src[n] * g.window[n];
  fft.forward(scratch, out_row);
}

// d[n] = window[n] * Re sum_{k=0}^{N/2} G_k exp(2 pi i k n / N)
inline void stft_frame_adjoint(std::span<const std::complex<double>> grad_row,
                               const StftGeometry& g, std::span<std::complex<double>> zscratch,
                               std::span<double> out_frame, const RealFft& fft) {
  const std::size_t n = g.fft_size;
  const std::size_t bins = g.bins();
  for (std::size_t k = 0; k < bins; ++k) zscratch[k] = 0.5 * grad_row[k];
  zscratch[0] = grad_row[0];
  if (n % 2 == 0) zscratch[bins - 1] = grad_row[bins - 1];
  fft.inverse(zscratch, out_frame);
  for (std::size_t i = 0; i < n; ++i) out_frame[i] *= g.window[i];
}

inline double fir_point(const double* src, std::span<const double> taps) {
  double acc = 0.0;
  for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k] * src[k];
  return acc;
}

inline double wavetable_point(const WavetableView& wt, double position, double phase) {
  const std::size_t len = wt.frame_length;
  const double idx = phase * static_cast<double>(len);
  std::size_t i0 = static_cast<std::size_t>(idx);
  double w = idx - static_cast<double>(i0);
  if (i0 >= len) {  // phase rounding up to exactly 1
    i0 = 0;
    w = 0.0;
  }
  const std::size_t i1 = (i0 + 1 == len) ? 0 : i0 + 1;
  if (wt.positions == 1) {
    const double* f = wt.data.data();
    return f[i0] + w * (f[i1] - f[i0]);
  }
  std::size_t p0 = static_cast<std::size_t>(position);
  if (p0 > wt.positions - 2) p0 = wt.positions - 2;
  const double wp = position - static_cast<double>(p0);
  const double* f0 = wt.data.data() + p0 * len;
  const double* f1 = f0 + len;
  const double s0 = f0[i0] + w * (f0[i1] - f0[i0]);
  const double s1 = f1[i0] + w * (f1[i1] - f1[i0]);
  return s0 + wp * (s1 - s0);
}

inline void spectral_terms_frame(const SpectralTermsInput& in, std::size_t m, double& sq,
                                 double& lg) {
  double s = 0.0;
  double l = 0.0;
  const std::size_t base = m * in.bins;
  for (std::size_t k = 0; k < in.bins; ++k) {
    const double mag = std::sqrt(std::norm(in.predicted[base + k]));
    const double d = in.target_mag[base + k] - mag;
    s += d * d;
    l += std::abs(in.target_log[base + k] - std::log(mag + in.floor));
  }
  sq = s;
  lg = l;
}

inline void spectral_grad_frame(const SpectralTermsInput& in, std::size_t m, double sc_weight,
                                double log_weight, std::span<std::complex<double>> grad) {
  const std::size_t base = m * in.bins;
  for (std::size_t k = 0; k < in.bins; ++k) {
    const std::complex<double> x = in.predicted[base + k];
    const double mag = std::sqrt(std::norm(x));
    if (mag == 0.0) {
      grad[base + k] = 0.0;
      continue;
    }
    // log is monotone, so the sign of the log difference is that of Y - |X|.
    const double diff = in.target_mag[base + k] - mag;
    const double sign = diff > 0.0 ? -1.0 : (diff < 0.0 ? 1.0 : 0.0);
    const double g_mag =
        -sc_weight * diff + log_weight * sign / (mag + in.floor);
    grad[base + k] = (g_mag / mag) * x;
  }
}

}  // namespace moddisc::kernels::detail
