#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace moddisc {

/// Real-to-complex FFT of a fixed size, backed by FFTW.
///
/// Plans are created once per size and shared; execution is reentrant, so a
/// single plan may be used concurrently from several threads as long as each
/// caller passes its own buffers.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  /// out[k] = sum_n in[n] exp(-2 pi i k n / N), k = 0..N/2.
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;

  /// Unnormalized Hermitian inverse:
  /// out[n] = sum_{k=0}^{N-1} Z[k] exp(+2 pi i k n / N) with Z extended by
  /// conjugate symmetry. Imaginary parts of bins 0 and N/2 are ignored.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

 private:
  std::size_t n_;
  void* r2c_ = nullptr;
  void* c2r_ = nullptr;
};

/// Shared plan for size n (thread-safe lookup; plans live for the process).
const RealFft& fft_plan(std::size_t n);

}  // namespace moddisc
