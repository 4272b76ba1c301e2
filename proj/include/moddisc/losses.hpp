#pragma once

// Multi-resolution STFT loss with an analytic gradient, and an MFCC
// distance used for evaluation.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace moddisc {

/// Row-major rows x cols block (frames x bins or frames x coefficients).
struct FrameMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data).subspan(r * cols, cols);
  }
};

struct StftResolution {
  std::size_t fft_size = 1024;
  std::size_t hop = 120;
  std::size_t win_length = 600;

  std::size_t bins() const noexcept { return fft_size / 2 + 1; }
  /// Centered framing: 1 + n / hop frames.
  std::size_t frames(std::size_t n_samples) const noexcept { return 1 + n_samples / hop; }
  /// Throws ConfigError unless 0 < hop <= win_length <= fft_size.
  void validate() const;
};

struct MssSpec {
  std::vector<StftResolution> resolutions{{1024, 120, 600}, {2048, 240, 1200}, {512, 50, 240}};
  double mag_floor = 1e-7;

  void validate() const;
};

/// Periodic Hann of length win_length, zero-padded symmetrically to fft_size.
std::vector<double> stft_window(const StftResolution& res);

/// Complex STFT of x: Hann window, frames centered by reflect padding of
/// fft_size / 2 on each side. Requires x.size() > fft_size / 2.
std::vector<std::complex<double>> stft(std::span<const double> x, const StftResolution& res);
/// Adjoint of stft: cotangents dL/dRe + i dL/dIm -> cotangents on x.
std::vector<double> stft_vjp(std::span<const std::complex<double>> spec_grad,
                             std::size_t n_samples, const StftResolution& res);

FrameMatrix stft_mag(std::span<const double> x, const StftResolution& res);

/// Loss against a fixed target; target spectra are computed once.
///
/// Per resolution: ||Y - X||_F / max(||Y||_F, floor) + mean |log(Y + floor) - log(X + floor)|
/// on magnitudes; the total is the mean over resolutions.
class MssLoss {
 public:
  MssLoss(std::span<const double> target, MssSpec spec = {});

  std::size_t size() const noexcept { return n_; }
  const MssSpec& spec() const noexcept { return spec_; }

  double value(std::span<const double> x) const;
  /// Writes dL/dx into grad (resized to size()) and returns the loss.
  double value_and_grad(std::span<const double> x, std::vector<double>& grad) const;

 private:
  struct Target {
    std::vector<double> mag;
    std::vector<double> log;
    double norm = 0.0;
  };
  double eval(std::span<const double> x, std::vector<double>* grad) const;

  std::size_t n_ = 0;
  MssSpec spec_;
  std::vector<Target> targets_;
};

/// x is the prediction, y the reference. Throws ShapeError on length mismatch.
double mss_loss(std::span<const double> x, std::span<const double> y, const MssSpec& spec = {});

struct MfccSpec {
  std::size_t n_mels = 40;
  std::size_t n_coeffs = 20;
  StftResolution stft{2048, 512, 2048};
  double sample_rate = 48000.0;
  double log_floor = 1e-10;

  void validate() const;
};

/// Log-mel energies (HTK mel scale, 0 to fs / 2, triangular bands on the
/// power spectrum) followed by an orthonormal DCT-II. frames x n_coeffs.
FrameMatrix mfcc(std::span<const double> x, const MfccSpec& spec = {});

/// Mean absolute coefficient difference.
double mfcc_l1(std::span<const double> x, std::span<const double> y, const MfccSpec& spec = {});

}  // namespace moddisc
