#include "moddisc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "moddisc/error.hpp"
#include "moddisc/fft.hpp"
#include "moddisc/kernels.hpp"
#include "reflect.hpp"

namespace moddisc {

void StftResolution::validate() const {
  if (!(hop > 0 && hop <= win_length && win_length <= fft_size))
    throw ConfigError("STFT resolution needs 0 < hop <= win_length <= fft_size");
  if (fft_size % 2 != 0) throw ConfigError("STFT size must be even");
}

void MssSpec::validate() const {
  if (resolutions.empty()) throw ConfigError("MSS needs at least one resolution");
  for (const auto& r : resolutions) r.validate();
  if (!(mag_floor > 0.0)) throw ConfigError("MSS magnitude floor must be positive");
}

std::vector<double> stft_window(const StftResolution& res) {
  res.validate();
  std::vector<double> w(res.fft_size, 0.0);
  const std::size_t offset = (res.fft_size - res.win_length) / 2;
  const double len = static_cast<double>(res.win_length);
  for (std::size_t i = 0; i < res.win_length; ++i)
    w[offset + i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / len);
  return w;
}

namespace {

void check_length(std::size_t n, const StftResolution& res) {
  if (n <= res.fft_size / 2) detail::throw_shape("signal too short for STFT size");
}

}  // namespace

std::vector<std::complex<double>> stft(std::span<const double> x, const StftResolution& res) {
  const std::vector<double> window = stft_window(res);
  check_length(x.size(), res);
  const std::vector<double> padded = detail::reflect_pad(x, res.fft_size / 2);
  const kernels::StftGeometry g{res.fft_size, res.hop, res.frames(x.size()), window};
  std::vector<std::complex<double>> out(g.frames * g.bins());
  kernels::stft_parallel(padded, g, out);
  return out;
}

std::vector<double> stft_vjp(std::span<const std::complex<double>> spec_grad,
                             std::size_t n_samples, const StftResolution& res) {
  const std::vector<double> window = stft_window(res);
  check_length(n_samples, res);
  const kernels::StftGeometry g{res.fft_size, res.hop, res.frames(n_samples), window};
  if (spec_grad.size() != g.frames * g.bins()) detail::throw_shape("stft_vjp: size mismatch");
  std::vector<double> padded_grad(n_samples + res.fft_size);
  kernels::stft_adjoint_parallel(spec_grad, g, padded_grad);
  return detail::reflect_pad_adjoint(padded_grad, n_samples, res.fft_size / 2);
}

FrameMatrix stft_mag(std::span<const double> x, const StftResolution& res) {
  const auto spec = stft(x, res);
  FrameMatrix out{res.frames(x.size()), res.bins(), std::vector<double>(spec.size())};
  for (std::size_t i = 0; i < spec.size(); ++i) out.data[i] = std::sqrt(std::norm(spec[i]));
  return out;
}

MssLoss::MssLoss(std::span<const double> target, MssSpec spec)
    : n_(target.size()), spec_(std::move(spec)) {
  spec_.validate();
  for (const auto& res : spec_.resolutions) {
    FrameMatrix m = stft_mag(target, res);
    Target t;
    t.log.resize(m.data.size());
    double sq = 0.0;
    for (std::size_t i = 0; i < m.data.size(); ++i) {
      t.log[i] = std::log(m.data[i] + spec_.mag_floor);
      sq += m.data[i] * m.data[i];
    }
    t.norm = std::sqrt(sq);
    t.mag = std::move(m.data);
    targets_.push_back(std::move(t));
  }
}

double MssLoss::value(std::span<const double> x) const { return eval(x, nullptr); }

double MssLoss::value_and_grad(std::span<const double> x, std::vector<double>& grad) const {
  grad.assign(n_, 0.0);
  return eval(x, &grad);
}

double MssLoss::eval(std::span<const double> x, std::vector<double>* grad) const {
  if (x.size() != n_) detail::throw_shape("MSS: prediction and target lengths differ");
  const double inv_res = 1.0 / static_cast<double>(spec_.resolutions.size());
  double total = 0.0;
  for (std::size_t r = 0; r < spec_.resolutions.size(); ++r) {
    const StftResolution& res = spec_.resolutions[r];
    const Target& tgt = targets_[r];
    const std::vector<std::complex<double>> pred = stft(x, res);
    const std::size_t frames = res.frames(n_);
    const std::size_t bins = res.bins();
    const kernels::SpectralTermsInput in{pred, tgt.mag, tgt.log, frames, bins, spec_.mag_floor};
    std::vector<double> frame_sq(frames), frame_log(frames);
    kernels::spectral_terms_parallel(in, frame_sq, frame_log);
    double sq = 0.0, lg = 0.0;
    for (std::size_t m = 0; m < frames; ++m) {
      sq += frame_sq[m];
      lg += frame_log[m];
    }
    const double count = static_cast<double>(frames * bins);
    const double denom = std::max(tgt.norm, spec_.mag_floor);
    const double num = std::sqrt(sq);
    total += inv_res * (num / denom + lg / count);
    if (grad) {
      const double sc_weight = num > 0.0 ? inv_res / (num * denom) : 0.0;
      std::vector<std::complex<double>> g(pred.size());
      kernels::spectral_grad_parallel(in, sc_weight, inv_res / count, g);
      const std::vector<double> gx = stft_vjp(g, n_, res);
      for (std::size_t i = 0; i < n_; ++i) (*grad)[i] += gx[i];
    }
  }
  if (!std::isfinite(total)) throw NumericalError("MSS loss is not finite");
  return total;
}

double mss_loss(std::span<const double> x, std::span<const double> y, const MssSpec& spec) {
  if (x.size() != y.size()) detail::throw_shape("MSS: signal lengths differ");
  return MssLoss(y, spec).value(x);
}

void MfccSpec::validate() const {
  stft.validate();
  if (n_mels == 0 || n_coeffs == 0 || n_coeffs > n_mels)
    throw ConfigError("MFCC needs 0 < n_coeffs <= n_mels");
  if (!(sample_rate > 0.0) || !(log_floor > 0.0)) throw ConfigError("MFCC rate and floor must be positive");
}

namespace {

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// n_mels x bins triangular filters, edges equally spaced in mel.
std::vector<double> mel_filterbank(const MfccSpec& spec) {
  const std::size_t bins = spec.stft.bins();
  const double top = hz_to_mel(spec.sample_rate / 2.0);
  std::vector<double> edges(spec.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(spec.n_mels + 1));
  std::vector<double> fb(spec.n_mels * bins, 0.0);
  const double bin_hz = spec.sample_rate / static_cast<double>(spec.stft.fft_size);
  for (std::size_t m = 0; m < spec.n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > lo && f <= mid) w = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) w = (hi - f) / (hi - mid);
      fb[m * bins + k] = w;
    }
  }
  return fb;
}

}  // namespace

FrameMatrix mfcc(std::span<const double> x, const MfccSpec& spec) {
  spec.validate();
  const FrameMatrix mag = stft_mag(x, spec.stft);
  const std::vector<double> fb = mel_filterbank(spec);
  const std::size_t bins = mag.cols;
  const std::size_t nm = spec.n_mels;
  std::vector<double> dct(spec.n_coeffs * nm);
  for (std::size_t k = 0; k < spec.n_coeffs; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(nm));
    for (std::size_t m = 0; m < nm; ++m)
      dct[k * nm + m] = scale * std::cos(std::numbers::pi * static_cast<double>(k) *
                                         (static_cast<double>(m) + 0.5) / static_cast<double>(nm));
  }
  FrameMatrix out{mag.rows, spec.n_coeffs, std::vector<double>(mag.rows * spec.n_coeffs)};
  std::vector<double> logmel(nm);
  for (std::size_t t = 0; t < mag.rows; ++t) {
    const auto row = mag.row(t);
    for (std::size_t m = 0; m < nm; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < bins; ++k) e += fb[m * bins + k] * row[k] * row[k];
      logmel[m] = std::log(std::max(e, spec.log_floor));
    }
    for (std::size_t k = 0; k < spec.n_coeffs; ++k) {
      double c = 0.0;
      for (std::size_t m = 0; m < nm; ++m) c += dct[k * nm + m] * logmel[m];
      out.data[t * spec.n_coeffs + k] = c;
    }
  }
  return out;
}

double mfcc_l1(std::span<const double> x, std::span<const double> y, const MfccSpec& spec) {
  if (x.size() != y.size()) detail::throw_shape("MFCC L1: signal lengths differ");
  const FrameMatrix a = mfcc(x, spec);
  const FrameMatrix b = mfcc(y, spec);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) acc += std::abs(a.data[i] - b.data[i]);
  return acc / static_cast<double>(a.data.size());
}

}  // namespace moddisc
