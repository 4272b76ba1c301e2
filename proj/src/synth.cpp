#include "moddisc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "moddisc/error.hpp"
#include "moddisc/fft.hpp"
#include "moddisc/kernels.hpp"

namespace moddisc {

Wavetable::Wavetable(std::size_t positions, std::vector<double> data, bool learnable,
                     std::size_t frame_length)
    : positions_(positions), frame_length_(frame_length), data_(std::move(data)), learnable_(learnable) {
  if (positions_ == 0) detail::throw_shape("wavetable needs at least one position");
  if (frame_length_ == 0 || data_.size() != positions_ * frame_length_)
    detail::throw_shape("wavetable data must hold positions * frame_length samples");
  for (double v : data_)
    if (!std::isfinite(v)) throw ValidationError("wavetable contains non-finite samples");
}

std::span<const double> Wavetable::frame(std::size_t p) const {
  if (p >= positions_) detail::throw_shape("wavetable position out of range");
  return std::span<const double>(data_).subspan(p * frame_length_, frame_length_);
}

Wavetable default_wavetable(std::size_t positions) {
  if (positions == 0) detail::throw_shape("wavetable needs at least one position");
  const std::size_t len = kWavetableFrameLength;
  const RealFft& fft = fft_plan(len);
  std::vector<double> data(positions * len);
  std::vector<std::complex<double>> spec(fft.bins());
  for (std::size_t p = 0; p < positions; ++p) {
    const double alpha = positions == 1 ? 0.0 : static_cast<double>(p) / static_cast<double>(positions - 1);
    std::fill(spec.begin(), spec.end(), std::complex<double>{});
    for (std::size_t h = 1; h + 1 < fft.bins(); ++h) {
      const double saw = (2.0 / std::numbers::pi) * ((h % 2 == 1) ? 1.0 : -1.0) / static_cast<double>(h);
      const double amp = (h == 1 ? 1.0 - alpha : 0.0) + alpha * saw;
      // inverse() doubles interior bins: Z = -i a / 2 yields a * sin.
      spec[h] = std::complex<double>(0.0, -0.5 * amp);
    }
    fft.inverse(spec, std::span<double>(data).subspan(p * len, len));
  }
  double peak = 0.0;
  for (double v : data) peak = std::max(peak, std::abs(v));
  for (double& v : data) v /= peak;
  return Wavetable(positions, std::move(data));
}

void FilterRange::validate(double sample_rate) const {
  if (!(cutoff_min > 0.0 && cutoff_min < cutoff_max && cutoff_max < sample_rate / 2.0))
    throw ConfigError("filter cutoff range must satisfy 0 < min < max < fs / 2");
  if (!(q_min > 0.0 && q_min <= q_max)) throw ConfigError("filter Q range must satisfy 0 < min <= max");
}

void SynthPatch::validate() const {
  if (!(sample_rate > 0.0)) throw ConfigError("sample rate must be positive");
  if (!(f0 > 0.0 && f0 < sample_rate / 2.0)) throw DomainError("f0 must lie in (0, fs / 2)");
  if (!(phase >= 0.0 && phase < 1.0)) throw DomainError("initial phase must lie in [0, 1)");
  if (hop == 0) throw ConfigError("hop must be positive");
  filter.validate(sample_rate);
  if (!(q >= filter.q_min - 1e-12 && q <= filter.q_max + 1e-12))
    throw DomainError("Q outside the filter range");
  if (wavetable.positions() == 0) throw ConfigError("patch has no wavetable");
}

std::size_t antialias_harmonic_limit(double f0, double sample_rate, std::size_t frame_length) {
  if (!(f0 > 0.0)) detail::throw_domain("antialias: f0 must be positive");
  const double cutoff = 0.9 * sample_rate / 2.0;
  const auto limit = static_cast<std::size_t>(std::floor(cutoff / f0));
  return std::min(limit, frame_length / 2);
}

std::vector<double> antialias_data(std::span<const double> data, std::size_t frame_length,
                                   std::size_t max_harmonic) {
  if (frame_length == 0 || data.size() % frame_length != 0)
    detail::throw_shape("antialias: data is not a whole number of frames");
  std::vector<double> out(data.begin(), data.end());
  if (max_harmonic >= frame_length / 2) return out;
  const RealFft& fft = fft_plan(frame_length);
  std::vector<std::complex<double>> spec(fft.bins());
  const double scale = 1.0 / static_cast<double>(frame_length);
  for (std::size_t off = 0; off < data.size(); off += frame_length) {
    fft.forward(data.subspan(off, frame_length), spec);
    for (std::size_t h = max_harmonic + 1; h < spec.size(); ++h) spec[h] = 0.0;
    std::span<double> dst(out.data() + off, frame_length);
    fft.inverse(spec, dst);
    for (double& v : dst) v *= scale;
  }
  return out;
}

Wavetable antialias_wavetable(const Wavetable& wt, double f0, double sample_rate) {
  const std::size_t limit = antialias_harmonic_limit(f0, sample_rate, wt.frame_length());
  return Wavetable(wt.positions(), antialias_data(wt.data(), wt.frame_length(), limit),
                   wt.learnable(), wt.frame_length());
}

std::vector<double> oscillator_phase(double f0, double phase0, std::size_t n_samples,
                                     double sample_rate) {
  if (!(f0 > 0.0 && f0 < sample_rate / 2.0)) detail::throw_domain("oscillator: f0 must lie in (0, fs / 2)");
  std::vector<double> phase(n_samples);
  const double inc = f0 / sample_rate;
  double p = phase0 - std::floor(phase0);
  for (std::size_t n = 0; n < n_samples; ++n) {
    phase[n] = p;
    p += inc;
    if (p >= 1.0) p -= 1.0;
  }
  return phase;
}

std::vector<double> map_mod_to_position(std::span<const double> mod, std::size_t positions) {
  if (positions == 0) detail::throw_shape("wavetable needs at least one position");
  std::vector<double> out(mod.size());
  const double scale = static_cast<double>(positions - 1);
  for (std::size_t i = 0; i < mod.size(); ++i) out[i] = mod[i] * scale;
  return out;
}

std::vector<double> wavetable_osc(const Wavetable& wt, std::span<const double> mod_audio,
                                  double f0, double phase0, double sample_rate) {
  const std::vector<double> phase = oscillator_phase(f0, phase0, mod_audio.size(), sample_rate);
  const std::vector<double> position = map_mod_to_position(mod_audio, wt.positions());
  std::vector<double> out(mod_audio.size());
  kernels::wavetable_read_parallel({wt.data(), wt.positions(), wt.frame_length()}, position, phase, out);
  return out;
}

WavetableOscGrad wavetable_osc_vjp(const Wavetable& wt, std::span<const double> mod_audio,
                                   double f0, double phase0, double sample_rate,
                                   std::span<const double> upstream, bool want_table) {
  if (upstream.size() != mod_audio.size()) detail::throw_shape("wavetable_osc_vjp: size mismatch");
  const std::vector<double> phase = oscillator_phase(f0, phase0, mod_audio.size(), sample_rate);
  const std::size_t len = wt.frame_length();
  const std::size_t positions = wt.positions();
  const auto data = wt.data();
  WavetableOscGrad grad;
  grad.mod.assign(mod_audio.size(), 0.0);
  if (want_table) grad.table.assign(data.size(), 0.0);
  const double scale = static_cast<double>(positions - 1);
  for (std::size_t n = 0; n < mod_audio.size(); ++n) {
    const double g = upstream[n];
    if (g == 0.0) continue;
    const double idx = phase[n] * static_cast<double>(len);
    std::size_t i0 = static_cast<std::size_t>(idx);
    double w = idx - static_cast<double>(i0);
    if (i0 >= len) {
      i0 = 0;
      w = 0.0;
    }
    const std::size_t i1 = (i0 + 1 == len) ? 0 : i0 + 1;
    if (positions == 1) {
      if (want_table) {
        grad.table[i0] += g * (1.0 - w);
        grad.table[i1] += g * w;
      }
      continue;
    }
    const double pos = mod_audio[n] * scale;
    std::size_t p0 = static_cast<std::size_t>(pos);
    if (p0 > positions - 2) p0 = positions - 2;
    const double wp = pos - static_cast<double>(p0);
    const double* f0p = data.data() + p0 * len;
    const double* f1p = f0p + len;
    const double s0 = f0p[i0] + w * (f0p[i1] - f0p[i0]);
    const double s1 = f1p[i0] + w * (f1p[i1] - f1p[i0]);
    grad.mod[n] = g * (s1 - s0) * scale;
    if (want_table) {
      const double g0 = g * (1.0 - wp);
      const double g1 = g * wp;
      grad.table[p0 * len + i0] += g0 * (1.0 - w);
      grad.table[p0 * len + i1] += g0 * w;
      grad.table[(p0 + 1) * len + i0] += g1 * (1.0 - w);
      grad.table[(p0 + 1) * len + i1] += g1 * w;
    }
  }
  return grad;
}

BiquadCoeffs biquad_lp_coeffs(double cutoff_hz, double q, double sample_rate) {
  if (!(cutoff_hz > 0.0 && cutoff_hz < sample_rate / 2.0))
    detail::throw_domain("biquad cutoff must lie in (0, fs / 2)");
  if (!(q > 0.0)) detail::throw_domain("biquad Q must be positive");
  const double w = 2.0 * std::numbers::pi * cutoff_hz / sample_rate;
  const double c = std::cos(w);
  const double alpha = std::sin(w) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  BiquadCoeffs out;
  out.a1 = -2.0 * c / a0;
  out.a2 = (1.0 - alpha) / a0;
  // b0 + b1 + b2 = 1 + a1 + a2 analytically; deriving the numerator from the
  // rounded denominator keeps the DC gain at 1 to rounding even at low cutoffs.
  out.b1 = 0.5 * ((1.0 + out.a1) + out.a2);
  out.b0 = 0.5 * out.b1;
  out.b2 = out.b0;
  return out;
}

BiquadCoeffsJacobian biquad_lp_jacobian(double cutoff_hz, double q, double sample_rate) {
  const double dw_dfc = 2.0 * std::numbers::pi / sample_rate;
  const double w = dw_dfc * cutoff_hz;
  const double c = std::cos(w);
  const double s = std::sin(w);
  const double alpha = s / (2.0 * q);
  const double a0 = 1.0 + alpha;
  const double a0sq = a0 * a0;

  auto partials = [&](double d_alpha, double d_cos) {
    // d_cos = d(cos w); d(1 - cos w) = -d_cos.
    BiquadCoeffs d;
    d.b1 = -d_cos / a0 - (1.0 - c) * d_alpha / a0sq;
    d.b0 = 0.5 * d.b1;
    d.b2 = d.b0;
    d.a1 = -2.0 * d_cos / a0 + 2.0 * c * d_alpha / a0sq;
    d.a2 = -2.0 * d_alpha / a0sq;
    return d;
  };
  BiquadCoeffsJacobian jac;
  jac.d_cutoff = partials(c / (2.0 * q) * dw_dfc, -s * dw_dfc);
  jac.d_q = partials(-alpha / q, 0.0);
  return jac;
}

double biquad_magnitude(const BiquadCoeffs& c, double freq_hz, double sample_rate) {
  const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  return std::abs((c.b0 + c.b1 * z1 + c.b2 * z2) / (1.0 + c.a1 * z1 + c.a2 * z2));
}

double biquad_pole_radius(const BiquadCoeffs& c) {
  const double disc = c.a1 * c.a1 - 4.0 * c.a2;
  if (disc < 0.0) return std::sqrt(c.a2);
  const double r = std::sqrt(disc);
  return std::max(std::abs((-c.a1 + r) / 2.0), std::abs((-c.a1 - r) / 2.0));
}

namespace {

void check_tv(std::size_t n, std::size_t frames, std::size_t hop) {
  if (hop == 0) throw ConfigError("hop must be positive");
  if (n % hop != 0 || frames != n / hop + 1)
    detail::throw_shape("tv_biquad: need x.size() = (frames - 1) * hop");
}

inline BiquadCoeffs lerp(const BiquadCoeffs& a, const BiquadCoeffs& b, double w) {
  return {a.b0 + (b.b0 - a.b0) * w, a.b1 + (b.b1 - a.b1) * w, a.b2 + (b.b2 - a.b2) * w,
          a.a1 + (b.a1 - a.a1) * w, a.a2 + (b.a2 - a.a2) * w};
}

}  // namespace

std::vector<double> tv_biquad(std::span<const double> x, std::span<const BiquadCoeffs> frames,
                              std::size_t hop) {
  check_tv(x.size(), frames.size(), hop);
  std::vector<double> y(x.size());
  const double inv = 1.0 / static_cast<double>(hop);
  double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const std::size_t j = n / hop;
    const BiquadCoeffs c = lerp(frames[j], frames[j + 1], static_cast<double>(n - j * hop) * inv);
    const double out = c.b0 * x[n] + c.b1 * x1 + c.b2 * x2 - c.a1 * y1 - c.a2 * y2;
    x2 = x1;
    x1 = x[n];
    y2 = y1;
    y1 = out;
    y[n] = out;
  }
  return y;
}

TvBiquadGrad tv_biquad_vjp(std::span<const double> x, std::span<const BiquadCoeffs> frames,
                           std::size_t hop, std::span<const double> y,
                           std::span<const double> upstream) {
  check_tv(x.size(), frames.size(), hop);
  if (y.size() != x.size() || upstream.size() != x.size())
    detail::throw_shape("tv_biquad_vjp: size mismatch");
  const std::size_t n_samples = x.size();
  TvBiquadGrad grad;
  grad.x.assign(n_samples, 0.0);
  grad.frames.assign(frames.size(), BiquadCoeffs{0, 0, 0, 0, 0});
  const double inv = 1.0 / static_cast<double>(hop);
  auto coeff_at = [&](std::size_t n) {
    const std::size_t j = n / hop;
    return lerp(frames[j], frames[j + 1], static_cast<double>(n - j * hop) * inv);
  };
  // g1, g2: adjoints of y[n+1], y[n+2]; c1, c2: coefficients at n+1, n+2.
  double g1 = 0.0, g2 = 0.0;
  BiquadCoeffs c1{0, 0, 0, 0, 0}, c2{0, 0, 0, 0, 0};
  for (std::size_t k = n_samples; k-- > 0;) {
    const BiquadCoeffs c = coeff_at(k);
    const double g = upstream[k] - c1.a1 * g1 - c2.a2 * g2;
    grad.x[k] = c.b0 * g + c1.b1 * g1 + c2.b2 * g2;
    const double xm1 = k >= 1 ? x[k - 1] : 0.0;
    const double xm2 = k >= 2 ? x[k - 2] : 0.0;
    const double ym1 = k >= 1 ? y[k - 1] : 0.0;
    const double ym2 = k >= 2 ? y[k - 2] : 0.0;
    const BiquadCoeffs gc{g * x[k], g * xm1, g * xm2, -g * ym1, -g * ym2};
    const std::size_t j = k / hop;
    const double w = static_cast<double>(k - j * hop) * inv;
    BiquadCoeffs& ga = grad.frames[j];
    BiquadCoeffs& gb = grad.frames[j + 1];
    ga.b0 += (1.0 - w) * gc.b0;
    ga.b1 += (1.0 - w) * gc.b1;
    ga.b2 += (1.0 - w) * gc.b2;
    ga.a1 += (1.0 - w) * gc.a1;
    ga.a2 += (1.0 - w) * gc.a2;
    gb.b0 += w * gc.b0;
    gb.b1 += w * gc.b1;
    gb.b2 += w * gc.b2;
    gb.a1 += w * gc.a1;
    gb.a2 += w * gc.a2;
    g2 = g1;
    g1 = g;
    c2 = c1;
    c1 = c;
  }
  return grad;
}

std::vector<double> map_mod_to_cutoff(std::span<const double> m, const FilterRange& range) {
  std::vector<double> out(m.size());
  const double ratio = range.cutoff_max / range.cutoff_min;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0.0) out[i] = range.cutoff_min;
    else if (m[i] == 1.0) out[i] = range.cutoff_max;
    else out[i] = range.cutoff_min * std::pow(ratio, m[i]);
  }
  return out;
}

double cutoff_derivative(double cutoff_hz, const FilterRange& range) {
  return cutoff_hz * std::log(range.cutoff_max / range.cutoff_min);
}

double q_from_raw(double raw, const FilterRange& range) {
  return range.q_min * std::pow(range.q_max / range.q_min, logistic(raw));
}

double q_from_raw_derivative(double raw, const FilterRange& range) {
  const double s = logistic(raw);
  return q_from_raw(raw, range) * std::log(range.q_max / range.q_min) * s * (1.0 - s);
}

std::vector<double> apply_envelope(std::span<const double> x, std::span<const double> env_audio) {
  if (x.size() != env_audio.size()) detail::throw_shape("apply_envelope: length mismatch");
  std::vector<double> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) y[n] = x[n] * env_audio[n];
  return y;
}

std::vector<double> mod_synth_render(const SynthPatch& patch, const ModSet& mods) {
  patch.validate();
  const std::size_t frames = mods.add.size();
  if (mods.sub.size() != frames || mods.env.size() != frames)
    detail::throw_shape("mod signals must have equal frame counts");
  if (frames < 2) detail::throw_shape("mod signals need at least 2 frames");
  const std::size_t n = (frames - 1) * patch.hop;

  const Wavetable table = antialias_wavetable(patch.wavetable, patch.f0, patch.sample_rate);
  const std::vector<double> add_audio = upsample_linear(mods.add.values, patch.hop);
  const std::vector<double> osc = wavetable_osc(table, add_audio, patch.f0, patch.phase, patch.sample_rate);

  const std::vector<double> cutoffs = map_mod_to_cutoff(mods.sub.values, patch.filter);
  std::vector<BiquadCoeffs> coeffs(frames);
  for (std::size_t j = 0; j < frames; ++j)
    coeffs[j] = biquad_lp_coeffs(cutoffs[j], patch.q, patch.sample_rate);
  const std::vector<double> filtered = tv_biquad(osc, coeffs, patch.hop);

  const std::vector<double> env_audio = upsample_linear(mods.env.values, patch.hop);
  std::vector<double> out = apply_envelope(filtered, env_audio);
  if (out.size() != n) detail::throw_shape("render length mismatch");
  return out;
}

}  // namespace moddisc
