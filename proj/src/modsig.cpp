#include "moddisc/modsig.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "moddisc/error.hpp"
#include "moddisc/kernels.hpp"
#include "reflect.hpp"

namespace moddisc {

double ModSignal::duration() const noexcept {
  return values.size() < 2 ? 0.0 : static_cast<double>(values.size() - 1) / rate_hz;
}

void ModSignal::validate() const {
  if (!(rate_hz > 0.0)) throw ValidationError("mod signal rate must be positive");
  for (double v : values)
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("mod signal value outside [0, 1]");
}

double logistic(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

ModSignal render_frame(std::span<const double> raw, double rate_hz) {
  if (raw.empty()) detail::throw_shape("render_frame: empty parameters");
  ModSignal out{std::vector<double>(raw.size()), rate_hz};
  std::transform(raw.begin(), raw.end(), out.values.begin(), [](double r) { return logistic(r); });
  return out;
}

std::vector<double> render_frame_vjp(const ModSignal& rendered, std::span<const double> upstream) {
  if (upstream.size() != rendered.size()) detail::throw_shape("render_frame_vjp: size mismatch");
  std::vector<double> g(upstream.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = rendered.values[i];
    g[i] = upstream[i] * v * (1.0 - v);
  }
  return g;
}

int LpfSpec::tap_count(double rate_hz) const {
  if (taps > 0) return taps;
  int n = static_cast<int>(std::ceil(rate_hz / cutoff_hz));
  if (n % 2 == 0) ++n;
  return n;
}

void LpfSpec::validate(double rate_hz) const {
  if (!(cutoff_hz > 0.0 && cutoff_hz < rate_hz / 2.0))
    throw DomainError("LPF cutoff must lie in (0, rate / 2)");
  if (taps < 0 || (taps > 0 && taps % 2 == 0)) throw ConfigError("LPF tap count must be odd");
}

std::vector<double> design_windowed_sinc(double cutoff_hz, double rate_hz, int taps) {
  LpfSpec spec{cutoff_hz, taps};
  spec.validate(rate_hz);
  const int n = spec.tap_count(rate_hz);
  std::vector<double> h(static_cast<std::size_t>(n));
  const double fc = cutoff_hz / rate_hz;  // cycles per sample
  const double m = n - 1;
  const double center = m / 2.0;
  for (int k = 0; k < n; ++k) {
    const double t = k - center;
    const double sinc =
        t == 0.0 ? 2.0 * fc : std::sin(2.0 * std::numbers::pi * fc * t) / (std::numbers::pi * t);
    const double window = m == 0 ? 1.0
                                 : 0.42 - 0.5 * std::cos(2.0 * std::numbers::pi * k / m) +
                                       0.08 * std::cos(4.0 * std::numbers::pi * k / m);
    h[static_cast<std::size_t>(k)] = sinc * window;
  }
  // Enforce exact symmetry before normalizing.
  for (int k = 0; k < n / 2; ++k) {
    const double avg = 0.5 * (h[static_cast<std::size_t>(k)] + h[static_cast<std::size_t>(n - 1 - k)]);
    h[static_cast<std::size_t>(k)] = avg;
    h[static_cast<std::size_t>(n - 1 - k)] = avg;
  }
  double sum = 0.0;
  for (double v : h) sum += v;
  for (double& v : h) v /= sum;
  return h;
}


std::vector<double> zero_phase_filter(std::span<const double> x, std::span<const double> taps) {
  if (taps.size() % 2 == 0) throw ConfigError("zero-phase FIR needs an odd tap count");
  const std::size_t half = taps.size() / 2;
  if (x.size() <= half) detail::throw_shape("signal shorter than filter");
  const std::vector<double> padded = detail::reflect_pad(x, half);
  std::vector<double> out(x.size());
  kernels::fir_valid_parallel(padded, taps, out);
  return out;
}

std::vector<double> zero_phase_filter_vjp(std::span<const double> upstream,
                                          std::span<const double> taps) {
  const std::size_t half = taps.size() / 2;
  if (upstream.size() <= half) detail::throw_shape("signal shorter than filter");
  std::vector<double> padded_grad(upstream.size() + 2 * half, 0.0);
  for (std::size_t i = 0; i < upstream.size(); ++i) {
    const double g = upstream[i];
    if (g == 0.0) continue;
    for (std::size_t k = 0; k < taps.size(); ++k) padded_grad[i + k] += taps[k] * g;
  }
  return detail::reflect_pad_adjoint(padded_grad, upstream.size(), half);
}

ModSignal render_lpf(std::span<const double> raw, const LpfSpec& spec, double rate_hz) {
  const std::vector<double> taps = design_windowed_sinc(spec.cutoff_hz, rate_hz, spec.taps);
  if (raw.size() < taps.size()) detail::throw_shape("render_lpf: signal shorter than filter");
  const ModSignal squashed = render_frame(raw, rate_hz);
  ModSignal out{zero_phase_filter(squashed.values, taps), rate_hz};
  for (double& v : out.values) v = std::clamp(v, 0.0, 1.0);
  return out;
}

std::vector<double> render_lpf_vjp(std::span<const double> raw, const LpfSpec& spec,
                                   double rate_hz, std::span<const double> upstream) {
  const std::vector<double> taps = design_windowed_sinc(spec.cutoff_hz, rate_hz, spec.taps);
  if (raw.size() < taps.size()) detail::throw_shape("render_lpf: signal shorter than filter");
  if (upstream.size() != raw.size()) detail::throw_shape("render_lpf_vjp: size mismatch");
  const ModSignal squashed = render_frame(raw, rate_hz);
  const std::vector<double> filtered = zero_phase_filter(squashed.values, taps);
  std::vector<double> g(upstream.begin(), upstream.end());
  for (std::size_t i = 0; i < g.size(); ++i)
    if (filtered[i] < 0.0 || filtered[i] > 1.0) g[i] = 0.0;
  return render_frame_vjp(squashed, zero_phase_filter_vjp(g, taps));
}

SplineRenderMap SplineRenderMap::build(const PiecewiseBezier& curve, std::size_t frames,
                                       int oversample) {
  if (frames < 2) detail::throw_shape("spline rendering needs at least 2 frames");
  if (oversample < 1) throw ConfigError("oversample must be >= 1");
  const int degree = curve.degree();
  const std::size_t width = static_cast<std::size_t>(degree) + 1;
  const std::size_t samples = static_cast<std::size_t>(oversample) * frames;

  // Dense samples: x value plus the Bernstein row over controls.
  std::vector<double> xs(samples);
  std::vector<std::size_t> base(samples);
  std::vector<double> rows(samples * width);
  for (std::size_t s = 0; s < samples; ++s) {
    const double t = s + 1 == samples ? 1.0 : static_cast<double>(s) / static_cast<double>(samples - 1);
    const SegmentLocation loc = segment_index(t, curve.segments());
    std::span<double> w(rows.data() + s * width, width);
    bernstein_weights(degree, loc.u, w);
    const auto seg = curve.segment(loc.index);
    double x = 0.0;
    for (std::size_t i = 0; i < width; ++i) x += w[i] * seg[i].x;
    if (loc.u == 0.0) x = seg.front().x;
    if (loc.u == 1.0) x = seg.back().x;
    xs[s] = x;
    base[s] = static_cast<std::size_t>(loc.index) * static_cast<std::size_t>(degree);
  }
  // Guard against rounding-level non-monotonicity.
  for (std::size_t s = 1; s < samples; ++s) xs[s] = std::max(xs[s], xs[s - 1]);

  SplineRenderMap map;
  map.controls_ = curve.points().size();
  map.offsets_.reserve(frames + 1);
  map.indices_.reserve(frames * 2 * width);
  map.weights_.reserve(frames * 2 * width);
  std::size_t s = 0;
  for (std::size_t j = 0; j < frames; ++j) {
    const double tau = j + 1 == frames ? 1.0 : static_cast<double>(j) / static_cast<double>(frames - 1);
    while (s + 2 < samples && xs[s + 1] <= tau) ++s;
    const double x0 = xs[s];
    const double x1 = xs[s + 1];
    double lambda = x1 > x0 ? (tau - x0) / (x1 - x0) : 0.0;
    lambda = std::clamp(lambda, 0.0, 1.0);
    for (std::size_t side = 0; side < 2; ++side) {
      const double scale = side == 0 ? 1.0 - lambda : lambda;
      if (scale == 0.0) continue;
      const std::size_t sample = s + side;
      for (std::size_t i = 0; i < width; ++i) {
        const double w = rows[sample * width + i];
        if (w == 0.0) continue;
        map.indices_.push_back(base[sample] + i);
        map.weights_.push_back(scale * w);
      }
    }
    map.offsets_.push_back(map.indices_.size());
  }
  return map;
}

void SplineRenderMap::apply(std::span<const double> y, std::span<double> out) const {
  if (y.size() != controls_ || out.size() != frames()) detail::throw_shape("SplineRenderMap::apply size mismatch");
  for (std::size_t j = 0; j < frames(); ++j) {
    double acc = 0.0;
    for (std::size_t e = offsets_[j]; e < offsets_[j + 1]; ++e) acc += weights_[e] * y[indices_[e]];
    out[j] = acc;
  }
}

void SplineRenderMap::apply_transpose(std::span<const double> upstream, std::span<double> grad) const {
  if (upstream.size() != frames() || grad.size() != controls_)
    detail::throw_shape("SplineRenderMap::apply_transpose size mismatch");
  for (std::size_t j = 0; j < frames(); ++j)
    for (std::size_t e = offsets_[j]; e < offsets_[j + 1]; ++e)
      grad[indices_[e]] += weights_[e] * upstream[j];
}

SplineRenderer::SplineRenderer(const PiecewiseBezier& layout, std::size_t frames, int oversample)
    : full_(SplineRenderMap::build(layout, frames, oversample)),
      polygon_(SplineRenderMap::build(control_polygon(layout), frames, oversample)) {}

std::vector<double> SplineRenderer::render(std::span<const double> y, double beta) const {
  std::vector<double> out(frames());
  full_.apply(y, out);
  if (beta < 1.0) {
    std::vector<double> poly(frames());
    polygon_.apply(y, poly);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = (1.0 - beta) * poly[j] + beta * out[j];
  }
  return out;
}

std::vector<double> SplineRenderer::vjp(std::span<const double> upstream, double beta) const {
  std::vector<double> grad(controls(), 0.0);
  if (beta >= 1.0) {
    full_.apply_transpose(upstream, grad);
    return grad;
  }
  std::vector<double> scaled(upstream.size());
  for (std::size_t j = 0; j < scaled.size(); ++j) scaled[j] = beta * upstream[j];
  full_.apply_transpose(scaled, grad);
  for (std::size_t j = 0; j < scaled.size(); ++j) scaled[j] = (1.0 - beta) * upstream[j];
  polygon_.apply_transpose(scaled, grad);
  return grad;
}

ModSignal render_spline(const PiecewiseBezier& curve, std::size_t frames, double beta,
                        double rate_hz) {
  require_valid(curve);
  if (!(beta >= 0.0 && beta <= 1.0)) detail::throw_domain("render_spline: blend outside [0, 1]");
  const SplineRenderer renderer(curve, frames);
  std::vector<double> y(curve.points().size());
  std::transform(curve.points().begin(), curve.points().end(), y.begin(),
                 [](const Point2& p) { return p.y; });
  ModSignal out{renderer.render(y, beta), rate_hz};
  for (double& v : out.values) v = std::clamp(v, 0.0, 1.0);
  return out;
}

double blend_schedule(long step, long total) {
  if (total <= 0) return 1.0;
  const double ramp = (2.0 / 3.0) * static_cast<double>(total);
  return std::min(1.0, static_cast<double>(step) / ramp);
}

double noise_schedule(long step, long total, double sigma) {
  if (total <= 0) return 0.0;
  const double ramp = (2.0 / 3.0) * static_cast<double>(total);
  return sigma * std::max(0.0, 1.0 - static_cast<double>(step) / ramp);
}

std::size_t control_hop(double rate_hz, double sample_rate) {
  if (!(rate_hz > 0.0 && sample_rate > 0.0)) throw ConfigError("rates must be positive");
  const double hop = sample_rate / rate_hz;
  const double rounded = std::round(hop);
  if (rounded < 1.0 || std::abs(hop - rounded) > 1e-9)
    throw ConfigError("sample_rate / control rate must be an integer hop");
  return static_cast<std::size_t>(rounded);
}

std::vector<double> upsample_linear(std::span<const double> frames, std::size_t hop) {
  if (frames.size() < 2) detail::throw_shape("upsampling needs at least 2 frames");
  if (hop == 0) throw ConfigError("hop must be positive");
  const std::size_t n = (frames.size() - 1) * hop;
  std::vector<double> out(n);
  const double inv = 1.0 / static_cast<double>(hop);
  for (std::size_t j = 0; j + 1 < frames.size(); ++j) {
    const double a = frames[j];
    const double d = frames[j + 1] - a;
    double* dst = out.data() + j * hop;
    dst[0] = a;
    for (std::size_t r = 1; r < hop; ++r) dst[r] = a + d * (static_cast<double>(r) * inv);
  }
  return out;
}

std::vector<double> upsample_linear_vjp(std::span<const double> upstream, std::size_t frames,
                                        std::size_t hop) {
  if (frames < 2 || upstream.size() != (frames - 1) * hop)
    detail::throw_shape("upsample_linear_vjp: size mismatch");
  std::vector<double> g(frames, 0.0);
  const double inv = 1.0 / static_cast<double>(hop);
  for (std::size_t j = 0; j + 1 < frames; ++j) {
    const double* src = upstream.data() + j * hop;
    double ga = src[0];
    double gb = 0.0;
    for (std::size_t r = 1; r < hop; ++r) {
      const double w = static_cast<double>(r) * inv;
      ga += (1.0 - w) * src[r];
      gb += w * src[r];
    }
    g[j] += ga;
    g[j + 1] += gb;
  }
  return g;
}

std::vector<double> upsample_to_audio(const ModSignal& sig, std::size_t n_samples,
                                      double sample_rate) {
  const std::size_t hop = control_hop(sig.rate_hz, sample_rate);
  if (sig.size() < 2 || n_samples != (sig.size() - 1) * hop)
    detail::throw_shape("upsample_to_audio: n_samples must equal (N - 1) * hop");
  return upsample_linear(sig.values, hop);
}

std::size_t frames_for_samples(std::size_t n_samples, std::size_t hop) {
  if (hop == 0) throw ConfigError("hop must be positive");
  return 1 + n_samples / hop;
}

}  // namespace moddisc
