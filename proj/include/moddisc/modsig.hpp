#pragma once

// Modulation-signal parameterizations and control-rate rendering.
//
// Three parameterizations map unconstrained parameters to a control-rate
// signal in [0, 1]:
//   frame  - one logistic-squashed value per control frame
//   lpf    - frame values smoothed by a zero-phase Blackman windowed-sinc
//   spline - a piecewise Bezier curve rendered with x as time
// Each renderer has a matching vector-Jacobian product.

#include <cstddef>
#include <span>
#include <vector>

#include "moddisc/curves.hpp"

namespace moddisc {

inline constexpr double kDefaultControlRate = 500.0;

struct ModSignal {
  std::vector<double> values;
  double rate_hz = kDefaultControlRate;

  std::size_t size() const noexcept { return values.size(); }
  /// Duration spanned by the frames, (N - 1) / rate.
  double duration() const noexcept;
  /// Throws ValidationError unless every value lies in [0, 1] and rate > 0.
  void validate() const;
};

double logistic(double x) noexcept;

ModSignal render_frame(std::span<const double> raw, double rate_hz = kDefaultControlRate);
/// d(values)/d(raw) applied to upstream: g * v * (1 - v).
std::vector<double> render_frame_vjp(const ModSignal& rendered, std::span<const double> upstream);

struct LpfSpec {
  double cutoff_hz = 8.0;
  /// Odd tap count; 0 selects the default ceil(rate / cutoff) rounded up to odd.
  int taps = 0;

  int tap_count(double rate_hz) const;
  void validate(double rate_hz) const;
};

/// Blackman windowed-sinc low-pass, normalized to unity DC gain.
/// Throws DomainError unless 0 < cutoff < rate / 2.
std::vector<double> design_windowed_sinc(double cutoff_hz, double rate_hz, int taps = 0);

/// Zero-phase FIR with reflect padding; output length equals input length.
/// Requires x.size() > taps.size() / 2.
std::vector<double> zero_phase_filter(std::span<const double> x, std::span<const double> taps);
std::vector<double> zero_phase_filter_vjp(std::span<const double> upstream,
                                          std::span<const double> taps);

/// logistic -> zero-phase FIR -> clamp to [0, 1].
ModSignal render_lpf(std::span<const double> raw, const LpfSpec& spec,
                     double rate_hz = kDefaultControlRate);
std::vector<double> render_lpf_vjp(std::span<const double> raw, const LpfSpec& spec,
                                   double rate_hz, std::span<const double> upstream);

/// Sparse linear map from a curve's control y values to frame values, for
/// fixed control x. Rows are frames; each row mixes at most 2 (n + 1)
/// controls.
class SplineRenderMap {
 public:
  /// Dense-samples the curve at oversample * frames uniform t values, then
  /// linearly resamples y onto the uniform frame grid using the sampled x
  /// as time. Does not validate (control polygons may repeat knots).
  static SplineRenderMap build(const PiecewiseBezier& curve, std::size_t frames,
                               int oversample = 8);

  std::size_t frames() const noexcept { return offsets_.size() - 1; }
  std::size_t controls() const noexcept { return controls_; }

  void apply(std::span<const double> y, std::span<double> out) const;
  /// Accumulates the transpose product into grad (size controls()).
  void apply_transpose(std::span<const double> upstream, std::span<double> grad) const;

  std::span<const std::size_t> row_offsets() const noexcept { return offsets_; }
  std::span<const std::size_t> indices() const noexcept { return indices_; }
  std::span<const double> weights() const noexcept { return weights_; }

 private:
  std::size_t controls_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> indices_;
  std::vector<double> weights_;
};

/// Renders (1 - beta) * control-polygon + beta * full-degree curve on a
/// fixed x layout. Holds both maps so repeated renders with new y values
/// are cheap.
class SplineRenderer {
 public:
  SplineRenderer(const PiecewiseBezier& layout, std::size_t frames, int oversample = 8);

  std::size_t frames() const noexcept { return full_.frames(); }
  std::size_t controls() const noexcept { return full_.controls(); }

  std::vector<double> render(std::span<const double> y, double beta) const;
  std::vector<double> vjp(std::span<const double> upstream, double beta) const;

 private:
  SplineRenderMap full_;
  SplineRenderMap polygon_;
};

/// Validates the curve and renders it with blend beta in [0, 1].
ModSignal render_spline(const PiecewiseBezier& curve, std::size_t frames, double beta = 1.0,
                        double rate_hz = kDefaultControlRate);

/// beta = min(1, step / (2/3 total)); total == 0 gives 1.
double blend_schedule(long step, long total);

/// sigma * max(0, 1 - step / (2/3 total)); total == 0 gives 0.
double noise_schedule(long step, long total, double sigma);

/// hop = sample_rate / rate must be an integer (ConfigError otherwise) and
/// n_samples = (N - 1) * hop (ShapeError otherwise).
std::size_t control_hop(double rate_hz, double sample_rate);

/// Linear interpolation of control frames to n_samples = (N - 1) * hop.
std::vector<double> upsample_linear(std::span<const double> frames, std::size_t hop);
/// Transpose of upsample_linear: audio-rate cotangents -> frame cotangents.
std::vector<double> upsample_linear_vjp(std::span<const double> upstream, std::size_t frames,
                                        std::size_t hop);

std::vector<double> upsample_to_audio(const ModSignal& sig, std::size_t n_samples,
                                      double sample_rate);

/// 1 + n_samples / hop control frames for n_samples audio samples.
std::size_t frames_for_samples(std::size_t n_samples, std::size_t hop);

}  // namespace moddisc
