#pragma once

// Distances and statistics for modulation signals, and frame-rate audio
// features (RMS loudness, spectral flatness).

#include <cstddef>
#include <span>
#include <vector>

#include "moddisc/modsig.hpp"

namespace moddisc {

/// Mean absolute difference.
double l1_dist(std::span<const double> a, std::span<const double> b);

/// Mean absolute difference of first derivatives (central differences in the
/// interior, one-sided at the ends), expressed per second via rate_hz.
double grad_l1_dist(std::span<const double> a, std::span<const double> b,
                    double rate_hz = kDefaultControlRate);

/// Pearson correlation. Returns NaN when either input has zero variance.
double pcc(std::span<const double> a, std::span<const double> b);

/// Discrete Frechet distance between the polylines (i / (N - 1), a[i]) and
/// (j / (M - 1), b[j]) under the Euclidean metric. A single sample sits at
/// time 0.
double frechet_dist(std::span<const double> a, std::span<const double> b);

/// Sum of |s[i+1] - s[i]| divided by the duration (N - 1) / rate_hz.
double total_variation(std::span<const double> s, double rate_hz = kDefaultControlRate);

/// Sign changes of the first difference after dropping zero differences.
std::size_t turning_points(std::span<const double> s);

/// Normalized Shannon entropy of the Hann-windowed power spectrum with the
/// mean removed and DC excluded, in [0, 1]. 0 when nothing remains.
double spectral_entropy(std::span<const double> s);

struct SignalStats {
  double total_variation = 0.0;
  std::size_t turning_points = 0;
  double spectral_entropy = 0.0;
};
SignalStats signal_stats(std::span<const double> s, double rate_hz = kDefaultControlRate);

struct DistanceQuad {
  double l1 = 0.0;
  double grad_l1 = 0.0;
  double pcc = 0.0;
  double frechet = 0.0;
};
DistanceQuad distance_quad(std::span<const double> predicted, std::span<const double> reference,
                           double rate_hz = kDefaultControlRate);

struct FeatureSpec {
  std::size_t hop = 96;
  std::size_t window = 1024;
  double rate_hz = kDefaultControlRate;
};

/// RMS over centered (reflect-padded) windows, 1 + n / hop frames. With
/// normalize set, divided by the clip maximum (all zeros stay zero).
ModSignal rms_frames(std::span<const double> x, const FeatureSpec& spec = {}, bool normalize = true);

/// Geometric over arithmetic mean of the Hann-windowed power spectrum,
/// floored at power_floor. Silence gives 1.
ModSignal spectral_flatness_frames(std::span<const double> x, const FeatureSpec& spec = {},
                                   double power_floor = 1e-12);

struct VitalFilterConfig {
  std::size_t max_segments = 24;
  double min_span = 0.5;
  double flat_threshold = 1e-3;
  double max_flat_fraction = 0.5;
};

/// True when the curve is kept: span >= min_span, at most max_flat_fraction
/// near-zero steps, and turning_points + 1 <= max_segments.
bool vital_filter_predicate(std::span<const double> s, const VitalFilterConfig& cfg = {});

}  // namespace moddisc
