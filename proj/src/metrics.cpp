#include "moddisc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "moddisc/error.hpp"
#include "moddisc/fft.hpp"
#include "reflect.hpp"

namespace moddisc {

namespace {

void same_length(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) detail::throw_shape(std::string(what) + ": lengths differ");
  if (a.empty()) detail::throw_shape(std::string(what) + ": empty input");
}

std::vector<double> central_diff(std::span<const double> s) {
  const std::size_t n = s.size();
  std::vector<double> d(n);
  d[0] = s[1] - s[0];
  d[n - 1] = s[n - 1] - s[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = 0.5 * (s[i + 1] - s[i - 1]);
  return d;
}

std::vector<double> periodic_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

}  // namespace

double l1_dist(std::span<const double> a, std::span<const double> b) {
  same_length(a, b, "l1_dist");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

double grad_l1_dist(std::span<const double> a, std::span<const double> b, double rate_hz) {
  same_length(a, b, "grad_l1_dist");
  if (a.size() < 3) detail::throw_shape("grad_l1_dist: need at least 3 samples");
  const auto da = central_diff(a);
  const auto db = central_diff(b);
  return l1_dist(da, db) * rate_hz;
}

double pcc(std::span<const double> a, std::span<const double> b) {
  same_length(a, b, "pcc");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double frechet_dist(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) detail::throw_shape("frechet_dist: empty input");
  const std::size_t n = a.size(), m = b.size();
  const double na = n > 1 ? static_cast<double>(n - 1) : 1.0;
  const double nb = m > 1 ? static_cast<double>(m - 1) : 1.0;
  auto dist = [&](std::size_t i, std::size_t j) {
    const double dx = static_cast<double>(i) / na - static_cast<double>(j) / nb;
    const double dy = a[i] - b[j];
    return std::sqrt(dx * dx + dy * dy);
  };
  std::vector<double> prev(m), cur(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = dist(i, j);
      double best;
      if (i == 0 && j == 0) best = d;
      else if (i == 0) best = std::max(cur[j - 1], d);
      else if (j == 0) best = std::max(prev[j], d);
      else best = std::max(std::min({prev[j], prev[j - 1], cur[j - 1]}), d);
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

double total_variation(std::span<const double> s, double rate_hz) {
  if (s.size() < 2) detail::throw_shape("total_variation: need at least 2 samples");
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) acc += std::abs(s[i + 1] - s[i]);
  return acc * rate_hz / static_cast<double>(s.size() - 1);
}

std::size_t turning_points(std::span<const double> s) {
  if (s.size() < 3) detail::throw_shape("turning_points: need at least 3 samples");
  std::size_t count = 0;
  int last = 0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double d = s[i + 1] - s[i];
    const int sign = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (sign == 0) continue;
    if (last != 0 && sign != last) ++count;
    last = sign;
  }
  return count;
}

double spectral_entropy(std::span<const double> s) {
  if (s.size() < 2) detail::throw_shape("spectral_entropy: need at least 2 samples");
  const std::size_t n = s.size();
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(n);
  const auto w = periodic_hann(n);
  std::vector<double> buf(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = (s[i] - mean) * w[i];
  const RealFft& fft = fft_plan(n);
  std::vector<std::complex<double>> spec(fft.bins());
  fft.forward(buf, spec);
  const std::size_t count = spec.size() - 1;
  if (count < 2) return 0.0;
  double total = 0.0;
  std::vector<double> power(count);
  for (std::size_t k = 0; k < count; ++k) {
    power[k] = std::norm(spec[k + 1]);
    total += power[k];
  }
  // Relative threshold: rounding noise left by mean removal is not signal.
  double scale = 0.0;
  for (double v : s) scale = std::max(scale, std::abs(v));
  if (total <= 1e-24 * std::max(1.0, scale * scale) * static_cast<double>(n)) return 0.0;
  double h = 0.0;
  for (double p : power) {
    if (p <= 0.0) continue;
    const double q = p / total;
    h -= q * std::log(q);
  }
  return std::clamp(h / std::log(static_cast<double>(count)), 0.0, 1.0);
}

SignalStats signal_stats(std::span<const double> s, double rate_hz) {
  return {total_variation(s, rate_hz), turning_points(s), spectral_entropy(s)};
}

DistanceQuad distance_quad(std::span<const double> predicted, std::span<const double> reference,
                           double rate_hz) {
  return {l1_dist(predicted, reference), grad_l1_dist(predicted, reference, rate_hz),
          pcc(predicted, reference), frechet_dist(predicted, reference)};
}

namespace {

void check_features(std::span<const double> x, const FeatureSpec& spec) {
  if (spec.hop == 0 || spec.window < 2) throw ConfigError("feature hop and window must be positive");
  if (x.size() <= spec.window / 2) detail::throw_shape("audio shorter than half a feature window");
}

}  // namespace

ModSignal rms_frames(std::span<const double> x, const FeatureSpec& spec, bool normalize) {
  check_features(x, spec);
  const std::size_t half = spec.window / 2;
  const std::vector<double> padded = detail::reflect_pad(x, half);
  const std::size_t frames = 1 + x.size() / spec.hop;
  ModSignal out{std::vector<double>(frames), spec.rate_hz};
  for (std::size_t m = 0; m < frames; ++m) {
    const double* src = padded.data() + m * spec.hop;
    double acc = 0.0;
    for (std::size_t i = 0; i < spec.window; ++i) acc += src[i] * src[i];
    out.values[m] = std::sqrt(acc / static_cast<double>(spec.window));
  }
  if (normalize) {
    const double peak = *std::max_element(out.values.begin(), out.values.end());
    if (peak > 0.0)
      for (double& v : out.values) v = std::min(1.0, v / peak);
  }
  return out;
}

ModSignal spectral_flatness_frames(std::span<const double> x, const FeatureSpec& spec,
                                   double power_floor) {
  check_features(x, spec);
  const std::size_t half = spec.window / 2;
  const std::vector<double> padded = detail::reflect_pad(x, half);
  const std::size_t frames = 1 + x.size() / spec.hop;
  const auto w = periodic_hann(spec.window);
  const RealFft& fft = fft_plan(spec.window);
  std::vector<double> buf(spec.window);
  std::vector<std::complex<double>> bins(fft.bins());
  ModSignal out{std::vector<double>(frames), spec.rate_hz};
  for (std::size_t m = 0; m < frames; ++m) {
    const double* src = padded.data() + m * spec.hop;
    for (std::size_t i = 0; i < spec.window; ++i) buf[i] = src[i] * w[i];
    fft.forward(buf, bins);
    double log_sum = 0.0, sum = 0.0;
    for (const auto& c : bins) {
      const double p = std::max(std::norm(c), power_floor);
      log_sum += std::log(p);
      sum += p;
    }
    const double count = static_cast<double>(bins.size());
    out.values[m] = std::clamp(std::exp(log_sum / count) / (sum / count), 0.0, 1.0);
  }
  return out;
}

bool vital_filter_predicate(std::span<const double> s, const VitalFilterConfig& cfg) {
  if (s.size() < 3) return false;
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  if (*hi - *lo < cfg.min_span) return false;
  std::size_t flat = 0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i)
    if (std::abs(s[i + 1] - s[i]) < cfg.flat_threshold) ++flat;
  if (static_cast<double>(flat) / static_cast<double>(s.size() - 1) > cfg.max_flat_fraction)
    return false;
  return turning_points(s) + 1 <= cfg.max_segments;
}

}  // namespace moddisc
