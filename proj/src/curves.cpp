#include "moddisc/curves.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "moddisc/error.hpp"

namespace moddisc {

PiecewiseBezier::PiecewiseBezier(int degree, std::vector<Point2> points)
    : degree_(degree), points_(std::move(points)) {
  if (degree_ < 1) detail::throw_shape("Bezier degree must be >= 1");
  const auto count = static_cast<int>(points_.size());
  if (count < degree_ + 1 || (count - 1) % degree_ != 0)
    detail::throw_shape("control point count must be K*n + 1");
  segments_ = (count - 1) / degree_;
}

PiecewiseBezier PiecewiseBezier::uniform(int segments, int degree, std::span<const double> y) {
  if (segments < 1 || degree < 1) detail::throw_shape("uniform curve needs K >= 1 and n >= 1");
  const std::size_t count = static_cast<std::size_t>(segments) * degree + 1;
  if (y.size() != count) detail::throw_shape("uniform curve: y size must be K*n + 1");
  std::vector<Point2> pts(count);
  const double total = static_cast<double>(segments) * degree;
  for (std::size_t i = 0; i < count; ++i) pts[i] = {static_cast<double>(i) / total, y[i]};
  pts.back().x = 1.0;
  return PiecewiseBezier(degree, std::move(pts));
}

std::span<const Point2> PiecewiseBezier::segment(int k) const {
  if (k < 0 || k >= segments_) detail::throw_shape("segment index out of range");
  return std::span<const Point2>(points_).subspan(static_cast<std::size_t>(k) * degree_,
                                                  static_cast<std::size_t>(degree_) + 1);
}

std::vector<double> PiecewiseBezier::knots() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(segments_) + 1);
  for (int k = 0; k <= segments_; ++k) out.push_back(points_[static_cast<std::size_t>(k) * degree_].x);
  return out;
}

SegmentLocation segment_index(double t, int segments) {
  if (!(t >= 0.0 && t <= 1.0)) detail::throw_domain("segment_index: t outside [0, 1]");
  if (segments < 1) detail::throw_domain("segment_index: K must be >= 1");
  const double scaled = static_cast<double>(segments) * t;
  const int k = std::min(static_cast<int>(std::floor(scaled)), segments - 1);
  return {k, scaled - static_cast<double>(k)};
}

void bernstein_weights(int degree, double u, std::span<double> out) {
  if (out.size() != static_cast<std::size_t>(degree) + 1)
    detail::throw_shape("bernstein_weights: output size must be n + 1");
  // Build up degree by degree (de Casteljau on the basis): stable and exact
  // at the endpoints.
  const double v = 1.0 - u;
  out[0] = 1.0;
  for (int d = 1; d <= degree; ++d) {
    out[static_cast<std::size_t>(d)] = u * out[static_cast<std::size_t>(d) - 1];
    for (int i = d - 1; i >= 1; --i)
      out[static_cast<std::size_t>(i)] =
          v * out[static_cast<std::size_t>(i)] + u * out[static_cast<std::size_t>(i) - 1];
    out[0] = v * out[0];
  }
}

Point2 eval_bezier_segment(std::span<const Point2> points, double u) {
  if (points.size() < 2) detail::throw_shape("Bezier segment needs at least 2 control points");
  if (u == 0.0) return points.front();
  if (u == 1.0) return points.back();
  const int degree = static_cast<int>(points.size()) - 1;
  double w[16];
  std::vector<double> heap;
  std::span<double> weights;
  if (points.size() <= 16) {
    weights = std::span<double>(w, points.size());
  } else {
    heap.resize(points.size());
    weights = heap;
  }
  bernstein_weights(degree, u, weights);
  Point2 acc;
  for (std::size_t i = 0; i < points.size(); ++i) {
    acc.x += weights[i] * points[i].x;
    acc.y += weights[i] * points[i].y;
  }
  return acc;
}

Point2 eval_piecewise_unchecked(const PiecewiseBezier& curve, double t) {
  const SegmentLocation loc = segment_index(t, curve.segments());
  return eval_bezier_segment(curve.segment(loc.index), loc.u);
}

Point2 eval_piecewise(const PiecewiseBezier& curve, double t) {
  require_valid(curve);
  return eval_piecewise_unchecked(curve, t);
}

std::vector<Violation> validate(const PiecewiseBezier& curve) {
  std::vector<Violation> out;
  if (curve.segments() < 1 || curve.degree() < 1) {
    out.push_back({-1, "empty curve"});
    return out;
  }
  const auto pts = curve.points();
  for (const Point2& p : pts) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      out.push_back({-1, "non-finite control point"});
      return out;
    }
  }
  if (pts.front().x != 0.0) out.push_back({0, "start knot != 0"});
  if (pts.back().x != 1.0) out.push_back({curve.segments() - 1, "end knot != 1"});
  for (int k = 0; k < curve.segments(); ++k) {
    const auto seg = curve.segment(k);
    if (!(seg.back().x > seg.front().x)) out.push_back({k, "knots not strictly increasing"});
    for (std::size_t i = 1; i < seg.size(); ++i) {
      if (seg[i].x < seg[i - 1].x) {
        out.push_back({k, "control x decreasing within segment"});
        break;
      }
    }
    if (seg.front().x < 0.0 || seg.back().x > 1.0) out.push_back({k, "control x outside [0, 1]"});
  }
  return out;
}

void require_valid(const PiecewiseBezier& curve) {
  const auto violations = validate(curve);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "invalid curve: " << violations.front().message;
    if (violations.front().segment >= 0) msg << " (segment " << violations.front().segment << ")";
    throw ValidationError(msg.str());
  }
}

std::vector<double> bezier_vjp(const PiecewiseBezier& curve, std::span<const double> t,
                               std::span<const double> upstream) {
  if (t.size() != upstream.size()) detail::throw_shape("bezier_vjp: t and upstream differ in size");
  std::vector<double> grad(curve.points().size(), 0.0);
  const int n = curve.degree();
  std::vector<double> w(static_cast<std::size_t>(n) + 1);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (upstream[i] == 0.0) continue;
    const SegmentLocation loc = segment_index(t[i], curve.segments());
    bernstein_weights(n, loc.u, w);
    const std::size_t base = static_cast<std::size_t>(loc.index) * n;
    for (int j = 0; j <= n; ++j) grad[base + j] += upstream[i] * w[static_cast<std::size_t>(j)];
  }
  return grad;
}

PiecewiseBezier control_polygon(const PiecewiseBezier& curve) {
  return PiecewiseBezier(1, std::vector<Point2>(curve.points().begin(), curve.points().end()));
}

void CurveGenConfig::validate() const {
  if (degree_min < 1 || degree_max > 3 || degree_min > degree_max)
    throw ConfigError("CurveGenConfig: degree range must lie within [1, 3]");
  if (segments_min < 1 || segments_max > 8 || segments_min > segments_max)
    throw ConfigError("CurveGenConfig: segment range must lie within [1, 8]");
  if (!(min_segment_fraction > 0.0 && min_segment_fraction <= 1.0))
    throw ConfigError("CurveGenConfig: min_segment_fraction must lie in (0, 1]");
  if (!(value_min < value_max)) throw ConfigError("CurveGenConfig: empty value range");
}

namespace {

std::vector<double> random_knots(std::mt19937_64& rng, int segments, double min_gap) {
  std::vector<double> knots(static_cast<std::size_t>(segments) + 1);
  knots.front() = 0.0;
  knots.back() = 1.0;
  if (segments == 1) return knots;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr int kMaxAttempts = 1000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    for (int i = 1; i < segments; ++i) knots[static_cast<std::size_t>(i)] = unit(rng);
    std::sort(knots.begin() + 1, knots.end() - 1);
    bool ok = true;
    for (std::size_t i = 1; i < knots.size(); ++i) {
      if (knots[i] - knots[i - 1] < min_gap) {
        ok = false;
        break;
      }
    }
    if (ok) return knots;
  }
  // Fallback: jittered uniform grid; jitter of +-(1/K - min_gap)/2 keeps
  // every gap >= min_gap.
  const double uniform = 1.0 / segments;
  std::uniform_real_distribution<double> jitter(-0.5 * (uniform - min_gap), 0.5 * (uniform - min_gap));
  for (int i = 1; i < segments; ++i) knots[static_cast<std::size_t>(i)] = i * uniform + jitter(rng);
  return knots;
}

}  // namespace

PiecewiseBezier random_mod_curve(std::mt19937_64& rng, const CurveGenConfig& cfg) {
  cfg.validate();
  std::uniform_int_distribution<int> degree_dist(cfg.degree_min, cfg.degree_max);
  std::uniform_int_distribution<int> segment_dist(cfg.segments_min, cfg.segments_max);
  const int degree = degree_dist(rng);
  const int segments = segment_dist(rng);
  const double min_gap = cfg.min_segment_fraction / segments;
  const std::vector<double> knots = random_knots(rng, segments, min_gap);

  std::uniform_real_distribution<double> value(cfg.value_min, cfg.value_max);
  std::vector<Point2> pts(static_cast<std::size_t>(segments) * degree + 1);
  for (int k = 0; k < segments; ++k) {
    const double a = knots[static_cast<std::size_t>(k)];
    const double b = knots[static_cast<std::size_t>(k) + 1];
    for (int i = 0; i < degree; ++i)
      pts[static_cast<std::size_t>(k) * degree + i].x = a + (b - a) * i / degree;
  }
  pts.back().x = 1.0;
  for (Point2& p : pts) p.y = value(rng);
  return PiecewiseBezier(degree, std::move(pts));
}

}  // namespace moddisc
