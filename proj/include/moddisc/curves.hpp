#pragma once

// Piecewise 2D Bezier curves used as modulation-signal parameterizations.
//
// A curve with K segments of degree n stores K*n + 1 control points; segment
// k uses points [k*n, k*n + n]. Junction points are shared, so positional
// continuity holds by construction. The x coordinate is normalized time.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace moddisc {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

class PiecewiseBezier {
 public:
  PiecewiseBezier() = default;
  /// points.size() must equal K*degree + 1 for some K >= 1.
  PiecewiseBezier(int degree, std::vector<Point2> points);

  /// K uniform segments; interior control x evenly spaced within each
  /// segment, so x(t) = t. `y` holds the K*n + 1 shared control values.
  static PiecewiseBezier uniform(int segments, int degree, std::span<const double> y);

  int degree() const noexcept { return degree_; }
  int segments() const noexcept { return segments_; }
  std::span<const Point2> points() const noexcept { return points_; }
  std::span<Point2> points() noexcept { return points_; }
  std::span<const Point2> segment(int k) const;

  /// K + 1 junction x values (x_{0,0}, x_{0,n}, ..., x_{K-1,n}).
  std::vector<double> knots() const;

  friend bool operator==(const PiecewiseBezier&, const PiecewiseBezier&) = default;

 private:
  int degree_ = 0;
  int segments_ = 0;
  std::vector<Point2> points_;
};

struct SegmentLocation {
  int index = 0;
  double u = 0.0;
};

/// k = min(floor(K t), K - 1), u = K t - k. Throws DomainError for t outside [0, 1].
SegmentLocation segment_index(double t, int segments);

/// Bernstein basis of degree n at u; out.size() must be n + 1.
void bernstein_weights(int degree, double u, std::span<double> out);

/// Bernstein sum over n + 1 control points (n >= 1).
Point2 eval_bezier_segment(std::span<const Point2> points, double u);

/// Validates the curve, then evaluates B(t).
Point2 eval_piecewise(const PiecewiseBezier& curve, double t);

/// Same as eval_piecewise without validation; for hot loops over curves
/// already known to be valid.
Point2 eval_piecewise_unchecked(const PiecewiseBezier& curve, double t);

struct Violation {
  int segment = -1;  // -1 when the violation is not tied to one segment
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// All invariant violations, ordered by segment then by check. Empty when valid.
std::vector<Violation> validate(const PiecewiseBezier& curve);

/// Throws ValidationError listing the first violation.
void require_valid(const PiecewiseBezier& curve);

/// Cotangents on the K*n + 1 control y values for outputs y(t_i) with
/// upstream cotangents upstream[i]. y(t) does not depend on control x, so
/// only y cotangents are returned.
std::vector<double> bezier_vjp(const PiecewiseBezier& curve, std::span<const double> t,
                               std::span<const double> upstream);

/// The degree-1 curve through every control point of `curve`
/// (K*n segments). Its knots may repeat when control x values do.
PiecewiseBezier control_polygon(const PiecewiseBezier& curve);

struct CurveGenConfig {
  int degree_min = 1;
  int degree_max = 3;
  int segments_min = 1;
  int segments_max = 8;
  double min_segment_fraction = 0.5;  // of the uniform segment length 1/K
  double value_min = 0.0;
  double value_max = 1.0;

  void validate() const;
};

/// Random 1D modulation curve: random degree and segment count, random
/// knots with every gap >= min_segment_fraction / K, control y uniform in
/// [value_min, value_max], interior control x evenly spaced per segment.
PiecewiseBezier random_mod_curve(std::mt19937_64& rng, const CurveGenConfig& cfg = {});

}  // namespace moddisc
