#pragma once

#include <span>

#include "moddisc/curves.hpp"

namespace moddisc {

struct SplineFitOptions {
  int segments = 24;
  int degree = 3;
  /// Also move interior control x values (monotone within each segment).
  /// Knots stay on the uniform grid.
  bool optimize_x = true;
  int max_iterations = 60;
  int oversample = 8;
};

struct SplineFitResult {
  PiecewiseBezier curve;
  double max_abs_error = 0.0;
  double rms_error = 0.0;
  int iterations = 0;
};

/// Least-squares fit of a piecewise Bezier curve to a control-rate signal
/// sampled on a uniform grid over [0, 1]. Control y values are solved
/// exactly for each x layout; interior x values are refined by
/// Levenberg-Marquardt on top of that linear solve.
SplineFitResult fit_spline_lsq(std::span<const double> signal, const SplineFitOptions& options = {});

}  // namespace moddisc
