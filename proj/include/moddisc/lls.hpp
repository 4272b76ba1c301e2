#pragma once

// Least-squares alignment of discovered signals to a reference:
// min over (w, b) of || sum_i w_i x_i + b - y ||_2.

#include <span>
#include <vector>

namespace moddisc {

struct LlsFit {
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> aligned;  // not clamped
  double residual_rms = 0.0;
  bool rank_deficient = false;
};

/// Ridge-regularized normal equations (ridge 1e-9 * trace / dim) followed by
/// iterative refinement, which converges to the minimum-norm solution.
LlsFit lls_align(std::span<const std::span<const double>> sources, std::span<const double> reference);

inline LlsFit lls_align(std::span<const double> source, std::span<const double> reference) {
  const std::span<const double> one[] = {source};
  return lls_align(one, reference);
}

}  // namespace moddisc
