#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace moddisc {

struct AdamOptions {
  double lr = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long t = 0;
};

/// Bias-corrected Adam without weight decay. Throws NumericalError on a
/// non-finite gradient (parameters and state are left untouched).
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamOptions& opts = {});

struct FiniteDiffReport {
  double max_rel_error = 0.0;
  std::size_t worst = 0;  // coordinate or probe index
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares an analytic gradient against central differences. With
/// probes == 0 every coordinate is checked; otherwise `probes` random unit
/// directions are used. Relative error is |a - f| / max(|a|, |f|, 1e-6 * max|grad|).
FiniteDiffReport finite_diff_check(const std::function<double(std::span<const double>)>& loss,
                                   std::span<const double> params, std::span<const double> grad,
                                   double eps = 1e-6, std::size_t probes = 0,
                                   std::uint64_t seed = 0);

}  // namespace moddisc
