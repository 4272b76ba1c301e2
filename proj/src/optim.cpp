#include "moddisc/optim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "moddisc/error.hpp"

namespace moddisc {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamOptions& opts) {
  if (params.size() != grads.size()) detail::throw_shape("adam_step: parameter/gradient size mismatch");
  for (std::size_t i = 0; i < grads.size(); ++i)
    if (!std::isfinite(grads[i]))
      throw NumericalError("adam_step: non-finite gradient at index " + std::to_string(i));
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) detail::throw_shape("adam_step: state size mismatch");
  ++state.t;
  const double c1 = 1.0 - std::pow(opts.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(opts.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = opts.beta1 * state.m[i] + (1.0 - opts.beta1) * g;
    state.v[i] = opts.beta2 * state.v[i] + (1.0 - opts.beta2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= opts.lr * mhat / (std::sqrt(vhat) + opts.eps);
  }
}

FiniteDiffReport finite_diff_check(const std::function<double(std::span<const double>)>& loss,
                                   std::span<const double> params, std::span<const double> grad,
                                   double eps, std::size_t probes, std::uint64_t seed) {
  if (params.size() != grad.size()) detail::throw_shape("finite_diff_check: size mismatch");
  double gmax = 0.0;
  for (double g : grad) gmax = std::max(gmax, std::abs(g));
  const double abs_floor = std::max(1e-6 * gmax, 1e-300);

  std::vector<double> work(params.begin(), params.end());
  FiniteDiffReport report;
  bool first = true;
  auto consider = [&](std::size_t idx, double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), abs_floor});
    const double err = std::abs(analytic - numeric) / denom;
    if (first || err > report.max_rel_error) report = {err, idx, analytic, numeric};
    first = false;
  };

  if (probes == 0) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double orig = work[i];
      work[i] = orig + eps;
      const double fp = loss(work);
      work[i] = orig - eps;
      const double fm = loss(work);
      work[i] = orig;
      consider(i, grad[i], (fp - fm) / (2.0 * eps));
    }
    return report;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> dir(params.size());
  for (std::size_t p = 0; p < probes; ++p) {
    double norm = 0.0;
    for (double& d : dir) {
      d = normal(rng);
      norm += d * d;
    }
    norm = std::sqrt(norm);
    double analytic = 0.0;
    for (std::size_t i = 0; i < dir.size(); ++i) {
      dir[i] /= norm;
      analytic += dir[i] * grad[i];
    }
    for (std::size_t i = 0; i < work.size(); ++i) work[i] = params[i] + eps * dir[i];
    const double fp = loss(work);
    for (std::size_t i = 0; i < work.size(); ++i) work[i] = params[i] - eps * dir[i];
    const double fm = loss(work);
    consider(p, analytic, (fp - fm) / (2.0 * eps));
  }
  return report;
}

}  // namespace moddisc
