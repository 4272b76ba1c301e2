#pragma once

// numpy-style "reflect" padding (edge sample not repeated) and its adjoint.

#include <cstddef>
#include <span>
#include <vector>

namespace moddisc::detail {

inline std::size_t reflect_index(long i, long n) {
  if (n == 1) return 0;
  const long period = 2 * (n - 1);
  long r = i % period;
  if (r < 0) r += period;
  if (r >= n) r = period - r;
  return static_cast<std::size_t>(r);
}

inline std::vector<double> reflect_pad(std::span<const double> x, std::size_t pad) {
  const long n = static_cast<long>(x.size());
  std::vector<double> padded(x.size() + 2 * pad);
  for (std::size_t i = 0; i < padded.size(); ++i)
    padded[i] = x[reflect_index(static_cast<long>(i) - static_cast<long>(pad), n)];
  return padded;
}

/// Folds padded-signal cotangents back onto the n original samples.
inline std::vector<double> reflect_pad_adjoint(std::span<const double> padded_grad,
                                               std::size_t n, std::size_t pad) {
  std::vector<double> grad(n, 0.0);
  for (std::size_t i = 0; i < padded_grad.size(); ++i)
    grad[reflect_index(static_cast<long>(i) - static_cast<long>(pad), static_cast<long>(n))] +=
        padded_grad[i];
  return grad;
}

}  // namespace moddisc::detail
