#pragma once

// Independent reference implementations used as test oracles. They favour
// the most direct formulation over speed and share no code with the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace oracle {

inline double de_casteljau(std::vector<double> c, double u) {
  for (std::size_t r = c.size() - 1; r > 0; --r)
    for (std::size_t i = 0; i < r; ++i) c[i] = (1.0 - u) * c[i] + u * c[i + 1];
  return c[0];
}

inline double central_diff(const std::function<double(double)>& f, double x, double eps) {
  return (f(x + eps) - f(x - eps)) / (2.0 * eps);
}

/// Central-difference step ladder. Each step h contributes the estimates at
/// h and h / 2 and their Richardson extrapolation. A gradient check passes a
/// coordinate (or probe direction) if any estimate agrees: large steps suffer
/// truncation on stiff functions (log magnitudes near the floor), small
/// ones suffer rounding, and piecewise-linear kernels can put a kink inside
/// a particular step.
inline const std::vector<double> kDefaultSteps = {1e-3, 1e-4, 1e-5, 1e-6, 1e-7};

/// Max over coordinates of the relative error between an analytic gradient
/// and central differences of f at p, with a floor on the denominator.
inline double fd_rel_error(const std::function<double(const std::vector<double>&)>& f,
                           std::vector<double> p, std::span<const double> grad,
                           const std::vector<double>& steps, double floor = 1e-8) {
  double worst = 0.0;
  double gmax = 0.0;
  for (double g : grad) gmax = std::max(gmax, std::abs(g));
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    double best = std::numeric_limits<double>::infinity();
    for (double eps : steps) {
      auto central = [&](double h) {
        p[i] = keep + h;
        const double fp = f(p);
        p[i] = keep - h;
        const double fm = f(p);
        p[i] = keep;
        return (fp - fm) / (2.0 * h);
      };
      const double d1 = central(eps), d2 = central(0.5 * eps);
      for (double num : {d1, d2, (4.0 * d2 - d1) / 3.0}) {
        const double denom = std::max({std::abs(num), std::abs(grad[i]), floor * std::max(1.0, gmax)});
        best = std::min(best, std::abs(num - grad[i]) / denom);
      }
    }
    worst = std::max(worst, best);
  }
  return worst;
}

inline double fd_rel_error(const std::function<double(const std::vector<double>&)>& f,
                           std::vector<double> p, std::span<const double> grad, double eps,
                           double floor = 1e-8) {
  return fd_rel_error(f, std::move(p), grad, std::vector<double>{eps}, floor);
}

/// Directional central differences along `probes` random unit vectors.
inline double fd_probe_error(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& p, std::span<const double> grad,
                             const std::vector<double>& steps, int probes, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  double worst = 0.0;
  for (int k = 0; k < probes; ++k) {
    std::vector<double> d(p.size());
    double norm = 0.0;
    for (double& v : d) {
      v = n(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    double analytic = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      d[i] /= norm;
      analytic += d[i] * grad[i];
    }
    double best = std::numeric_limits<double>::infinity();
    auto central = [&](double h) {
      std::vector<double> a = p, b = p;
      for (std::size_t i = 0; i < p.size(); ++i) {
        a[i] += h * d[i];
        b[i] -= h * d[i];
      }
      return (f(a) - f(b)) / (2.0 * h);
    };
    for (double eps : steps) {
      const double d1 = central(eps), d2 = central(0.5 * eps);
      for (double num : {d1, d2, (4.0 * d2 - d1) / 3.0})
        best = std::min(best, std::abs(num - analytic) / std::max({std::abs(num), std::abs(analytic), 1e-12}));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

inline double fd_probe_error(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& p, std::span<const double> grad, double eps,
                             int probes, unsigned seed) {
  return fd_probe_error(f, p, grad, std::vector<double>{eps}, probes, seed);
}

/// Textbook direct-form biquad with fixed coefficients and zero state.
inline std::vector<double> direct_form(std::span<const double> x, double b0, double b1, double b2,
                                       double a1, double a2) {
  std::vector<double> y(x.size());
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    y[n] = b0 * x[n] + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x[n];
    y2 = y1;
    y1 = y[n];
  }
  return y;
}

/// O(N^2) DFT of a real sequence, bins 0..N/2.
inline std::vector<std::complex<double>> naive_rdft(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0;
    for (std::size_t t = 0; t < n; ++t)
      acc += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n));
    out[k] = acc;
  }
  return out;
}

/// |H(e^{iw})| of a biquad evaluated from the transfer function.
inline double biquad_mag(double b0, double b1, double b2, double a1, double a2, double w) {
  const std::complex<double> z1 = std::polar(1.0, -w), z2 = std::polar(1.0, -2.0 * w);
  return std::abs((b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2));
}

/// Discrete Frechet distance by exhaustive enumeration of monotone couplings.
inline double frechet_exhaustive(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size(), m = b.size();
  auto pt = [](std::span<const double> s, std::size_t i) {
    const double t = s.size() > 1 ? static_cast<double>(i) / static_cast<double>(s.size() - 1) : 0.0;
    return std::pair<double, double>{t, s[i]};
  };
  auto d = [&](std::size_t i, std::size_t j) {
    const auto [x1, y1] = pt(a, i);
    const auto [x2, y2] = pt(b, j);
    return std::sqrt((x1 - x2) * (x1 - x2) + (y1 - y2) * (y1 - y2));
  };
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double cur) {
    cur = std::max(cur, d(i, j));
    if (cur >= best) return;
    if (i == n - 1 && j == m - 1) {
      best = cur;
      return;
    }
    if (i + 1 < n) walk(i + 1, j, cur);
    if (j + 1 < m) walk(i, j + 1, cur);
    if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, cur);
  };
  walk(0, 0, 0.0);
  return best;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
  }
  const double ma = sa / n, mb = sb / n;
  for (std::size_t i = 0; i < a.size(); ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline std::vector<double> sine(std::size_t n, double freq, double rate, double amp = 1.0, double offset = 0.0,
                                double phase = 0.0) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i)
    s[i] = offset + amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate + phase);
  return s;
}

}  // namespace oracle
