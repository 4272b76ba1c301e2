#include "moddisc/spline_fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "moddisc/error.hpp"
#include "moddisc/modsig.hpp"

namespace moddisc {
namespace {

struct Layout {
  int segments;
  int degree;
  std::size_t free_per_segment() const { return static_cast<std::size_t>(degree) - 1; }
};

// Interior x of segment k from logits: gaps = width * softmax(theta_k, 0).
std::vector<Point2> layout_points(const Layout& l, std::span<const double> theta) {
  const std::size_t n = static_cast<std::size_t>(l.degree);
  std::vector<Point2> pts(static_cast<std::size_t>(l.segments) * n + 1);
  std::vector<double> e(n);
  for (int k = 0; k < l.segments; ++k) {
    const double a = static_cast<double>(k) / l.segments;
    const double b = static_cast<double>(k + 1) / l.segments;
    double top = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) top = std::max(top, theta[k * (n - 1) + i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double logit = i + 1 < n ? theta[k * (n - 1) + i] : 0.0;
      e[i] = std::exp(logit - top);
      sum += e[i];
    }
    double x = a;
    const std::size_t base = static_cast<std::size_t>(k) * n;
    pts[base].x = a;
    for (std::size_t i = 1; i < n; ++i) {
      x += (b - a) * e[i - 1] / sum;
      pts[base + i].x = x;
    }
  }
  pts.back().x = 1.0;
  return pts;
}

struct Solve {
  std::vector<double> y;
  std::vector<double> residual;
  double cost = 0.0;
};

Solve solve_y(const PiecewiseBezier& layout, std::span<const double> signal, int oversample) {
  const SplineRenderMap map = SplineRenderMap::build(layout, signal.size(), oversample);
  const std::size_t c = map.controls();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c));
  const auto off = map.row_offsets();
  const auto idx = map.indices();
  const auto w = map.weights();
  for (std::size_t j = 0; j < map.frames(); ++j) {
    for (std::size_t a = off[j]; a < off[j + 1]; ++a) {
      rhs(static_cast<Eigen::Index>(idx[a])) += w[a] * signal[j];
      for (std::size_t b = off[j]; b < off[j + 1]; ++b)
        gram(static_cast<Eigen::Index>(idx[a]), static_cast<Eigen::Index>(idx[b])) += w[a] * w[b];
    }
  }
  const double ridge = 1e-12 * gram.trace() / static_cast<double>(c);
  gram.diagonal().array() += ridge;
  const Eigen::VectorXd sol = gram.ldlt().solve(rhs);
  Solve out;
  out.y.assign(sol.data(), sol.data() + sol.size());
  out.residual.resize(signal.size());
  map.apply(out.y, out.residual);
  for (std::size_t j = 0; j < signal.size(); ++j) {
    out.residual[j] -= signal[j];
    out.cost += out.residual[j] * out.residual[j];
  }
  return out;
}

PiecewiseBezier assemble(const Layout& l, std::span<const double> theta, std::span<const double> y) {
  std::vector<Point2> pts = layout_points(l, theta);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i].y = y[i];
  return PiecewiseBezier(l.degree, std::move(pts));
}

}  // namespace

SplineFitResult fit_spline_lsq(std::span<const double> signal, const SplineFitOptions& options) {
  if (options.segments < 1 || options.degree < 1) throw ConfigError("spline fit needs K >= 1, n >= 1");
  if (signal.size() < 2) detail::throw_shape("spline fit needs at least 2 samples");
  const Layout layout{options.segments, options.degree};
  const std::size_t n_theta = options.optimize_x
                                  ? static_cast<std::size_t>(options.segments) * layout.free_per_segment()
                                  : 0;
  std::vector<double> theta(static_cast<std::size_t>(options.segments) * layout.free_per_segment(), 0.0);

  auto evaluate = [&](std::span<const double> th) {
    const std::vector<double> zeros(layout_points(layout, th).size(), 0.0);
    return solve_y(assemble(layout, th, zeros), signal, options.oversample);
  };

  Solve current = evaluate(theta);
  int iterations = 0;
  if (n_theta > 0) {
    double mu = 1e-3;
    const double h = 1e-6;
    const auto m = static_cast<Eigen::Index>(signal.size());
    const auto p = static_cast<Eigen::Index>(n_theta);
    for (; iterations < options.max_iterations; ++iterations) {
      Eigen::MatrixXd jac(m, p);
      for (Eigen::Index q = 0; q < p; ++q) {
        std::vector<double> plus = theta;
        std::vector<double> minus = theta;
        plus[static_cast<std::size_t>(q)] += h;
        minus[static_cast<std::size_t>(q)] -= h;
        const Solve sp = evaluate(plus);
        const Solve sm = evaluate(minus);
        for (Eigen::Index r = 0; r < m; ++r)
          jac(r, q) = (sp.residual[static_cast<std::size_t>(r)] - sm.residual[static_cast<std::size_t>(r)]) / (2 * h);
      }
      const Eigen::Map<const Eigen::VectorXd> res(current.residual.data(), m);
      const Eigen::MatrixXd jtj = jac.transpose() * jac;
      const Eigen::VectorXd jtr = jac.transpose() * res;
      bool improved = false;
      for (int attempt = 0; attempt < 12; ++attempt) {
        Eigen::MatrixXd lhs = jtj;
        lhs.diagonal() += mu * (jtj.diagonal().array() + 1e-12).matrix();
        const Eigen::VectorXd step = lhs.ldlt().solve(-jtr);
        std::vector<double> trial = theta;
        for (Eigen::Index q = 0; q < p; ++q) trial[static_cast<std::size_t>(q)] += step(q);
        Solve s = evaluate(trial);
        if (s.cost < current.cost) {
          const double gain = (current.cost - s.cost) / std::max(current.cost, 1e-300);
          theta = std::move(trial);
          current = std::move(s);
          mu = std::max(mu / 3.0, 1e-9);
          improved = true;
          if (gain < 1e-10) iterations = options.max_iterations;
          break;
        }
        mu *= 4.0;
      }
      if (!improved) break;
    }
  }

  SplineFitResult out{assemble(layout, theta, current.y), 0.0, 0.0, iterations};
  const ModSignal rendered = render_spline(out.curve, signal.size(), 1.0);
  double sq = 0.0;
  for (std::size_t j = 0; j < signal.size(); ++j) {
    const double e = std::abs(rendered.values[j] - signal[j]);
    out.max_abs_error = std::max(out.max_abs_error, e);
    sq += e * e;
  }
  out.rms_error = std::sqrt(sq / static_cast<double>(signal.size()));
  return out;
}

}  // namespace moddisc
