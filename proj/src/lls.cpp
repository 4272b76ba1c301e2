#include "moddisc/lls.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "moddisc/error.hpp"

namespace moddisc {

LlsFit lls_align(std::span<const std::span<const double>> sources, std::span<const double> reference) {
  if (sources.empty()) detail::throw_shape("lls_align: need at least one source");
  const std::size_t n = reference.size();
  if (n == 0) detail::throw_shape("lls_align: empty reference");
  for (const auto& s : sources)
    if (s.size() != n) detail::throw_shape("lls_align: source and reference lengths differ");

  const Eigen::Index k = static_cast<Eigen::Index>(sources.size());
  const Eigen::Index dim = k + 1;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), dim);
  for (Eigen::Index c = 0; c < k; ++c)
    for (std::size_t i = 0; i < n; ++i) a(static_cast<Eigen::Index>(i), c) = sources[static_cast<std::size_t>(c)][i];
  a.col(k).setOnes();
  const Eigen::Map<const Eigen::VectorXd> y(reference.data(), static_cast<Eigen::Index>(n));

  const Eigen::MatrixXd gram = a.transpose() * a;
  const Eigen::VectorXd rhs = a.transpose() * y;
  const double ridge = 1e-9 * gram.trace() / static_cast<double>(dim);
  Eigen::MatrixXd reg = gram;
  reg.diagonal().array() += ridge > 0.0 ? ridge : 1e-300;
  const Eigen::LDLT<Eigen::MatrixXd> solver(reg);

  Eigen::VectorXd w = solver.solve(rhs);
  for (int it = 0; it < 8; ++it) {
    const Eigen::VectorXd step = solver.solve(rhs - gram * w);
    w += step;
    if (step.norm() <= 1e-15 * (1.0 + w.norm())) break;
  }

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const double top = eig.eigenvalues().maxCoeff();

  LlsFit fit;
  fit.rank_deficient = !(eig.eigenvalues().minCoeff() > 1e-12 * top);
  if (fit.rank_deficient) {
    // The ridge amplifies rounding noise along the null space by 1 / ridge;
    // dropping that component leaves the minimum-norm solution.
    for (Eigen::Index c = 0; c < dim; ++c)
      if (!(eig.eigenvalues()(c) > 1e-12 * top)) {
        const Eigen::VectorXd v = eig.eigenvectors().col(c);
        w -= v * v.dot(w);
      }
  }
  fit.weights.assign(w.data(), w.data() + k);
  fit.bias = w(k);
  const Eigen::VectorXd aligned = a * w;
  fit.aligned.assign(aligned.data(), aligned.data() + aligned.size());
  fit.residual_rms = std::sqrt((aligned - y).squaredNorm() / static_cast<double>(n));
  if (!std::isfinite(fit.residual_rms)) throw NumericalError("lls_align: non-finite solution");
  return fit;
}

}  // namespace moddisc
