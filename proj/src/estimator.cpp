#include "tde/estimator.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "tde/errors.hpp"

namespace tde {

GramMatrix make_gram(const Eigen::MatrixXd& psi) {
  if (psi.rows() != psi.cols() || psi.rows() < 1)
    throw ParameterError("Gram matrix must be square and non-empty");
  GramMatrix g;
  g.psi = 0.5 * (psi + psi.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g.psi, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw EvaluationError("Gram eigenvalue solver failed");
  g.min_eig = solver.eigenvalues().minCoeff();
  g.max_eig = solver.eigenvalues().maxCoeff();
  g.inv_op_norm = g.invertible() ? 1.0 / g.min_eig : std::numeric_limits<double>::infinity();
  return g;
}

GramMatrix gram_matrix(const PathEnsemble& ensemble, const EstimationWindow& window,
                       const BasisSpec& phi, int m1) {
  return make_gram(accumulate_moments(ensemble, window, phi, m1, phi, 0).gram);
}

Eigen::MatrixXd cross_matrix(const PathEnsemble& ensemble, const EstimationWindow& window,
                             const BasisSpec& phi, const BasisSpec& psi, int m1, int m2) {
  if (m2 < 1) throw ParameterError("model dimensions must be >= 1");
  return accumulate_moments(ensemble, window, phi, m1, psi, m2).cross;
}

bool stability_cutoff(const GramMatrix& gram, double phi_sup_norm, double n_paths,
                      double horizon, const CutoffConfig& config) {
  if (!config.enabled) return gram.invertible();
  if (!gram.invertible()) return false;
  const double inv = std::pow(gram.inv_op_norm, config.exponent);
  const double lhs = phi_sup_norm * std::max(inv, 1.0);
  const double nt = n_paths * horizon;
  const double log_nt = std::log(nt);
  const double rhs = log_nt > 0.0 ? config.c_cut * nt / log_nt
                                  : std::numeric_limits<double>::infinity();
  return lhs <= rhs;
}

TransitionFit fit_from_moments(const Moments& moments, int m1, int m2, const BasisSpec& phi,
                               const BasisSpec& psi, double lag, int n_paths, double horizon,
                               const CutoffConfig& cutoff) {
  if (m1 < 1 || m2 < 1) throw ParameterError("model dimensions must be >= 1");
  if (m1 > moments.gram.rows() || m2 > moments.cross.cols())
    throw ParameterError("requested model exceeds the accumulated moments");
  TransitionFit f;
  f.m1 = m1;
  f.m2 = m2;
  f.phi = phi;
  f.psi = psi;
  f.lag = lag;
  f.n_paths = n_paths;
  f.horizon = horizon;
  f.gram = make_gram(moments.gram.topLeftCorner(m1, m1));
  f.z = moments.cross.topLeftCorner(m1, m2);
  f.theta = Eigen::MatrixXd::Zero(m1, m2);
  const bool holds =
      stability_cutoff(f.gram, penalty_sup_norm(phi, m1), n_paths, horizon, cutoff);
  if (!holds) {
    f.truncated = true;
    return f;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(f.gram.psi);
  if (llt.info() != Eigen::Success) {
    f.truncated = true;
    return f;
  }
  f.theta = llt.solve(f.z);
  return f;
}

TransitionFit fit(const PathEnsemble& ensemble, const EstimationWindow& window,
                  const BasisSpec& phi, const BasisSpec& psi, int m1, int m2,
                  const CutoffConfig& cutoff) {
  const Moments moments = accumulate_moments(ensemble, window, phi, m1, psi, m2);
  return fit_from_moments(moments, m1, m2, phi, psi, window.lag(), ensemble.n_paths(),
                          window.horizon(), cutoff);
}

namespace {

BasisMatrix basis_or_zero(const BasisSpec& spec, int m, const Eigen::VectorXd& points) {
  if (spec.family == BasisFamily::kHermite)
    return eval_hermite(m, std::span<const double>(points.data(), points.size()));
  BasisMatrix out = BasisMatrix::Zero(points.size(), m);
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    if (points[i] < spec.lower || points[i] > spec.upper) continue;
    out.row(i) = eval_basis(spec, m, std::span<const double>(points.data() + i, 1));
  }
  return out;
}

}  // namespace

Eigen::MatrixXd evaluate(const TransitionFit& fit, const Eigen::VectorXd& xs,
                         const Eigen::VectorXd& ys) {
  const BasisMatrix bx = basis_or_zero(fit.phi, fit.m1, xs);
  const BasisMatrix by = basis_or_zero(fit.psi, fit.m2, ys);
  return bx * fit.theta * by.transpose();
}

double evaluate_at(const TransitionFit& fit, double x, double y) {
  return evaluate(fit, Eigen::VectorXd::Constant(1, x), Eigen::VectorXd::Constant(1, y))(0, 0);
}

double empirical_sq_norm(const TransitionFit& fit) {
  if (fit.truncated) return 0.0;
  return (fit.theta.transpose() * fit.gram.psi * fit.theta).trace();
}

}  // namespace tde
