#pragma once

// Projection least-squares estimator of the transition density on
// S_phi,m1 (x) S_psi,m2: Theta = Psi^{-1} Z, with Psi the empirical Gram
// matrix of the x-basis along the paths and Z the lagged cross matrix.

#include <Eigen/Dense>

#include "tde/basis.hpp"
#include "tde/diffusion.hpp"
#include "tde/kernels.hpp"

namespace tde {

/// Relative eigenvalue floor below which a Gram matrix is treated as singular.
inline constexpr double kSingularGramRatio = 1e-12;

struct GramMatrix {
  Eigen::MatrixXd psi;
  double min_eig = 0.0;
  double max_eig = 0.0;
  /// 1 / min_eig, or +inf when the matrix is numerically singular.
  double inv_op_norm = 0.0;

  bool invertible() const { return min_eig > kSingularGramRatio * max_eig && max_eig > 0.0; }
};

/// Symmetrizes and computes the spectral diagnostics.
GramMatrix make_gram(const Eigen::MatrixXd& psi);

GramMatrix gram_matrix(const PathEnsemble& ensemble, const EstimationWindow& window,
                       const BasisSpec& phi, int m1);

Eigen::MatrixXd cross_matrix(const PathEnsemble& ensemble, const EstimationWindow& window,
                             const BasisSpec& phi, const BasisSpec& psi, int m1, int m2);

/// Cutoff rule for the stability event:
/// L_phi(m1) * max(||Psi^{-1}||_op^exponent, 1) <= c_cut * N T / log(N T).
struct CutoffConfig {
  double c_cut = 1e6;
  int exponent = 1;  // 1 or 2
  bool enabled = true;
};

bool stability_cutoff(const GramMatrix& gram, double phi_sup_norm, double n_paths,
                      double horizon, const CutoffConfig& config = {});

struct TransitionFit {
  int m1 = 1;
  int m2 = 1;
  Eigen::MatrixXd theta;  // m1 x m2, zero when truncated
  Eigen::MatrixXd z;      // m1 x m2
  GramMatrix gram;
  double lag = 1.0;
  BasisSpec phi;
  BasisSpec psi;
  int n_paths = 0;
  double horizon = 0.0;
  /// True when the stability event failed (or Psi was singular); the
  /// estimator is then the zero function.
  bool truncated = false;
};

/// Fit from precomputed moments. `gram` and `cross` may be larger than
/// (m1, m2); their leading blocks are used.
TransitionFit fit_from_moments(const Moments& moments, int m1, int m2, const BasisSpec& phi,
                               const BasisSpec& psi, double lag, int n_paths, double horizon,
                               const CutoffConfig& cutoff = {});

TransitionFit fit(const PathEnsemble& ensemble, const EstimationWindow& window,
                  const BasisSpec& phi, const BasisSpec& psi, int m1, int m2,
                  const CutoffConfig& cutoff = {});

/// p_hat(x_i, y_j) = sum_{a,b} Theta_ab phi_a(x_i) psi_b(y_j). Points
/// outside a compact basis support contribute zero.
Eigen::MatrixXd evaluate(const TransitionFit& fit, const Eigen::VectorXd& xs,
                         const Eigen::VectorXd& ys);
double evaluate_at(const TransitionFit& fit, double x, double y);

/// ||p_hat||_N^2 = tr(Theta^T Psi Theta); zero for truncated fits.
double empirical_sq_norm(const TransitionFit& fit);

}  // namespace tde
