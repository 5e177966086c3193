#pragma once

// Path-sum kernels behind the Gram and cross matrices. The OpenMP version
// accumulates one partial per path and combines them with a fixed pairwise
// tree, so its output does not depend on the thread count. The serial
// version is a plain double loop kept as a reference for tests and the
// benchmark.

#include <Eigen/Dense>

#include "tde/basis.hpp"
#include "tde/diffusion.hpp"

namespace tde {

/// Riemann nodes s = k * delta for k in [first_index, end_index), paired with
/// s + t at k + lag_index. The integration horizon is (end - first) * delta.
struct EstimationWindow {
  int first_index = 0;
  int end_index = 1;
  int lag_index = 1;
  double delta = 0.01;

  int n_nodes() const { return end_index - first_index; }
  double horizon() const { return n_nodes() * delta; }
  double lag() const { return lag_index * delta; }

  /// Throws ParameterError if the window is empty or k + lag leaves the grid.
  void validate(const SimGrid& grid) const;
};

/// Window s in [0, horizon], lag t. Both must be integer multiples of delta.
EstimationWindow make_window(const SimGrid& grid, double horizon, double lag);

/// Window s in [0, grid horizon - t]: uses every available pair.
EstimationWindow make_full_window(const SimGrid& grid, double lag);

/// Steps needed so that s + t stays on the grid for s in [0, horizon].
int required_steps(double delta, double horizon, double lag);

/// Normalized path sums: gram = (1/(N T)) sum_i sum_k phi(X_k) phi(X_k)^T delta,
/// cross = (1/(N T)) sum_i sum_k phi(X_k) psi(X_{k+lag})^T delta.
/// m2 = 0 skips the cross matrix.
struct Moments {
  Eigen::MatrixXd gram;   // m1 x m1
  Eigen::MatrixXd cross;  // m1 x m2
};

Moments accumulate_moments(const PathEnsemble& ensemble, const EstimationWindow& window,
                           const BasisSpec& phi, int m1, const BasisSpec& psi, int m2);

Moments accumulate_moments_serial(const PathEnsemble& ensemble, const EstimationWindow& window,
                                  const BasisSpec& phi, int m1, const BasisSpec& psi, int m2);

}  // namespace tde
