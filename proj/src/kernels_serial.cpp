#include <cmath>
#include <sstream>

#include "tde/errors.hpp"
#include "tde/kernels.hpp"

namespace tde {

void EstimationWindow::validate(const SimGrid& grid) const {
  if (!(delta > 0.0)) throw ParameterError("window step must be > 0");
  if (std::abs(delta - grid.delta) > 1e-12 * grid.delta)
    throw ParameterError("window step does not match the ensemble grid");
  if (first_index < 0) throw ParameterError("window starts before the grid");
  if (n_nodes() < 1) throw ParameterError("estimation window is empty");
  if (lag_index < 0) throw ParameterError("lag must be >= 0");
  if (end_index - 1 + lag_index > grid.n_steps) {
    std::ostringstream msg;
    msg << "lag exceeds grid: last node " << end_index - 1 << " + lag " << lag_index
        << " > n_steps " << grid.n_steps;
    throw ParameterError(msg.str());
  }
}

namespace {

int steps_of(double value, double delta, const char* what) {
  const double ratio = value / delta;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, rounded)) {
    std::ostringstream msg;
    msg << what << " = " << value << " is not an integer multiple of delta = " << delta;
    throw ParameterError(msg.str());
  }
  return static_cast<int>(rounded);
}

}  // namespace

int required_steps(double delta, double horizon, double lag) {
  if (!(delta > 0.0)) throw ParameterError("delta must be > 0");
  return steps_of(horizon, delta, "horizon") + steps_of(lag, delta, "lag");
}

EstimationWindow make_window(const SimGrid& grid, double horizon, double lag) {
  grid.validate();
  if (!(lag > 0.0)) throw ParameterError("lag t must be > 0");
  if (!(horizon > 0.0)) throw ParameterError("horizon T must be > 0");
  EstimationWindow w{0, steps_of(horizon, grid.delta, "horizon"), steps_of(lag, grid.delta, "lag"),
                     grid.delta};
  w.validate(grid);
  return w;
}

EstimationWindow make_full_window(const SimGrid& grid, double lag) {
  grid.validate();
  if (!(lag > 0.0)) throw ParameterError("lag t must be > 0");
  const int lag_index = steps_of(lag, grid.delta, "lag");
  EstimationWindow w{0, grid.n_steps - lag_index + 1, lag_index, grid.delta};
  w.validate(grid);
  return w;
}

Moments accumulate_moments_serial(const PathEnsemble& ensemble, const EstimationWindow& window,
                                  const BasisSpec& phi, int m1, const BasisSpec& psi, int m2) {
  window.validate(ensemble.grid);
  if (m1 < 1 || m2 < 0) throw ParameterError("model dimensions must be >= 1");
  Moments out{Eigen::MatrixXd::Zero(m1, m1), Eigen::MatrixXd::Zero(m1, m2)};
  for (int i = 0; i < ensemble.n_paths(); ++i) {
    for (int k = window.first_index; k < window.end_index; ++k) {
      const double x = ensemble.values(i, k);
      const double y = ensemble.values(i, k + window.lag_index);
      const BasisMatrix bx = eval_basis(phi, m1, std::span<const double>(&x, 1));
      const BasisMatrix by =
          m2 > 0 ? eval_basis(psi, m2, std::span<const double>(&y, 1)) : BasisMatrix(1, 0);
      for (int a = 0; a < m1; ++a) {
        for (int b = 0; b < m1; ++b) out.gram(a, b) += bx(0, a) * bx(0, b);
        for (int b = 0; b < m2; ++b) out.cross(a, b) += bx(0, a) * by(0, b);
      }
    }
  }
  const double scale = window.delta / (ensemble.n_paths() * window.horizon());
  out.gram *= scale;
  out.cross *= scale;
  return out;
}

}  // namespace tde
