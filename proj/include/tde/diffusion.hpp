#pragma once

// Exact simulation of independent Ornstein-Uhlenbeck copies and the three
// benchmark diffusions built from them, plus their closed-form transition
// densities.

#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace tde {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ModelTag : int {
  kOu = 1,      // X = U, d = 1
  kTanhOu = 2,  // X = tanh(U), d = 1
  kCir = 3,     // X = |U|^2, square-root process
};

std::string_view model_name(ModelTag tag);  // "ou" | "tanh_ou" | "cir"
ModelTag parse_model(std::string_view name);

/// dU = -(r/2) U dt + (gamma/2) dW in R^d.
struct OuParams {
  double r = 2.0;
  double gamma = 2.0;
  int d = 1;

  void validate() const;
  double stationary_variance() const { return gamma * gamma / (4.0 * r); }
};

/// Parameters of the benchmark examples: ou (2, 2, 1), tanh_ou (4, 1, 1),
/// cir (1, 1, 6).
OuParams default_params(ModelTag tag);

/// Uniform grid {k * delta : k = 0..n_steps}.
struct SimGrid {
  double delta = 0.01;
  int n_steps = 1;

  void validate() const;
  double horizon() const { return n_steps * delta; }
  int n_points() const { return n_steps + 1; }
};

/// Raw d-dimensional OU ensemble. Row i holds path i with layout
/// [U(0)_0..U(0)_{d-1}, U(delta)_0, ...].
struct OuEnsemble {
  RowMatrix values;
  SimGrid grid;
  OuParams params;
  std::uint64_t seed = 0;

  int n_paths() const { return static_cast<int>(values.rows()); }
  double state(int path, int step, int component) const {
    return values(path, step * params.d + component);
  }
};

/// Observed one-dimensional diffusion paths, N x (n_steps + 1).
struct PathEnsemble {
  RowMatrix values;
  SimGrid grid;
  ModelTag model = ModelTag::kOu;
  OuParams params;
  std::uint64_t seed = 0;

  int n_paths() const { return static_cast<int>(values.rows()); }
  /// Cross-section of all paths at grid index `step`.
  Eigen::VectorXd cross_section(int step) const { return values.col(step); }
  void validate() const;
};

/// Stationary start: U_i(0) ~ N(0, gamma^2/(4r) I_d). Path i draws from its
/// own stream derive_seed(seed, i), so the result does not depend on the
/// number of threads.
OuEnsemble simulate_ou_ensemble(const OuParams& params, const SimGrid& grid, int n_paths,
                                std::uint64_t seed);

/// Same recursion from given initial states (n_paths x d). gamma = 0 is
/// accepted here and gives pure exponential decay.
OuEnsemble simulate_ou_from(const OuParams& params, const SimGrid& grid,
                            const Eigen::MatrixXd& initial, std::uint64_t seed);

/// Serial reference for simulate_ou_ensemble. Produces identical output.
OuEnsemble simulate_ou_ensemble_serial(const OuParams& params, const SimGrid& grid,
                                       int n_paths, std::uint64_t seed);

/// ou: identity (d = 1), tanh_ou: tanh (d = 1), cir: squared norm.
PathEnsemble apply_model_map(const OuEnsemble& raw, ModelTag model);

PathEnsemble simulate_model(ModelTag model, const OuParams& params, const SimGrid& grid,
                            int n_paths, std::uint64_t seed);

/// Closed-form p_t(x, y) for one of the benchmark models.
struct TransitionDensityOracle {
  ModelTag model = ModelTag::kOu;
  OuParams params;
  double lag = 1.0;

  void validate() const;
};

/// tanh_ou values with |y| beyond this bound are reported as 0.
inline constexpr double kTanhClamp = 1.0 - 1e-6;

/// Throws DomainError outside the state space: ou R^2, tanh_ou (-1,1)^2,
/// cir (0,inf)^2.
double true_transition_density(const TransitionDensityOracle& oracle, double x, double y);

/// Matrix with entry (i, j) = p_t(xs[i], ys[j]).
Eigen::MatrixXd true_density_grid(const TransitionDensityOracle& oracle,
                                  const Eigen::VectorXd& xs, const Eigen::VectorXd& ys);

}  // namespace tde
