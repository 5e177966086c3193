#pragma once

// Orthonormal function families used on each axis of the tensor-product
// model spaces: Hermite functions on R and the trigonometric basis on a
// compact interval.

#include <span>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace tde {

enum class BasisFamily { kHermite, kTrigonometric };

std::string_view family_name(BasisFamily family);  // "hermite" | "trig"
BasisFamily parse_family(std::string_view name);

struct BasisSpec {
  BasisFamily family = BasisFamily::kHermite;
  // Support [lower, upper]; ignored for Hermite (support is R).
  double lower = 0.0;
  double upper = 1.0;
  int max_dim = 1000;

  static BasisSpec hermite(int max_dim = 1000);
  static BasisSpec trigonometric(double lower = 0.0, double upper = 1.0, int max_dim = 1000);

  void validate() const;
  /// Trigonometric dimensions must be odd (constant plus cos/sin pairs).
  bool admits_dimension(int m) const;
  /// Largest admissible dimension not above `m` (0 if none).
  int largest_admissible(int m) const;
};

/// Rows are points, column j is the (j+1)-th basis function.
using BasisMatrix = Eigen::MatrixXd;

/// h_0..h_{m-1}, via the normalized three-term recursion
/// h_{j+1} = x sqrt(2/(j+1)) h_j - sqrt(j/(j+1)) h_{j-1}.
BasisMatrix eval_hermite(int m, std::span<const double> points);

/// trig_1 = 1, trig_{2j} = sqrt(2) cos(2 pi j x), trig_{2j+1} = sqrt(2) sin(2 pi j x)
/// on [0, 1]. `m` must be odd. Throws DomainError for points outside [0, 1].
BasisMatrix eval_trigonometric(int m, std::span<const double> points);

/// Dispatch on the spec. Trigonometric bases on [a, b] are rescaled to stay
/// orthonormal: u_j(x) = trig_j((x - a)/(b - a)) / sqrt(b - a).
BasisMatrix eval_basis(const BasisSpec& spec, int m, std::span<const double> points);

/// sup_x sum_{j<=m} u_j(x)^2. Exact m/(b-a) for the trigonometric family;
/// for Hermite, the maximum over a 1e5-point grid on [-2 sqrt(m) - 5, 2 sqrt(m) + 5].
double sup_norm_constant(const BasisSpec& spec, int m);

/// Constant used in penalties and budgets: sqrt(m) for Hermite, m for
/// trigonometric.
double penalty_sup_norm(const BasisSpec& spec, int m);

}  // namespace tde
