#pragma once

namespace tde {

/// Modified Bessel function of the first kind, I_order(x), for order >= 0
/// and x >= 0. Power series below the switch point, large-argument
/// asymptotic expansion above it. Throws EvaluationError on overflow.
double bessel_i(double order, double x);

/// Exponentially scaled variant e^{-x} I_order(x). Never overflows for
/// finite arguments; the transition density of the square-root model is
/// evaluated through this form.
double bessel_i_scaled(double order, double x);

/// Argument above which the asymptotic expansion is used (for orders with
/// order^2 below the argument).
inline constexpr double kBesselAsymptoticSwitch = 15.0;

}  // namespace tde
