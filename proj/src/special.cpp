#include "tde/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "tde/errors.hpp"

namespace tde {
namespace {

void check_args(double order, double x) {
  if (!(order >= 0.0) || !(x >= 0.0) || !std::isfinite(order) || !std::isfinite(x))
    throw ParameterError("bessel_i: order and argument must be finite and >= 0 (order=" +
                         std::to_string(order) + ", x=" + std::to_string(x) + ")");
}

bool use_asymptotic(double order, double x) {
  return x > kBesselAsymptoticSwitch && x > order * order;
}

// Sum_k (x/2)^{2k+order} / (k! Gamma(k+order+1)) * e^{-shift}. The shift is
// folded into the leading term so large arguments stay representable.
double power_series(double order, double x, double shift) {
  if (x == 0.0) return order == 0.0 ? std::exp(-shift) : 0.0;
  const double half = 0.5 * x;
  double term = std::exp(order * std::log(half) - std::lgamma(order + 1.0) - shift);
  double sum = term;
  const double q = half * half;
  for (int k = 1; k < 5000; ++k) {
    term *= q / (k * (k + order));
    sum += term;
    if (term <= std::numeric_limits<double>::epsilon() * 0.25 * sum) return sum;
  }
  throw EvaluationError("bessel_i: power series did not converge (order=" +
                        std::to_string(order) + ", x=" + std::to_string(x) + ")");
}

// e^{-x} I_order(x) ~ (2 pi x)^{-1/2} Sum_k (-1)^k a_k(order) / x^k, summed
// until the terms stop shrinking.
double asymptotic_scaled(double order, double x) {
  const double mu = 4.0 * order * order;
  double term = 1.0;
  double sum = 1.0;
  double prev_abs = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (8.0 * k * x);
    const double next_abs = std::abs(next);
    if (next_abs >= prev_abs) break;
    term = next;
    sum += term;
    prev_abs = next_abs;
    if (next_abs <= std::numeric_limits<double>::epsilon() * 0.25 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

}  // namespace

double bessel_i_scaled(double order, double x) {
  check_args(order, x);
  if (use_asymptotic(order, x)) return asymptotic_scaled(order, x);
  return power_series(order, x, x);
}

double bessel_i(double order, double x) {
  check_args(order, x);
  if (!use_asymptotic(order, x)) {
    const double value = power_series(order, x, 0.0);
    if (!std::isfinite(value))
      throw EvaluationError("bessel_i: overflow (order=" + std::to_string(order) +
                            ", x=" + std::to_string(x) + ")");
    return value;
  }
  const double log_value = std::log(asymptotic_scaled(order, x)) + x;
  if (log_value >= std::log(std::numeric_limits<double>::max()))
    throw EvaluationError("bessel_i: overflow (order=" + std::to_string(order) +
                          ", x=" + std::to_string(x) + "); use bessel_i_scaled");
  return std::exp(log_value);
}

}  // namespace tde
