#include "tde/basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "tde/errors.hpp"

namespace tde {

std::string_view family_name(BasisFamily family) {
  return family == BasisFamily::kHermite ? "hermite" : "trig";
}

BasisFamily parse_family(std::string_view name) {
  if (name == "hermite") return BasisFamily::kHermite;
  if (name == "trig") return BasisFamily::kTrigonometric;
  throw ParameterError("unknown basis '" + std::string(name) + "' (expected hermite, trig)");
}

BasisSpec BasisSpec::hermite(int max_dim) {
  return {BasisFamily::kHermite, -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), max_dim};
}

BasisSpec BasisSpec::trigonometric(double lower, double upper, int max_dim) {
  return {BasisFamily::kTrigonometric, lower, upper, max_dim};
}

void BasisSpec::validate() const {
  if (max_dim < 1) throw ParameterError("basis max_dim must be >= 1");
  if (family == BasisFamily::kTrigonometric &&
      !(lower < upper && std::isfinite(lower) && std::isfinite(upper)))
    throw ParameterError("trigonometric support needs finite lower < upper");
}

bool BasisSpec::admits_dimension(int m) const {
  if (m < 1 || m > max_dim) return false;
  return family == BasisFamily::kHermite || m % 2 == 1;
}

int BasisSpec::largest_admissible(int m) const {
  m = std::min(m, max_dim);
  while (m >= 1 && !admits_dimension(m)) --m;
  return std::max(m, 0);
}

BasisMatrix eval_hermite(int m, std::span<const double> points) {
  if (m < 1) throw ParameterError("basis dimension must be >= 1");
  const auto n = static_cast<Eigen::Index>(points.size());
  BasisMatrix out(n, m);
  const double h0_scale = std::pow(std::numbers::pi, -0.25);
  std::vector<double> up(m), down(m);
  for (int j = 1; j < m; ++j) {
    up[j] = std::sqrt(2.0 / (j + 1));
    down[j] = std::sqrt(static_cast<double>(j) / (j + 1));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = points[i];
    double prev = h0_scale * std::exp(-0.5 * x * x);
    out(i, 0) = prev;
    if (m == 1) continue;
    double cur = std::numbers::sqrt2 * x * prev;
    out(i, 1) = cur;
    for (int j = 1; j + 1 < m; ++j) {
      const double next = x * up[j] * cur - down[j] * prev;
      prev = cur;
      cur = next;
      out(i, j + 1) = cur;
    }
  }
  return out;
}

namespace {

void fill_trig_row(BasisMatrix& out, Eigen::Index row, int m, double u, double scale) {
  out(row, 0) = scale;
  const double amp = std::numbers::sqrt2 * scale;
  for (int j = 1; 2 * j - 1 < m; ++j) {
    const double angle = 2.0 * std::numbers::pi * j * u;
    out(row, 2 * j - 1) = amp * std::cos(angle);
    if (2 * j < m) out(row, 2 * j) = amp * std::sin(angle);
  }
}

void require_odd(int m) {
  if (m < 1 || m % 2 == 0)
    throw ParameterError("trigonometric dimension must be odd and >= 1 (got " +
                         std::to_string(m) + ")");
}

}  // namespace

BasisMatrix eval_trigonometric(int m, std::span<const double> points) {
  require_odd(m);
  const auto n = static_cast<Eigen::Index>(points.size());
  BasisMatrix out(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = points[i];
    if (!(x >= 0.0 && x <= 1.0))
      throw DomainError("trigonometric basis point " + std::to_string(x) + " outside [0, 1]");
    fill_trig_row(out, i, m, x, 1.0);
  }
  return out;
}

BasisMatrix eval_basis(const BasisSpec& spec, int m, std::span<const double> points) {
  spec.validate();
  if (m > spec.max_dim)
    throw ParameterError("dimension " + std::to_string(m) + " exceeds basis max_dim");
  if (spec.family == BasisFamily::kHermite) return eval_hermite(m, points);
  require_odd(m);
  const double width = spec.upper - spec.lower;
  const double scale = 1.0 / std::sqrt(width);
  const auto n = static_cast<Eigen::Index>(points.size());
  BasisMatrix out(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = points[i];
    if (!(x >= spec.lower && x <= spec.upper))
      throw DomainError("trigonometric basis point " + std::to_string(x) + " outside [" +
                        std::to_string(spec.lower) + ", " + std::to_string(spec.upper) + "]");
    fill_trig_row(out, i, m, (x - spec.lower) / width, scale);
  }
  return out;
}

double sup_norm_constant(const BasisSpec& spec, int m) {
  spec.validate();
  if (m < 1 || m > spec.max_dim) throw ParameterError("dimension outside [1, max_dim]");
  if (spec.family == BasisFamily::kTrigonometric) {
    require_odd(m);
    return m / (spec.upper - spec.lower);
  }
  constexpr int kGridPoints = 100000;
  const double half_width = 2.0 * std::sqrt(static_cast<double>(m)) + 5.0;
  std::vector<double> grid(kGridPoints);
  for (int i = 0; i < kGridPoints; ++i)
    grid[i] = -half_width + 2.0 * half_width * i / (kGridPoints - 1);
  double best = 0.0;
  // Chunked to keep the temporary basis matrix small.
  constexpr int kChunk = 4096;
  for (int start = 0; start < kGridPoints; start += kChunk) {
    const int len = std::min(kChunk, kGridPoints - start);
    const BasisMatrix values = eval_hermite(m, std::span<const double>(grid).subspan(start, len));
    best = std::max(best, values.rowwise().squaredNorm().maxCoeff());
  }
  return best;
}

double penalty_sup_norm(const BasisSpec& spec, int m) {
  if (spec.family == BasisFamily::kHermite) return std::sqrt(static_cast<double>(m));
  return static_cast<double>(m);
}

}  // namespace tde
