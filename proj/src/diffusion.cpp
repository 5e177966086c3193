#include "tde/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "tde/errors.hpp"
#include "tde/rng.hpp"
#include "tde/special.hpp"

namespace tde {

std::string_view model_name(ModelTag tag) {
  switch (tag) {
    case ModelTag::kOu:
      return "ou";
    case ModelTag::kTanhOu:
      return "tanh_ou";
    case ModelTag::kCir:
      return "cir";
  }
  throw ParameterError("unknown model tag");
}

ModelTag parse_model(std::string_view name) {
  if (name == "ou" || name == "1") return ModelTag::kOu;
  if (name == "tanh_ou" || name == "2") return ModelTag::kTanhOu;
  if (name == "cir" || name == "3") return ModelTag::kCir;
  throw ParameterError("unknown model '" + std::string(name) + "' (expected ou, tanh_ou, cir)");
}

void OuParams::validate() const {
  if (!(r > 0.0) || !std::isfinite(r)) throw ParameterError("OU rate r must be > 0");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("OU scale gamma must be > 0");
  if (d < 1) throw ParameterError("OU dimension d must be >= 1");
}

OuParams default_params(ModelTag tag) {
  switch (tag) {
    case ModelTag::kOu:
      return {2.0, 2.0, 1};
    case ModelTag::kTanhOu:
      return {4.0, 1.0, 1};
    case ModelTag::kCir:
      return {1.0, 1.0, 6};
  }
  throw ParameterError("unknown model tag");
}

void SimGrid::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ParameterError("grid step delta must be > 0");
  if (n_steps < 1) throw ParameterError("grid needs n_steps >= 1");
}

void PathEnsemble::validate() const {
  grid.validate();
  if (values.rows() < 1) throw ParameterError("ensemble has no paths");
  if (values.cols() != grid.n_points())
    throw ParameterError("ensemble row length does not match grid");
  if (!values.allFinite()) throw ParameterError("ensemble contains non-finite states");
}

namespace {

struct StepCoefficients {
  double decay;
  double noise_sd;
  double stationary_sd;
};

StepCoefficients coefficients(const OuParams& p, double delta) {
  return {std::exp(-0.5 * p.r * delta),
          std::sqrt(p.gamma * p.gamma * -std::expm1(-p.r * delta) / (4.0 * p.r)),
          std::sqrt(p.stationary_variance())};
}

// Fills one row. When `start` is null the initial state is drawn from the
// stationary law using the same stream.
void simulate_path(const StepCoefficients& c, int d, int n_steps, std::uint64_t seed,
                   const double* start, double* row) {
  NormalStream normals(seed);
  for (int j = 0; j < d; ++j) row[j] = start ? start[j] : c.stationary_sd * normals.next();
  for (int k = 0; k < n_steps; ++k) {
    const double* prev = row + k * d;
    double* next = row + (k + 1) * d;
    for (int j = 0; j < d; ++j) next[j] = c.decay * prev[j] + c.noise_sd * normals.next();
  }
}

void check_counts(const SimGrid& grid, int n_paths) {
  grid.validate();
  if (n_paths < 1) throw ParameterError("n_paths must be >= 1");
}

}  // namespace

OuEnsemble simulate_ou_ensemble(const OuParams& params, const SimGrid& grid, int n_paths,
                                std::uint64_t seed) {
  params.validate();
  check_counts(grid, n_paths);
  OuEnsemble out{RowMatrix(n_paths, grid.n_points() * params.d), grid, params, seed};
  const StepCoefficients c = coefficients(params, grid.delta);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_paths; ++i)
    simulate_path(c, params.d, grid.n_steps, derive_seed(seed, i), nullptr,
                  out.values.row(i).data());
  return out;
}

OuEnsemble simulate_ou_ensemble_serial(const OuParams& params, const SimGrid& grid,
                                       int n_paths, std::uint64_t seed) {
  params.validate();
  check_counts(grid, n_paths);
  OuEnsemble out{RowMatrix(n_paths, grid.n_points() * params.d), grid, params, seed};
  const StepCoefficients c = coefficients(params, grid.delta);
  for (int i = 0; i < n_paths; ++i)
    simulate_path(c, params.d, grid.n_steps, derive_seed(seed, i), nullptr,
                  out.values.row(i).data());
  return out;
}

OuEnsemble simulate_ou_from(const OuParams& params, const SimGrid& grid,
                            const Eigen::MatrixXd& initial, std::uint64_t seed) {
  if (!(params.r > 0.0)) throw ParameterError("OU rate r must be > 0");
  if (!(params.gamma >= 0.0)) throw ParameterError("OU scale gamma must be >= 0");
  if (params.d < 1) throw ParameterError("OU dimension d must be >= 1");
  const int n_paths = static_cast<int>(initial.rows());
  check_counts(grid, n_paths);
  if (initial.cols() != params.d) throw ParameterError("initial states must have d columns");
  OuEnsemble out{RowMatrix(n_paths, grid.n_points() * params.d), grid, params, seed};
  const StepCoefficients c = coefficients(params, grid.delta);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_paths; ++i) {
    const Eigen::VectorXd start = initial.row(i).transpose();
    simulate_path(c, params.d, grid.n_steps, derive_seed(seed, i), start.data(),
                  out.values.row(i).data());
  }
  return out;
}

PathEnsemble apply_model_map(const OuEnsemble& raw, ModelTag model) {
  const int d = raw.params.d;
  if ((model == ModelTag::kOu || model == ModelTag::kTanhOu) && d != 1) {
    std::ostringstream msg;
    msg << "model " << model_name(model) << " requires d = 1 (got d = " << d << ")";
    throw ParameterError(msg.str());
  }
  const int n_paths = raw.n_paths();
  const int n_points = raw.grid.n_points();
  PathEnsemble out{RowMatrix(n_paths, n_points), raw.grid, model, raw.params, raw.seed};
  switch (model) {
    case ModelTag::kOu:
      out.values = raw.values;
      break;
    case ModelTag::kTanhOu:
      out.values = raw.values.array().tanh().matrix();
      break;
    case ModelTag::kCir:
      for (int i = 0; i < n_paths; ++i)
        for (int k = 0; k < n_points; ++k)
          out.values(i, k) = raw.values.row(i).segment(k * d, d).squaredNorm();
      break;
  }
  return out;
}

PathEnsemble simulate_model(ModelTag model, const OuParams& params, const SimGrid& grid,
                            int n_paths, std::uint64_t seed) {
  return apply_model_map(simulate_ou_ensemble(params, grid, n_paths, seed), model);
}

void TransitionDensityOracle::validate() const {
  params.validate();
  if (!(lag > 0.0)) throw ParameterError("transition lag must be > 0");
  if ((model == ModelTag::kOu || model == ModelTag::kTanhOu) && params.d != 1)
    throw ParameterError("ou and tanh_ou oracles require d = 1");
}

namespace {

double ou_density(const OuParams& p, double lag, double x, double y) {
  const double precision = 2.0 * p.r / (p.gamma * p.gamma * -std::expm1(-p.r * lag));
  const double diff = y - x * std::exp(-0.5 * p.r * lag);
  return std::sqrt(precision / std::numbers::pi) * std::exp(-precision * diff * diff);
}

// c e^{-c(u+y)} (y/u)^{q/2} I_q(2c sqrt(u y)) with u = x e^{-r t}, written as
// c (y/u)^{q/2} e^{-c (sqrt(u) - sqrt(y))^2} [e^{-z} I_q(z)].
double cir_density(const OuParams& p, double lag, double x, double y) {
  const double c = 2.0 * p.r / (p.gamma * p.gamma * -std::expm1(-p.r * lag));
  const double u = x * std::exp(-p.r * lag);
  const double order = 0.5 * p.d - 1.0;
  if (order < 0.0) throw ParameterError("cir oracle requires d >= 2");
  const double z = 2.0 * c * std::sqrt(u * y);
  const double gap = std::sqrt(u) - std::sqrt(y);
  const double value = c * std::pow(y / u, 0.5 * order) * std::exp(-c * gap * gap) *
                       bessel_i_scaled(order, z);
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "cir density not finite at (x, y) = (" << x << ", " << y << "), z = " << z;
    throw EvaluationError(msg.str());
  }
  return value;
}

}  // namespace

double true_transition_density(const TransitionDensityOracle& oracle, double x, double y) {
  oracle.validate();
  switch (oracle.model) {
    case ModelTag::kOu:
      if (!std::isfinite(x) || !std::isfinite(y)) throw DomainError("ou density needs finite (x, y)");
      return ou_density(oracle.params, oracle.lag, x, y);
    case ModelTag::kTanhOu: {
      if (!(std::abs(x) < 1.0) || !(std::abs(y) < 1.0))
        throw DomainError("tanh_ou density defined on (-1, 1)^2");
      if (std::abs(y) > kTanhClamp) return 0.0;
      const double xc = std::clamp(x, -kTanhClamp, kTanhClamp);
      return ou_density(oracle.params, oracle.lag, std::atanh(xc), std::atanh(y)) / (1.0 - y * y);
    }
    case ModelTag::kCir:
      if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
        throw DomainError("cir density defined on (0, inf)^2");
      return cir_density(oracle.params, oracle.lag, x, y);
  }
  throw ParameterError("unknown model tag");
}

Eigen::MatrixXd true_density_grid(const TransitionDensityOracle& oracle,
                                  const Eigen::VectorXd& xs, const Eigen::VectorXd& ys) {
  oracle.validate();
  Eigen::MatrixXd out(xs.size(), ys.size());
  for (Eigen::Index i = 0; i < xs.size(); ++i)
    for (Eigen::Index j = 0; j < ys.size(); ++j)
      out(i, j) = true_transition_density(oracle, xs[i], ys[j]);
  return out;
}

}  // namespace tde
