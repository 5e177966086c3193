#include "tde/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>
#include <string>

#include "tde/errors.hpp"
#include "tde/rng.hpp"

namespace tde {

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw ParameterError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("quantile level outside [0, 1]");
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  std::nth_element(values.begin(), values.begin() + lo, values.end());
  const double below = values[lo];
  if (lo + 1 >= values.size()) return below;
  const double above = *std::min_element(values.begin() + lo + 1, values.end());
  return below + (h - lo) * (above - below);
}

Eigen::VectorXd linspace(double lower, double upper, int n) {
  if (n < 2) throw ParameterError("linspace needs at least 2 points");
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = lower + (upper - lower) * i / (n - 1);
  out[n - 1] = upper;
  return out;
}

EvalWindow eval_window(const PathEnsemble& ensemble, int t_index, int lag_index, int n_x,
                       int n_y) {
  if (ensemble.n_paths() < kMinPathsForWindow)
    throw ParameterError("evaluation window needs at least " +
                         std::to_string(kMinPathsForWindow) + " paths");
  if (t_index < 0 || lag_index < 0 || t_index + lag_index > ensemble.grid.n_steps)
    throw ParameterError("evaluation indices outside the grid");
  if (n_x < 2 || n_y < 2) throw ParameterError("evaluation grids need at least 2 points");
  const Eigen::VectorXd xs = ensemble.cross_section(t_index);
  const Eigen::VectorXd ys = ensemble.cross_section(t_index + lag_index);
  const std::vector<double> xv(xs.begin(), xs.end());
  const std::vector<double> yv(ys.begin(), ys.end());
  EvalWindow w{quantile_type7(xv, 0.02), quantile_type7(xv, 0.98), quantile_type7(yv, 0.01),
               quantile_type7(yv, 0.99), n_x, n_y};
  if (!(w.bx > w.ax) || !(w.by > w.ay))
    throw ParameterError("degenerate evaluation window (zero-width quantile range)");
  return w;
}

double squared_error(const MiseSample& s) {
  if (s.truth.rows() != s.window.n_x || s.truth.cols() != s.window.n_y ||
      s.estimate.rows() != s.window.n_x || s.estimate.cols() != s.window.n_y)
    throw ParameterError("MISE grids must be n_x x n_y");
  return s.window.area() / (s.window.n_x * s.window.n_y) * (s.truth - s.estimate).squaredNorm();
}

double squared_mass(const MiseSample& s) {
  if (s.truth.rows() != s.window.n_x || s.truth.cols() != s.window.n_y)
    throw ParameterError("MISE grids must be n_x x n_y");
  return s.window.area() / (s.window.n_x * s.window.n_y) * s.truth.squaredNorm();
}

double mise(std::span<const MiseSample> reps) {
  if (reps.empty()) throw ParameterError("MISE over zero repetitions");
  double total = 0.0;
  for (const MiseSample& s : reps) total += squared_error(s);
  const double denominator = squared_mass(reps.back());
  if (!(denominator > 0.0)) throw EvaluationError("MISE denominator is zero");
  return total / static_cast<double>(reps.size()) / denominator;
}

Aggregate aggregate(std::vector<RepRecord>& reps, MiseNormalization norm) {
  if (reps.empty()) throw ParameterError("aggregate over zero repetitions");
  const double last_mass = reps.back().mass;
  if (!(last_mass > 0.0)) throw EvaluationError("MISE denominator is zero");
  Aggregate a;
  std::vector<double> values;
  values.reserve(reps.size());
  double error_sum = 0.0;
  for (RepRecord& r : reps) {
    const double denom = norm == MiseNormalization::kLastRep ? last_mass : r.mass;
    if (!(denom > 0.0)) throw EvaluationError("MISE denominator is zero");
    r.mise100 = 100.0 * r.error / denom;
    values.push_back(r.mise100);
    error_sum += r.error;
    a.mean_m1 += r.chosen.m1;
    a.mean_m2 += r.chosen.m2;
  }
  const double k = static_cast<double>(reps.size());
  a.mean_m1 /= k;
  a.mean_m2 /= k;
  a.mise = norm == MiseNormalization::kLastRep ? error_sum / k / last_mass
                                               : std::accumulate(values.begin(), values.end(), 0.0) / k / 100.0;
  a.mean100 = std::accumulate(values.begin(), values.end(), 0.0) / k;
  double ss = 0.0;
  for (double v : values) ss += (v - a.mean100) * (v - a.mean100);
  a.sd100 = reps.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
  a.median100 = quantile_type7(values, 0.5);
  return a;
}

RepOutcome run_repetition(const ExperimentConfig& config, int index) {
  const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(index));
  const SimGrid grid = config.grid();
  const EstimationWindow window = config.window_spec();
  PathEnsemble ensemble = simulate_model(config.model, config.params(), grid, config.n_paths, seed);
  const BasisSpec phi = basis_for(config.basis_x, ensemble);
  const BasisSpec psi = basis_for(config.basis_y, ensemble);
  SelectionResult selection = select_model(ensemble, window, phi, psi, config.caps(),
                                           config.penalty_spec(), config.cutoff_config());
  const EvalWindow ew =
      eval_window(ensemble, window.lag_index, window.lag_index, config.grid_x, config.grid_y);
  const TransitionDensityOracle oracle{config.model, config.params(), window.lag()};
  MiseSample sample{true_density_grid(oracle, ew.xs(), ew.ys()),
                    evaluate(selection.fit, ew.xs(), ew.ys()), ew};
  RepRecord record;
  record.index = index;
  record.seed = seed;
  record.chosen = selection.chosen;
  record.error = squared_error(sample);
  record.mass = squared_mass(sample);
  record.window = ew;
  return {record, std::move(selection), std::move(sample), std::move(ensemble)};
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  if (config.reps < 1) throw ConfigError("reps", "must be >= 1");
  ExperimentReport report;
  report.config = config;
  report.reps.resize(config.reps);
  std::vector<std::exception_ptr> failures(config.reps);

#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < config.reps; ++k) {
    try {
      report.reps[k] = run_repetition(config, k).record;
    } catch (...) {
      failures[k] = std::current_exception();
    }
  }
  for (int k = 0; k < config.reps; ++k) {
    if (!failures[k]) continue;
    try {
      std::rethrow_exception(failures[k]);
    } catch (const std::exception& e) {
      throw EvaluationError("repetition " + std::to_string(k) + " failed: " + e.what());
    }
  }
  report.summary = aggregate(report.reps, config.mise_norm);
  return report;
}

Payoff parse_payoff(const std::string& spec) {
  if (spec == "one") return [](double) { return 1.0; };
  if (spec == "identity") return [](double y) { return y; };
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    const std::string kind = spec.substr(0, colon);
    double strike = 0.0;
    try {
      std::size_t used = 0;
      strike = std::stod(spec.substr(colon + 1), &used);
      if (used != spec.size() - colon - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ConfigError("payoff", "bad strike in '" + spec + "'");
    }
    if (kind == "call") return [strike](double y) { return std::max(y - strike, 0.0); };
    if (kind == "put") return [strike](double y) { return std::max(strike - y, 0.0); };
  }
  throw ConfigError("payoff", "expected one, identity, call:K or put:K (got '" + spec + "')");
}

namespace {

double trapezoid(const Eigen::VectorXd& ys, const Eigen::VectorXd& integrand) {
  if (ys.size() < 2) throw ParameterError("quadrature grid needs at least 2 points");
  double sum = 0.0;
  for (Eigen::Index j = 1; j < ys.size(); ++j)
    sum += 0.5 * (ys[j] - ys[j - 1]) * (integrand[j - 1] + integrand[j]);
  return sum;
}

}  // namespace

double feynman_kac(const ConditionalDensity& density, const Payoff& payoff, double x,
                   const Eigen::VectorXd& ys) {
  Eigen::VectorXd integrand(ys.size());
  for (Eigen::Index j = 0; j < ys.size(); ++j) integrand[j] = payoff(ys[j]) * density(x, ys[j]);
  return trapezoid(ys, integrand);
}

double feynman_kac(const TransitionFit& fit, const Payoff& payoff, double x,
                   const Eigen::VectorXd& ys) {
  const Eigen::VectorXd values = evaluate(fit, Eigen::VectorXd::Constant(1, x), ys).row(0);
  Eigen::VectorXd integrand(ys.size());
  for (Eigen::Index j = 0; j < ys.size(); ++j) integrand[j] = payoff(ys[j]) * values[j];
  return trapezoid(ys, integrand);
}

double option_price(const TransitionFit& fit, const Payoff& payoff, double x, double rate,
                    const Eigen::VectorXd& ys) {
  return std::exp(-rate * fit.lag) * feynman_kac(fit, payoff, x, ys);
}

double option_price(const ConditionalDensity& density, double maturity, const Payoff& payoff,
                    double x, double rate, const Eigen::VectorXd& ys) {
  return std::exp(-rate * maturity) * feynman_kac(density, payoff, x, ys);
}

}  // namespace tde
