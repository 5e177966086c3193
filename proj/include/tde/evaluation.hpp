#pragma once

// Error measurement against the closed-form densities, Monte-Carlo
// repetition harness, and plug-in functionals built on a fitted density.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tde/config.hpp"
#include "tde/estimator.hpp"

namespace tde {

/// Type-7 (linear interpolation) sample quantile, p in [0, 1].
double quantile_type7(std::vector<double> values, double p);

Eigen::VectorXd linspace(double lower, double upper, int n);

/// x range from the 2%/98% quantiles of X_t, y range from the 1%/99%
/// quantiles of X_{t+lag}, with equispaced grids of n_x and n_y points.
struct EvalWindow {
  double ax = 0.0, bx = 1.0;
  double ay = 0.0, by = 1.0;
  int n_x = 100;
  int n_y = 100;

  double area() const { return (bx - ax) * (by - ay); }
  Eigen::VectorXd xs() const { return linspace(ax, bx, n_x); }
  Eigen::VectorXd ys() const { return linspace(ay, by, n_y); }
};

inline constexpr int kMinPathsForWindow = 10;

EvalWindow eval_window(const PathEnsemble& ensemble, int t_index, int lag_index, int n_x = 100,
                       int n_y = 100);

struct MiseSample {
  Eigen::MatrixXd truth;
  Eigen::MatrixXd estimate;
  EvalWindow window;
};

/// area / (n_x n_y) * sum (truth - estimate)^2.
double squared_error(const MiseSample& sample);
/// area / (n_x n_y) * sum truth^2.
double squared_mass(const MiseSample& sample);

/// Mean squared error over the repetitions divided by the squared mass of
/// the final repetition's truth grid.
double mise(std::span<const MiseSample> reps);

struct RepRecord {
  int index = 0;
  std::uint64_t seed = 0;
  DimensionPair chosen;
  double error = 0.0;  // squared_error
  double mass = 0.0;   // squared_mass
  double mise100 = 0.0;
  EvalWindow window;
};

struct Aggregate {
  double mise = 0.0;
  double mean100 = 0.0;
  double sd100 = 0.0;
  double median100 = 0.0;
  double mean_m1 = 0.0;
  double mean_m2 = 0.0;
};

/// Fills each record's mise100 and returns the summary statistics.
Aggregate aggregate(std::vector<RepRecord>& reps, MiseNormalization norm);

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RepRecord> reps;
  Aggregate summary;
};

/// One repetition: simulate, select, evaluate on this repetition's window.
struct RepOutcome {
  RepRecord record;
  SelectionResult selection;
  MiseSample sample;
  PathEnsemble ensemble;
};
RepOutcome run_repetition(const ExperimentConfig& config, int index);

/// K repetitions in parallel. Any failing repetition aborts the run with
/// its index in the message.
ExperimentReport run_experiment(const ExperimentConfig& config);

using Payoff = std::function<double(double)>;
using ConditionalDensity = std::function<double(double, double)>;

/// Parses "one", "identity", "call:K", "put:K".
Payoff parse_payoff(const std::string& spec);

/// Trapezoid approximation of int v(y) p(x, y) dy over `ys`.
double feynman_kac(const ConditionalDensity& density, const Payoff& payoff, double x,
                   const Eigen::VectorXd& ys);
double feynman_kac(const TransitionFit& fit, const Payoff& payoff, double x,
                   const Eigen::VectorXd& ys);

/// e^{-rate * T} times the Feynman-Kac integral, T the fit's lag.
double option_price(const TransitionFit& fit, const Payoff& payoff, double x, double rate,
                    const Eigen::VectorXd& ys);
double option_price(const ConditionalDensity& density, double maturity, const Payoff& payoff,
                    double x, double rate, const Eigen::VectorXd& ys);

}  // namespace tde
