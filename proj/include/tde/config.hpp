#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "tde/basis.hpp"
#include "tde/diffusion.hpp"
#include "tde/estimator.hpp"
#include "tde/selection.hpp"

namespace tde {

/// Which s-range enters the empirical integrals.
enum class WindowMode {
  kFixed,  // s in [0, T], paths simulated to T + t
  kFull,   // s in [0, horizon - t] on the same grid
};

/// How per-repetition squared errors are normalized.
enum class MiseNormalization {
  kLastRep,  // common denominator from the final repetition
  kPerRep,   // each repetition divided by its own true-density mass
};

struct ExperimentConfig {
  ModelTag model = ModelTag::kOu;
  int n_paths = 200;
  double horizon = 10.0;  // T
  double delta = 0.01;
  double lag = 1.0;  // t
  int reps = 1;      // K
  BasisFamily basis_x = BasisFamily::kHermite;
  BasisFamily basis_y = BasisFamily::kHermite;
  std::optional<int> cap_m1;  // model default when unset
  std::optional<int> cap_m2;
  PenaltyKind penalty = PenaltyKind::kPlain;
  double kappa = 2.0;
  PenaltyScale penalty_scale = PenaltyScale::kSpan;
  double cutoff = 1e6;
  int cutoff_exponent = 1;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = ".";
  int grid_x = 100;  // N_I
  int grid_y = 100;  // N_J
  WindowMode window = WindowMode::kFixed;
  MiseNormalization mise_norm = MiseNormalization::kLastRep;
  std::optional<int> m1;  // fixed model for `fit`
  std::optional<int> m2;
  std::string payoff = "identity";
  double x0 = 1.0;
  double rate = 0.0;

  DimensionPair caps() const;
  OuParams params() const { return default_params(model); }
  SimGrid grid() const;
  EstimationWindow window_spec() const;
  PenaltySpec penalty_spec() const { return {penalty, kappa, penalty_scale}; }
  CutoffConfig cutoff_config() const { return {cutoff, cutoff_exponent, true}; }
};

/// Default caps: ou (10, 12), tanh_ou (8, 45), cir (12, 15).
DimensionPair default_caps(ModelTag model);

/// Raw key/value pairs, keyed by long flag name without dashes ("n-paths").
using ConfigMap = std::map<std::string, std::string>;

/// Reads `key = value` lines ('#' comments) or, when the text starts with
/// '{', a flat JSON object.
ConfigMap parse_config_text(const std::string& text);
ConfigMap read_config_file(const std::filesystem::path& path);

/// Builds and validates a config; `overrides` win over `base`. Unknown keys
/// and invalid values throw ConfigError naming the field.
ExperimentConfig parse_config(const ConfigMap& base, const ConfigMap& overrides = {});

/// Basis for one axis. Trigonometric bases take the observed state range
/// of the ensemble as their support.
BasisSpec basis_for(BasisFamily family, const PathEnsemble& ensemble);

/// Inverse of parse_config, used to embed the run configuration in outputs.
ConfigMap to_config_map(const ExperimentConfig& config);

}  // namespace tde
