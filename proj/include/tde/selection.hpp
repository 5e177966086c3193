#pragma once

// Data-driven choice of (m1, m2): minimize -||p_hat_m||_N^2 + 2 kappa pen(m)
// over the admissible collection. All candidate fits reuse one pair of
// moment matrices accumulated at the caps.

#include <string_view>
#include <vector>

#include "tde/estimator.hpp"

namespace tde {

enum class PenaltyKind {
  kPlain,  // m1 L_psi(m2) / N
  kLog,    // (1 + log N) m1 L_psi(m2) / N
};

std::string_view penalty_name(PenaltyKind kind);  // "plain" | "log"
PenaltyKind parse_penalty(std::string_view name);

/// Sample-size unit dividing m1 L_psi(m2).
enum class PenaltyScale {
  kPaths,  // N
  kSpan,   // N * 2T, total observed path time of the copies
};

std::string_view penalty_scale_name(PenaltyScale scale);  // "paths" | "span"
PenaltyScale parse_penalty_scale(std::string_view name);

struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::kPlain;
  double kappa = 2.0;
  PenaltyScale scale = PenaltyScale::kSpan;

  void validate() const;
};

/// L_psi(m2) follows penalty_sup_norm(psi, m2). `horizon` only enters with
/// PenaltyScale::kSpan.
double penalty(const PenaltySpec& spec, const BasisSpec& psi, int m1, int m2, double n_paths,
               double horizon);

struct DimensionPair {
  int m1 = 1;
  int m2 = 1;
  friend bool operator==(const DimensionPair&, const DimensionPair&) = default;
};

enum class ExclusionReason { kBudget, kCutoff };

struct Exclusion {
  DimensionPair m;
  ExclusionReason reason;
};

struct ModelCollection {
  std::vector<DimensionPair> admissible;  // ordered by m1, then m2
  std::vector<Exclusion> exclusions;
  DimensionPair caps;
};

/// Pairs with m1 <= caps.m1, m2 <= caps.m2 (odd only for trigonometric
/// axes) satisfying m1 L_psi(m2) <= N and the stability cutoff on Psi_m1.
/// Throws ConfigError naming the dominant exclusion if nothing survives.
ModelCollection build_collection(const Moments& moments, int n_paths, double horizon,
                                 const BasisSpec& phi, const BasisSpec& psi, DimensionPair caps,
                                 const CutoffConfig& cutoff = {});

ModelCollection build_collection(const PathEnsemble& ensemble, const EstimationWindow& window,
                                 const BasisSpec& phi, const BasisSpec& psi, DimensionPair caps,
                                 const CutoffConfig& cutoff = {});

struct CriterionRow {
  DimensionPair m;
  double sq_norm = 0.0;
  double penalty = 0.0;
  double criterion = 0.0;
  bool truncated = false;
};

struct SelectionResult {
  DimensionPair chosen;
  std::vector<CriterionRow> table;
  TransitionFit fit;
};

/// Ties resolve to the smallest m1, then the smallest m2. Truncated fits are
/// listed but never chosen; SelectionError if every fit is truncated.
SelectionResult select(const Moments& moments, int n_paths, double horizon, double lag,
                       const BasisSpec& phi, const BasisSpec& psi, const PenaltySpec& spec,
                       const ModelCollection& collection, const CutoffConfig& cutoff = {});

SelectionResult select(const PathEnsemble& ensemble, const EstimationWindow& window,
                       const BasisSpec& phi, const BasisSpec& psi, const PenaltySpec& spec,
                       const ModelCollection& collection, const CutoffConfig& cutoff = {});

/// build_collection + select on one moment accumulation.
SelectionResult select_model(const PathEnsemble& ensemble, const EstimationWindow& window,
                             const BasisSpec& phi, const BasisSpec& psi, DimensionPair caps,
                             const PenaltySpec& spec, const CutoffConfig& cutoff = {});

}  // namespace tde
