#include "tde/selection.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "tde/errors.hpp"

namespace tde {

std::string_view penalty_name(PenaltyKind kind) {
  return kind == PenaltyKind::kPlain ? "plain" : "log";
}

PenaltyKind parse_penalty(std::string_view name) {
  if (name == "plain") return PenaltyKind::kPlain;
  if (name == "log") return PenaltyKind::kLog;
  throw ParameterError("unknown penalty '" + std::string(name) + "' (expected plain, log)");
}

std::string_view penalty_scale_name(PenaltyScale scale) {
  return scale == PenaltyScale::kPaths ? "paths" : "span";
}

PenaltyScale parse_penalty_scale(std::string_view name) {
  if (name == "paths") return PenaltyScale::kPaths;
  if (name == "span") return PenaltyScale::kSpan;
  throw ParameterError("unknown penalty scale '" + std::string(name) + "' (expected paths, span)");
}

void PenaltySpec::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ParameterError("kappa must be > 0");
}

double penalty(const PenaltySpec& spec, const BasisSpec& psi, int m1, int m2, double n_paths,
               double horizon) {
  double unit = n_paths;
  if (spec.scale == PenaltyScale::kSpan) {
    if (!(horizon > 0.0)) throw ParameterError("span penalty needs horizon > 0");
    unit *= 2.0 * horizon;
  }
  const double base = m1 * penalty_sup_norm(psi, m2) / unit;
  return spec.kind == PenaltyKind::kLog ? (1.0 + std::log(n_paths)) * base : base;
}

ModelCollection build_collection(const Moments& moments, int n_paths, double horizon,
                                 const BasisSpec& phi, const BasisSpec& psi, DimensionPair caps,
                                 const CutoffConfig& cutoff) {
  if (caps.m1 < 1 || caps.m2 < 1) throw ConfigError("caps", "caps must be >= (1, 1)");
  ModelCollection out;
  out.caps = {phi.largest_admissible(caps.m1), psi.largest_admissible(caps.m2)};
  if (out.caps.m1 < 1 || out.caps.m2 < 1)
    throw ConfigError("caps", "no admissible basis dimension below the caps");
  if (moments.gram.rows() < out.caps.m1 || moments.cross.cols() < out.caps.m2)
    throw ParameterError("moments smaller than the caps");

  std::size_t budget_count = 0, cutoff_count = 0;
  for (int m1 = 1; m1 <= out.caps.m1; ++m1) {
    if (!phi.admits_dimension(m1)) continue;
    const GramMatrix gram = make_gram(moments.gram.topLeftCorner(m1, m1));
    const bool stable =
        stability_cutoff(gram, penalty_sup_norm(phi, m1), n_paths, horizon, cutoff);
    for (int m2 = 1; m2 <= out.caps.m2; ++m2) {
      if (!psi.admits_dimension(m2)) continue;
      const DimensionPair m{m1, m2};
      if (m1 * penalty_sup_norm(psi, m2) > n_paths) {
        out.exclusions.push_back({m, ExclusionReason::kBudget});
        ++budget_count;
      } else if (!stable) {
        out.exclusions.push_back({m, ExclusionReason::kCutoff});
        ++cutoff_count;
      } else {
        out.admissible.push_back(m);
      }
    }
  }
  if (out.admissible.empty()) {
    std::ostringstream msg;
    msg << "empty model collection: " << (budget_count >= cutoff_count ? "budget" : "cutoff")
        << " excluded most candidates (budget " << budget_count << ", cutoff " << cutoff_count
        << ")";
    throw ConfigError("collection", msg.str());
  }
  return out;
}

ModelCollection build_collection(const PathEnsemble& ensemble, const EstimationWindow& window,
                                 const BasisSpec& phi, const BasisSpec& psi, DimensionPair caps,
                                 const CutoffConfig& cutoff) {
  if (caps.m1 < 1 || caps.m2 < 1) throw ConfigError("caps", "caps must be >= (1, 1)");
  const Moments moments = accumulate_moments(ensemble, window, phi, phi.largest_admissible(caps.m1),
                                             psi, psi.largest_admissible(caps.m2));
  return build_collection(moments, ensemble.n_paths(), window.horizon(), phi, psi, caps, cutoff);
}

namespace {

bool precedes(const CriterionRow& a, const CriterionRow& b) {
  if (a.criterion != b.criterion) return a.criterion < b.criterion;
  if (a.m.m1 != b.m.m1) return a.m.m1 < b.m.m1;
  return a.m.m2 < b.m.m2;
}

}  // namespace

SelectionResult select(const Moments& moments, int n_paths, double horizon, double lag,
                       const BasisSpec& phi, const BasisSpec& psi, const PenaltySpec& spec,
                       const ModelCollection& collection, const CutoffConfig& cutoff) {
  spec.validate();
  if (collection.admissible.empty()) throw SelectionError("empty model collection");
  SelectionResult out;
  out.table.reserve(collection.admissible.size());
  std::ptrdiff_t best = -1;
  for (const DimensionPair& m : collection.admissible) {
    const TransitionFit f =
        fit_from_moments(moments, m.m1, m.m2, phi, psi, lag, n_paths, horizon, cutoff);
    CriterionRow row;
    row.m = m;
    row.sq_norm = empirical_sq_norm(f);
    row.penalty = penalty(spec, psi, m.m1, m.m2, n_paths, horizon);
    row.criterion = -row.sq_norm + 2.0 * spec.kappa * row.penalty;
    row.truncated = f.truncated;
    out.table.push_back(row);
    if (!f.truncated && (best < 0 || precedes(row, out.table[best]))) {
      best = static_cast<std::ptrdiff_t>(out.table.size()) - 1;
      out.fit = f;
    }
  }
  if (best < 0) throw SelectionError("every candidate fit was truncated");
  out.chosen = out.table[best].m;
  return out;
}

SelectionResult select(const PathEnsemble& ensemble, const EstimationWindow& window,
                       const BasisSpec& phi, const BasisSpec& psi, const PenaltySpec& spec,
                       const ModelCollection& collection, const CutoffConfig& cutoff) {
  const Moments moments = accumulate_moments(ensemble, window, phi, collection.caps.m1, psi,
                                             collection.caps.m2);
  return select(moments, ensemble.n_paths(), window.horizon(), window.lag(), phi, psi, spec,
                collection, cutoff);
}

SelectionResult select_model(const PathEnsemble& ensemble, const EstimationWindow& window,
                             const BasisSpec& phi, const BasisSpec& psi, DimensionPair caps,
                             const PenaltySpec& spec, const CutoffConfig& cutoff) {
  if (caps.m1 < 1 || caps.m2 < 1) throw ConfigError("caps", "caps must be >= (1, 1)");
  const Moments moments = accumulate_moments(ensemble, window, phi, phi.largest_admissible(caps.m1),
                                             psi, psi.largest_admissible(caps.m2));
  const ModelCollection collection = build_collection(moments, ensemble.n_paths(),
                                                      window.horizon(), phi, psi, caps, cutoff);
  return select(moments, ensemble.n_paths(), window.horizon(), window.lag(), phi, psi, spec,
                collection, cutoff);
}

}  // namespace tde
