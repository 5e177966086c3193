#pragma once

// File formats. Binary ensembles are little-endian:
//
//   offset  size  field
//   0       8     magic "TDEENS01"
//   8       4     uint32 format version (1)
//   12      4     int32 model tag (1 ou, 2 tanh_ou, 3 cir)
//   16      8     uint64 n_paths
//   24      8     uint64 n_steps
//   32      8     float64 delta
//   40      8     float64 r
//   48      8     float64 gamma
//   56      4     int32 d
//   60      4     uint32 reserved (0)
//   64      8     uint64 seed
//   72      ...   n_paths * (n_steps + 1) float64 states, row-major by path
//
// Text formats use shortest round-trip decimal output with '.' separators
// regardless of locale.

#include <filesystem>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "json.hpp"
#include "tde/diffusion.hpp"
#include "tde/estimator.hpp"
#include "tde/evaluation.hpp"
#include "tde/selection.hpp"

namespace tde {

/// Locale-independent shortest representation that parses back exactly.
std::string format_number(double value);
double parse_number(const std::string& text);

void write_ensemble_binary(const PathEnsemble& ensemble, const std::filesystem::path& path);
PathEnsemble read_ensemble_binary(const std::filesystem::path& path);

/// Two '#' header lines (format tag, then key=value metadata), then one
/// comma-separated row per path.
void write_ensemble_csv(const PathEnsemble& ensemble, const std::filesystem::path& path);
PathEnsemble read_ensemble_csv(const std::filesystem::path& path);

/// Picks the format from the extension (.csv or binary otherwise).
void write_ensemble(const PathEnsemble& ensemble, const std::filesystem::path& path);
PathEnsemble read_ensemble(const std::filesystem::path& path);

nlohmann::json fit_to_json(const TransitionFit& fit);
TransitionFit fit_from_json(const nlohmann::json& doc);
void write_fit(const TransitionFit& fit, const std::filesystem::path& path);
TransitionFit read_fit(const std::filesystem::path& path);

/// Columns m1, m2, sq_norm, penalty, criterion, truncated, chosen.
void write_selection_csv(const SelectionResult& result, std::ostream& out);

/// First row: y-axis values; first column: x-axis values.
void write_grid_csv(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                    const Eigen::MatrixXd& values, std::ostream& out);
struct GridData {
  Eigen::VectorXd xs;
  Eigen::VectorXd ys;
  Eigen::MatrixXd values;
};
GridData read_grid_csv(std::istream& in);

void write_report_csv(const ExperimentReport& report, std::ostream& out);
nlohmann::json report_to_json(const ExperimentReport& report);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace tde
