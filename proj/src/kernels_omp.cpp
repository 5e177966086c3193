#include <exception>
#include <vector>

#include "tde/errors.hpp"
#include "tde/kernels.hpp"

namespace tde {

Moments accumulate_moments(const PathEnsemble& ensemble, const EstimationWindow& window,
                           const BasisSpec& phi, int m1, const BasisSpec& psi, int m2) {
  window.validate(ensemble.grid);
  if (m1 < 1 || m2 < 0) throw ParameterError("model dimensions must be >= 1");
  const int n_paths = ensemble.n_paths();
  const int nodes = window.n_nodes();
  std::vector<Moments> partial(n_paths);
  std::exception_ptr failure;

#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_paths; ++i) {
    try {
      const double* row = ensemble.values.row(i).data();
      const BasisMatrix bx =
          eval_basis(phi, m1, std::span<const double>(row + window.first_index, nodes));
      partial[i].gram.noalias() = bx.transpose() * bx;
      if (m2 > 0) {
        const BasisMatrix by = eval_basis(
            psi, m2, std::span<const double>(row + window.first_index + window.lag_index, nodes));
        partial[i].cross.noalias() = bx.transpose() * by;
      } else {
        partial[i].cross.resize(m1, 0);
      }
    } catch (...) {
#pragma omp critical(tde_moments_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  // Fixed pairwise tree: the combination order depends only on n_paths.
  for (int stride = 1; stride < n_paths; stride *= 2) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n_paths - stride; i += 2 * stride) {
      partial[i].gram += partial[i + stride].gram;
      partial[i].cross += partial[i + stride].cross;
    }
  }

  const double scale = window.delta / (n_paths * window.horizon());
  Moments out = std::move(partial[0]);
  out.gram *= scale;
  out.cross *= scale;
  return out;
}

}  // namespace tde
