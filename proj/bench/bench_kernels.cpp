// Serial reference vs OpenMP kernels: simulation and moment accumulation.
//
//   bench_kernels [n_paths] [repeats]

#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <iostream>

#include "tde/diffusion.hpp"
#include "tde/kernels.hpp"

namespace {

template <typename F>
double time_ms(F&& f, int repeats) {
  const auto start = std::chrono::steady_clock::now();
  for (int r = 0; r < repeats; ++r) f();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / repeats;
}

}  // namespace

int main(int argc, char** argv) {
  const int n_paths = argc > 1 ? std::atoi(argv[1]) : 400;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 3;
  const tde::OuParams params = tde::default_params(tde::ModelTag::kOu);
  const tde::SimGrid grid{0.01, 1100};
  const tde::BasisSpec hermite = tde::BasisSpec::hermite();
  const tde::EstimationWindow window = tde::make_window(grid, 10.0, 1.0);

  std::cout << "threads " << omp_get_max_threads() << ", paths " << n_paths << "\n";

  const double sim_serial = time_ms(
      [&] { tde::simulate_ou_ensemble_serial(params, grid, n_paths, 7); }, repeats);
  const double sim_omp =
      time_ms([&] { tde::simulate_ou_ensemble(params, grid, n_paths, 7); }, repeats);
  std::cout << "simulate  serial " << sim_serial << " ms  omp " << sim_omp << " ms\n";

  const tde::PathEnsemble e =
      tde::simulate_model(tde::ModelTag::kOu, params, grid, n_paths, 7);
  const double mom_serial = time_ms(
      [&] { tde::accumulate_moments_serial(e, window, hermite, 10, hermite, 12); }, repeats);
  const double mom_omp =
      time_ms([&] { tde::accumulate_moments(e, window, hermite, 10, hermite, 12); }, repeats);
  std::cout << "moments   serial " << mom_serial << " ms  omp " << mom_omp << " ms\n";

  const auto a = tde::accumulate_moments_serial(e, window, hermite, 10, hermite, 12);
  const auto b = tde::accumulate_moments(e, window, hermite, 10, hermite, 12);
  std::cout << "max |serial - omp| gram " << (a.gram - b.gram).cwiseAbs().maxCoeff()
            << " cross " << (a.cross - b.cross).cwiseAbs().maxCoeff() << "\n";
  return 0;
}
