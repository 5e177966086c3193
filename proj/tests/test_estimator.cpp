#include <omp.h>

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tde/config.hpp"
#include "tde/errors.hpp"
#include "tde/estimator.hpp"
#include "test_util.hpp"

using namespace tde;

namespace {

struct Instance {
  PathEnsemble ensemble;
  EstimationWindow window;
};

Instance small_ou(int n_paths, double horizon, double lag, std::uint64_t seed,
                  ModelTag model = ModelTag::kOu) {
  const SimGrid grid{0.01, required_steps(0.01, horizon, lag)};
  Instance in{simulate_model(model, default_params(model), grid, n_paths, seed), {}};
  in.window = make_window(grid, horizon, lag);
  return in;
}

const BasisSpec kHermite = BasisSpec::hermite();

}  // namespace

TEST_CASE("window construction") {
  const SimGrid grid{0.01, required_steps(0.01, 10.0, 1.0)};
  CHECK(grid.n_steps == 1100);
  const EstimationWindow w = make_window(grid, 10.0, 1.0);
  CHECK(w.first_index == 0);
  CHECK(w.n_nodes() == 1000);
  CHECK(w.lag_index == 100);
  CHECK(w.horizon() == doctest::Approx(10.0));
  CHECK_THROWS_AS(make_window(grid, 10.0, 0.015), ParameterError);
  CHECK_THROWS_AS(make_window(grid, 10.0, 2.0), ParameterError);
  const EstimationWindow full = make_full_window(grid, 1.0);
  CHECK(full.end_index + full.lag_index == grid.n_steps + 1);
  EstimationWindow empty = w;
  empty.end_index = empty.first_index;
  CHECK_THROWS_AS(empty.validate(grid), ParameterError);
}

TEST_CASE("constant path gives a rank one gram matrix") {
  const double x0 = 0.4;
  const auto e = test::make_ensemble(RowMatrix::Constant(1, 201, x0), 0.01);
  const EstimationWindow w = make_window(e.grid, 1.0, 0.5);
  const std::vector<double> pt = {x0};
  const Eigen::VectorXd v = eval_hermite(4, pt).row(0).transpose();
  const GramMatrix g = gram_matrix(e, w, kHermite, 4);
  CHECK((g.psi - v * v.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK_FALSE(g.invertible());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g.psi);
  lu.setThreshold(1e-10);
  CHECK(lu.rank() == 1);

  const BasisSpec trig = BasisSpec::trigonometric(0.0, 1.0);
  const Eigen::MatrixXd z = cross_matrix(e, w, kHermite, trig, 4, 3);
  const Eigen::VectorXd u = eval_trigonometric(3, pt).row(0).transpose();
  CHECK((z - v * u.transpose()).cwiseAbs().maxCoeff() <= 1e-14);

  const TransitionFit f = fit(e, w, kHermite, kHermite, 3, 3);
  CHECK(f.truncated);
  CHECK(f.theta.isZero(0.0));
}

TEST_CASE("gram of uniform samples tends to the identity") {
  const auto e = test::uniform_ensemble(1000, 1000, 42);
  const BasisSpec trig = BasisSpec::trigonometric(0.0, 1.0);
  const EstimationWindow w{0, 1000, 1, 0.01};
  const Moments mo = accumulate_moments(e, w, trig, 5, trig, 5);
  CHECK((mo.gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 5e-3);
  // X_k and X_{k+1} are independent: only the constant pair survives.
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(5, 5);
  expected(0, 0) = 1.0;
  CHECK((mo.cross - expected).cwiseAbs().maxCoeff() <= 5e-3);
}

TEST_CASE("gram matches a direct sum over the sample") {
  const Instance in = small_ou(200, 10.0, 1.0, 3);
  const GramMatrix g = gram_matrix(in.ensemble, in.window, kHermite, 3);
  const Eigen::VectorXd xs = test::window_nodes(in.ensemble, in.window);
  long double acc[3][3] = {};
  const double c0 = std::pow(std::numbers::pi, -0.25);
  for (double x : xs) {
    const long double g0 = std::exp(-x * x / 2.0);
    const long double h[3] = {c0 * g0, c0 * std::sqrt(2.0) * x * g0,
                              c0 / std::sqrt(2.0) * (2.0 * x * x - 1.0) * g0};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) acc[a][b] += h[a] * h[b];
  }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      CHECK(g.psi(a, b) == doctest::Approx(static_cast<double>(acc[a][b] / xs.size())).epsilon(1e-6));
}

TEST_CASE("lag zero cross matrix equals the gram matrix") {
  const Instance in = small_ou(20, 2.0, 0.5, 9);
  EstimationWindow w = in.window;
  w.lag_index = 0;
  for (const BasisSpec& b : {kHermite, basis_for(BasisFamily::kTrigonometric, in.ensemble)}) {
    const Moments mo = accumulate_moments(in.ensemble, w, b, 5, b, 5);
    CHECK(mo.cross == mo.gram);
    const Moments ser = accumulate_moments_serial(in.ensemble, w, b, 5, b, 5);
    CHECK(ser.cross == ser.gram);
  }
}

TEST_CASE("parallel moments agree with the serial reference") {
  const Instance in = small_ou(64, 5.0, 1.0, 12);
  const Moments par = accumulate_moments(in.ensemble, in.window, kHermite, 6, kHermite, 7);
  const Moments ser = accumulate_moments_serial(in.ensemble, in.window, kHermite, 6, kHermite, 7);
  CHECK((par.gram - ser.gram).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK((par.cross - ser.cross).cwiseAbs().maxCoeff() <= 1e-13);

  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const Moments one = accumulate_moments(in.ensemble, in.window, kHermite, 6, kHermite, 7);
  omp_set_num_threads(4);
  const Moments four = accumulate_moments(in.ensemble, in.window, kHermite, 6, kHermite, 7);
  omp_set_num_threads(saved);
  CHECK(one.gram == four.gram);
  CHECK(one.cross == four.cross);
}

TEST_CASE("gram matrices are symmetric and positive semidefinite") {
  for (ModelTag tag : {ModelTag::kOu, ModelTag::kTanhOu, ModelTag::kCir}) {
    const Instance in = small_ou(50, 3.0, 1.0, 5, tag);
    const GramMatrix g = gram_matrix(in.ensemble, in.window, kHermite, 8);
    CHECK((g.psi - g.psi.transpose()).cwiseAbs().maxCoeff() <=
          1e-12 * g.psi.cwiseAbs().maxCoeff());
    CHECK(g.min_eig >= -1e-10 * g.max_eig);
  }
}

TEST_CASE("identity gram solves to the cross matrix") {
  Moments mo{Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Random(3, 4)};
  const TransitionFit f = fit_from_moments(mo, 3, 4, kHermite, kHermite, 1.0, 100, 10.0);
  CHECK_FALSE(f.truncated);
  CHECK((f.theta - mo.cross).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("fitted coefficients solve the normal equations") {
  const Instance in = small_ou(200, 10.0, 1.0, 77);
  const TransitionFit f = fit(in.ensemble, in.window, kHermite, kHermite, 6, 8);
  CHECK_FALSE(f.truncated);
  CHECK((f.gram.psi * f.theta - f.z).norm() <= 1e-8 * f.z.norm());
}

TEST_CASE("singular gram truncates instead of throwing") {
  Moments mo{Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Ones(2, 2)};
  const TransitionFit f = fit_from_moments(mo, 2, 2, kHermite, kHermite, 1.0, 100, 10.0);
  CHECK(f.truncated);
  CHECK(f.theta.isZero(0.0));
  CHECK(empirical_sq_norm(f) == 0.0);
}

TEST_CASE("evaluation") {
  TransitionFit f;
  f.m1 = 2;
  f.m2 = 3;
  f.phi = f.psi = kHermite;
  f.theta = Eigen::MatrixXd::Zero(2, 3);
  const Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(5, -2, 2);
  CHECK(evaluate(f, xs, xs).isZero(0.0));

  f.theta(0, 0) = 1.0;
  CHECK(evaluate_at(f, 0.0, 0.0) == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-15));

  f.theta = Eigen::MatrixXd::Random(2, 3);
  const double x = 0.37, y = -1.1;
  const auto hx = eval_hermite(2, std::vector<double>{x});
  const auto hy = eval_hermite(3, std::vector<double>{y});
  double direct = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 3; ++b) direct += f.theta(a, b) * hx(0, a) * hy(0, b);
  CHECK(evaluate(f, Eigen::VectorXd::Constant(1, x), Eigen::VectorXd::Constant(1, y))(0, 0) ==
        doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("empirical norm of an identity design") {
  TransitionFit f;
  f.m1 = f.m2 = 3;
  f.gram = make_gram(Eigen::MatrixXd::Identity(3, 3));
  f.theta = Eigen::MatrixXd::Zero(3, 3);
  f.theta.topLeftCorner(2, 2) = Eigen::MatrixXd::Identity(2, 2);
  CHECK(empirical_sq_norm(f) == doctest::Approx(2.0));
}

TEST_CASE("empirical norm equals brute-force quadrature") {
  const Instance in = small_ou(5, 2.0, 0.5, 31);
  const TransitionFit f = fit(in.ensemble, in.window, kHermite, kHermite, 2, 2);
  REQUIRE_FALSE(f.truncated);
  CHECK(std::fabs(empirical_sq_norm(f) - test::brute_sq_norm(in.ensemble, in.window, f)) <= 1e-6);
}

TEST_CASE("objective at the minimizer is minus the squared norm") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Instance in = small_ou(8, 2.0, 0.5, seed);
    const TransitionFit f = fit(in.ensemble, in.window, kHermite, kHermite, 3, 4);
    REQUIRE_FALSE(f.truncated);
    CHECK(std::fabs(test::brute_objective(in.ensemble, in.window, f) + empirical_sq_norm(f)) <=
          1e-6);
  }
}

TEST_CASE("empirical norm grows with the x dimension") {
  std::mt19937_64 gen(2024);
  for (int rep = 0; rep < 20; ++rep) {
    const Instance in = small_ou(10 + rep, 2.0, 0.5, 500 + rep);
    const int m2 = 1 + static_cast<int>(gen() % 6);
    const int m1 = 1 + static_cast<int>(gen() % 4);
    const TransitionFit small = fit(in.ensemble, in.window, kHermite, kHermite, m1, m2);
    const TransitionFit big = fit(in.ensemble, in.window, kHermite, kHermite, m1 + 1, m2);
    if (small.truncated || big.truncated) continue;
    CHECK(empirical_sq_norm(small) <= empirical_sq_norm(big) * (1.0 + 1e-12));
  }
}

TEST_CASE("projection of a larger fit recovers the smaller fit") {
  const Instance in = small_ou(12, 1.0, 0.5, 64);
  const TransitionFit big = fit(in.ensemble, in.window, kHermite, kHermite, 4, 6);
  const TransitionFit small = fit(in.ensemble, in.window, kHermite, kHermite, 2, 3);
  REQUIRE_FALSE(big.truncated);
  const Eigen::MatrixXd proj = test::brute_projection(in.ensemble, in.window, big, 2, 3);
  CHECK((proj - small.theta).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("stability cutoff") {
  CutoffConfig unit{1.0, 1, true};
  const GramMatrix id = make_gram(Eigen::MatrixXd::Identity(3, 3));
  CHECK(stability_cutoff(id, 1.0, 10, 10.0, unit));

  Eigen::MatrixXd tiny = Eigen::MatrixXd::Identity(2, 2);
  tiny(1, 1) = 1e-12;
  CHECK_FALSE(stability_cutoff(make_gram(tiny), 1.0, 1e4, 10.0, unit));

  const double nt = 10 * 10.0;
  const double rhs = nt / std::log(nt);
  CHECK(stability_cutoff(id, rhs, 10, 10.0, unit));
  CHECK_FALSE(stability_cutoff(id, std::nextafter(rhs, 1e300), 10, 10.0, unit));

  Eigen::MatrixXd half = Eigen::MatrixXd::Identity(2, 2) * 0.5;
  const GramMatrix g = make_gram(half);
  CHECK(g.inv_op_norm == doctest::Approx(2.0));
  const double l = rhs / 3.0;  // passes with ||.||, fails with ||.||^2
  CHECK(stability_cutoff(g, l, 10, 10.0, unit));
  CHECK_FALSE(stability_cutoff(g, l, 10, 10.0, CutoffConfig{1.0, 2, true}));
}
