#include <cmath>
#include <random>

#include "doctest.h"
#include "tde/errors.hpp"
#include "tde/selection.hpp"
#include "test_util.hpp"

using namespace tde;

namespace {

const BasisSpec kHermite = BasisSpec::hermite();
const PenaltySpec kPlainPaths{PenaltyKind::kPlain, 2.0, PenaltyScale::kPaths};

Moments identity_moments(int m1, int m2) {
  return {Eigen::MatrixXd::Identity(m1, m1), Eigen::MatrixXd::Zero(m1, m2)};
}

PathEnsemble ou_paths(int n, double horizon, double lag, std::uint64_t seed, EstimationWindow& w) {
  const SimGrid grid{0.01, required_steps(0.01, horizon, lag)};
  w = make_window(grid, horizon, lag);
  return simulate_model(ModelTag::kOu, default_params(ModelTag::kOu), grid, n, seed);
}

}  // namespace

TEST_CASE("penalty arithmetic") {
  CHECK(penalty(kPlainPaths, kHermite, 4, 9, 100, 10.0) == doctest::Approx(0.12).epsilon(1e-15));
  const PenaltySpec span{PenaltyKind::kPlain, 2.0, PenaltyScale::kSpan};
  CHECK(penalty(span, kHermite, 4, 9, 100, 10.0) == doctest::Approx(0.12 / 20.0).epsilon(1e-15));
  CHECK(penalty(kPlainPaths, BasisSpec::trigonometric(), 4, 9, 100, 10.0) ==
        doctest::Approx(0.36));

  const PenaltySpec log{PenaltyKind::kLog, 2.0, PenaltyScale::kPaths};
  double previous = 1e300;
  for (double n : {10.0, 100.0, 1000.0}) {
    const double p = penalty(log, kHermite, 1, 1, n, 10.0);
    CHECK(p == doctest::Approx((1.0 + std::log(n)) / n));
    CHECK(p < previous);
    previous = p;
  }
  CHECK_THROWS_AS((PenaltySpec{PenaltyKind::kPlain, 0.0}.validate()), ParameterError);
  CHECK(parse_penalty("log") == PenaltyKind::kLog);
  CHECK(parse_penalty_scale("paths") == PenaltyScale::kPaths);
  CHECK_THROWS_AS(parse_penalty("huge"), ParameterError);
}

TEST_CASE("budget with a single path") {
  const auto c = build_collection(identity_moments(3, 4), 1, 10.0, kHermite, kHermite, {3, 4});
  REQUIRE(c.admissible.size() == 1);
  CHECK(c.admissible[0] == DimensionPair{1, 1});
  for (const auto& ex : c.exclusions) CHECK(ex.reason == ExclusionReason::kBudget);
}

TEST_CASE("budget boundary is inclusive") {
  const auto c =
      build_collection(identity_moments(10, 100), 100, 10.0, kHermite, kHermite, {10, 100},
                       CutoffConfig{1.0, 1, true});
  CHECK(std::find(c.admissible.begin(), c.admissible.end(), DimensionPair{10, 100}) !=
        c.admissible.end());
}

TEST_CASE("identity gram: collection is the budget set") {
  for (int n : {5, 40, 100}) {
    const auto c = build_collection(identity_moments(8, 12), n, 10.0, kHermite, kHermite, {8, 12},
                                    CutoffConfig{1.0, 1, true});
    std::size_t count = 0;
    for (int m1 = 1; m1 <= 8; ++m1)
      for (int m2 = 1; m2 <= 12; ++m2)
        if (m1 * std::sqrt(m2) <= n) ++count;
    CHECK(c.admissible.size() == count);
    CHECK(c.admissible.size() + c.exclusions.size() == 96);
    for (const auto& ex : c.exclusions) CHECK(ex.reason == ExclusionReason::kBudget);
  }
}

TEST_CASE("budget set never shrinks with N") {
  std::size_t previous = 0;
  for (int n : {1, 3, 10, 30, 100}) {
    const auto c = build_collection(identity_moments(6, 9), n, 10.0, kHermite, kHermite, {6, 9});
    CHECK(c.admissible.size() >= previous);
    previous = c.admissible.size();
  }
}

TEST_CASE("odd dimensions only for trigonometric axes") {
  const BasisSpec trig = BasisSpec::trigonometric();
  const auto c = build_collection(identity_moments(5, 7), 1000, 10.0, trig, trig, {6, 8});
  CHECK(c.caps == DimensionPair{5, 7});
  for (const auto& m : c.admissible) {
    CHECK(m.m1 % 2 == 1);
    CHECK(m.m2 % 2 == 1);
  }
  CHECK(c.admissible.size() == 12);
}

TEST_CASE("cutoff exclusions and empty collections") {
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(4, 4);
  g(3, 3) = 1e-9;
  Moments mo{g, Eigen::MatrixXd::Zero(4, 3)};
  const auto c = build_collection(mo, 100, 10.0, kHermite, kHermite, {4, 3}, CutoffConfig{1.0});
  for (const auto& m : c.admissible) CHECK(m.m1 <= 3);
  bool saw_cutoff = false;
  for (const auto& ex : c.exclusions) saw_cutoff |= ex.reason == ExclusionReason::kCutoff;
  CHECK(saw_cutoff);

  Moments zero{Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(3, 3)};
  try {
    build_collection(zero, 100, 10.0, kHermite, kHermite, {3, 3});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "collection");
    CHECK(std::string(e.what()).find("cutoff") != std::string::npos);
  }
  CHECK_THROWS_AS(build_collection(zero, 100, 10.0, kHermite, kHermite, {0, 3}), ConfigError);
}

TEST_CASE("single model collection") {
  ModelCollection c;
  c.admissible = {{2, 3}};
  c.caps = {2, 3};
  Moments mo{Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Ones(2, 3)};
  const auto r = select(mo, 100, 10.0, 1.0, kHermite, kHermite, kPlainPaths, c);
  CHECK(r.chosen == DimensionPair{2, 3});
  CHECK(r.table.size() == 1);
}

TEST_CASE("huge kappa picks the smallest model") {
  EstimationWindow w;
  const auto e = ou_paths(100, 10.0, 1.0, 4, w);
  for (PenaltyKind kind : {PenaltyKind::kPlain, PenaltyKind::kLog}) {
    const auto r = select_model(e, w, kHermite, kHermite, {6, 6}, PenaltySpec{kind, 1e12});
    CHECK(r.chosen == DimensionPair{1, 1});
  }
}

TEST_CASE("ties resolve to the smallest m1, then m2") {
  // Zero cross matrix: every criterion is the penalty, and m1 sqrt(m2)
  // gives pen(2, 1) == pen(1, 4).
  ModelCollection c;
  c.admissible = {{2, 1}, {1, 4}};
  c.caps = {2, 4};
  Moments mo{Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Zero(2, 4)};
  const auto r = select(mo, 100, 10.0, 1.0, kHermite, kHermite, kPlainPaths, c);
  CHECK(r.table[0].criterion == r.table[1].criterion);
  CHECK(r.chosen == DimensionPair{1, 4});
}

TEST_CASE("criterion table rows") {
  EstimationWindow w;
  const auto e = ou_paths(100, 10.0, 1.0, 8, w);
  const PenaltySpec spec{};
  const auto r = select_model(e, w, kHermite, kHermite, {6, 8}, spec);
  double best = 1e300;
  for (const auto& row : r.table) {
    CHECK(row.criterion == -row.sq_norm + 2.0 * spec.kappa * row.penalty);
    CHECK(row.penalty == penalty(spec, kHermite, row.m.m1, row.m.m2, 100, 10.0));
    if (!row.truncated) best = std::min(best, row.criterion);
  }
  for (const auto& row : r.table)
    if (row.m == r.chosen) CHECK(row.criterion == best);
  const auto again = select_model(e, w, kHermite, kHermite, {6, 8}, spec);
  CHECK(again.chosen == r.chosen);
  CHECK(again.fit.theta == r.fit.theta);
}

TEST_CASE("sub-block criteria match fresh fits") {
  std::mt19937_64 gen(7);
  for (int rep = 0; rep < 20; ++rep) {
    EstimationWindow w;
    const auto e = ou_paths(60 + 5 * rep, 4.0, 1.0, 900 + rep, w);
    const DimensionPair caps{6, 7};
    const auto r = select_model(e, w, kHermite, kHermite, caps, PenaltySpec{});
    const auto& row = r.table[gen() % r.table.size()];
    const TransitionFit fresh = fit(e, w, kHermite, kHermite, row.m.m1, row.m.m2);
    CHECK(fresh.truncated == row.truncated);
    const double crit = -empirical_sq_norm(fresh) +
                        2.0 * 2.0 * penalty(PenaltySpec{}, kHermite, row.m.m1, row.m.m2,
                                            e.n_paths(), w.horizon());
    CHECK(std::fabs(crit - row.criterion) <= 1e-8);

    // The leading block of the caps-level solution is not the smaller fit.
    const TransitionFit big = fit(e, w, kHermite, kHermite, caps.m1, caps.m2);
    if (row.m.m1 < caps.m1 && !fresh.truncated)
      CHECK((big.theta.topLeftCorner(row.m.m1, row.m.m2) - fresh.theta).cwiseAbs().maxCoeff() >
            1e-6);
  }
}

TEST_CASE("all candidates truncated") {
  ModelCollection c;
  c.admissible = {{1, 1}, {2, 2}};
  c.caps = {2, 2};
  Moments mo{Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Ones(2, 2)};
  CHECK_THROWS_AS(select(mo, 100, 10.0, 1.0, kHermite, kHermite, kPlainPaths, c), SelectionError);
  ModelCollection empty;
  CHECK_THROWS_AS(select(mo, 100, 10.0, 1.0, kHermite, kHermite, kPlainPaths, empty),
                  SelectionError);
}
