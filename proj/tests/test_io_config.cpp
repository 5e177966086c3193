#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "tde/config.hpp"
#include "tde/errors.hpp"
#include "tde/evaluation.hpp"
#include "tde/io.hpp"
#include "test_util.hpp"

using namespace tde;

namespace {

PathEnsemble sample_ensemble() {
  return simulate_model(ModelTag::kCir, default_params(ModelTag::kCir), SimGrid{0.01, 30}, 7, 3);
}

}  // namespace

TEST_CASE("number formatting round-trips") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(gen) * std::pow(10.0, static_cast<int>(gen() % 40) - 20);
    CHECK(parse_number(format_number(x)) == x);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(std::isnan(parse_number(format_number(std::nan("")))));
  CHECK(parse_number(format_number(-std::numeric_limits<double>::infinity())) ==
        -std::numeric_limits<double>::infinity());
  CHECK_THROWS(parse_number("1,5"));
}

TEST_CASE("binary ensemble round-trip and layout") {
  const auto dir = test::scratch_dir("io_bin");
  const PathEnsemble e = sample_ensemble();
  write_ensemble(e, dir / "e.bin");
  const PathEnsemble back = read_ensemble(dir / "e.bin");
  CHECK(back.values == e.values);
  CHECK(back.model == e.model);
  CHECK(back.grid.delta == e.grid.delta);
  CHECK(back.grid.n_steps == e.grid.n_steps);
  CHECK(back.params.d == 6);
  CHECK(back.seed == e.seed);

  const std::string bytes = test::slurp(dir / "e.bin");
  CHECK(bytes.substr(0, 8) == "TDEENS01");
  CHECK(bytes.size() == 72 + 8 * 7 * 31);
  CHECK(static_cast<unsigned char>(bytes[16]) == 7);  // n_paths, little-endian
  CHECK(static_cast<unsigned char>(bytes[24]) == 30);

  write_text(dir / "bad.bin", "NOTANENS" + bytes.substr(8));
  CHECK_THROWS(read_ensemble(dir / "bad.bin"));
  write_text(dir / "short.bin", bytes.substr(0, 100));
  CHECK_THROWS(read_ensemble(dir / "short.bin"));
}

TEST_CASE("csv ensemble round-trip") {
  const auto dir = test::scratch_dir("io_csv");
  const PathEnsemble e = sample_ensemble();
  write_ensemble(e, dir / "e.csv");
  const PathEnsemble back = read_ensemble(dir / "e.csv");
  CHECK(back.values == e.values);
  CHECK(back.params.r == e.params.r);
  CHECK(test::slurp(dir / "e.csv").rfind("# tde-ensemble v1", 0) == 0);
}

TEST_CASE("fit record round-trip") {
  const auto dir = test::scratch_dir("io_fit");
  const SimGrid grid{0.01, required_steps(0.01, 5.0, 1.0)};
  const auto e = simulate_model(ModelTag::kOu, default_params(ModelTag::kOu), grid, 50, 2);
  const auto w = make_window(grid, 5.0, 1.0);
  const TransitionFit f = fit(e, w, BasisSpec::hermite(), basis_for(BasisFamily::kTrigonometric, e), 4, 5);
  write_fit(f, dir / "fit.json");
  const TransitionFit back = read_fit(dir / "fit.json");
  CHECK(back.theta == f.theta);
  CHECK(back.z == f.z);
  CHECK(back.gram.psi == f.gram.psi);
  CHECK(back.psi.lower == f.psi.lower);
  CHECK(back.psi.family == BasisFamily::kTrigonometric);
  CHECK(back.lag == f.lag);
  CHECK(empirical_sq_norm(back) == empirical_sq_norm(f));
  const Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(7, -1, 1);
  CHECK(evaluate(back, xs, xs) == evaluate(f, xs, xs));

  TransitionFit t = f;
  t.truncated = true;
  t.theta.setZero();
  t.gram.inv_op_norm = std::numeric_limits<double>::infinity();
  const TransitionFit tb = fit_from_json(fit_to_json(t));
  CHECK(tb.truncated);
  CHECK(std::isinf(tb.gram.inv_op_norm));
}

TEST_CASE("grid csv") {
  const Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(3, 0.0, 1.0);
  const Eigen::VectorXd ys = Eigen::VectorXd::LinSpaced(4, -1.0, 0.5);
  const Eigen::MatrixXd v = Eigen::MatrixXd::Random(3, 4);
  std::stringstream ss;
  write_grid_csv(xs, ys, v, ss);
  std::string first;
  std::getline(ss, first);
  CHECK(first == "x/y,-1,-0.5,0,0.5");
  ss.seekg(0);
  const GridData g = read_grid_csv(ss);
  CHECK(g.xs == xs);
  CHECK(g.ys == ys);
  CHECK(g.values == v);
}

TEST_CASE("selection and report exports") {
  ExperimentConfig c;
  c.n_paths = 30;
  c.horizon = 2.0;
  c.lag = 0.5;
  c.reps = 2;
  c.grid_x = c.grid_y = 10;
  const ExperimentReport r = run_experiment(c);
  std::stringstream csv;
  write_report_csv(r, csv);
  const std::string text = csv.str();
  CHECK(text.find("\naggregate,") != std::string::npos);
  const auto j = report_to_json(r);
  CHECK(j["reps"].size() == 2);
  CHECK(j["summary"]["mean100"].get<double>() == r.summary.mean100);
  CHECK(j["config"]["seed"] == "1");

  const RepOutcome one = run_repetition(c, 0);
  std::stringstream sel;
  write_selection_csv(one.selection, sel);
  std::string header;
  std::getline(sel, header);
  CHECK(header == "m1,m2,sq_norm,penalty,criterion,truncated,chosen");
  int chosen = 0;
  for (std::string line; std::getline(sel, line);)
    if (line.size() > 2 && line.substr(line.size() - 2) == ",1") ++chosen;
  CHECK(chosen == 1);
}

TEST_CASE("config defaults file") {
  const ConfigMap base = read_config_file(std::filesystem::path(TDE_SOURCE_DIR) / "configs" /
                                          "study_defaults.cfg");
  const ExperimentConfig c = parse_config(base);
  CHECK(c.n_paths == 200);
  CHECK(c.horizon == 10.0);
  CHECK(c.delta == 0.01);
  CHECK(c.lag == 1.0);
  CHECK(c.kappa == 2.0);
  CHECK(c.penalty == PenaltyKind::kPlain);
  CHECK(c.caps() == DimensionPair{10, 12});
  CHECK(c.grid_x == 100);

  const ExperimentConfig d = parse_config({});
  CHECK(d.n_paths == 200);
  CHECK(d.kappa == 2.0);
}

TEST_CASE("config validation names the field") {
  auto field_of = [](const ConfigMap& m) -> std::string {
    try {
      parse_config(m);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return "";
  };
  CHECK(field_of({{"lag", "0.015"}}) == "lag");
  CHECK(field_of({{"cap-m1", "0"}, {"cap-m2", "5"}}) == "cap-m1");
  CHECK(field_of({{"colour", "blue"}}) == "colour");
  CHECK(field_of({{"n-paths", "abc"}}) == "n-paths");
  CHECK(field_of({{"model", "heston"}}) == "model");
  CHECK(field_of({{"reps", "0"}}) == "reps");
  CHECK(field_of({{"horizon", "10.005"}}) == "horizon");
  CHECK(field_of({{"penalty-scale", "bogus"}}) == "penalty-scale");
}

TEST_CASE("config text formats and overrides") {
  const ConfigMap kv = parse_config_text("# comment\nmodel = cir\n\nn-paths=400 # trailing\n");
  CHECK(kv.at("model") == "cir");
  CHECK(kv.at("n-paths") == "400");
  const ConfigMap js = parse_config_text(R"({"model": "cir", "n-paths": 400, "kappa": 1.5})");
  CHECK(js.at("n-paths") == "400");
  const ExperimentConfig c = parse_config(js, {{"n-paths", "100"}});
  CHECK(c.n_paths == 100);
  CHECK(c.kappa == 1.5);
  CHECK(c.caps() == DimensionPair{12, 15});
  CHECK_THROWS_AS(parse_config_text("just words"), ConfigError);

  const ExperimentConfig again = parse_config(to_config_map(c));
  CHECK(to_config_map(again) == to_config_map(c));
}
