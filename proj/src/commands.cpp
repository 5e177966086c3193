#include "tde/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "tde/config.hpp"
#include "tde/errors.hpp"
#include "tde/evaluation.hpp"
#include "tde/io.hpp"

namespace tde {
namespace {

namespace fs = std::filesystem;

// Flags shared by every subcommand; the key doubles as the config-file key.
const std::vector<std::pair<std::string, std::string>> kConfigFlags = {
    {"model", "ou | tanh_ou | cir"},
    {"n-paths", "number of paths N"},
    {"horizon", "integration horizon T"},
    {"delta", "sampling step"},
    {"lag", "transition lag t"},
    {"reps", "Monte-Carlo repetitions K"},
    {"basis-x", "hermite | trig"},
    {"basis-y", "hermite | trig"},
    {"cap-m1", "largest m1 proposal"},
    {"cap-m2", "largest m2 proposal"},
    {"penalty", "plain | log"},
    {"kappa", "penalty constant"},
    {"penalty-scale", "span (N 2T) | paths (N)"},
    {"cutoff", "stability cutoff constant"},
    {"cutoff-exponent", "power of ||Psi^-1|| in the cutoff (1 or 2)"},
    {"seed", "master seed"},
    {"out", "output directory"},
    {"grid-x", "evaluation grid size in x"},
    {"grid-y", "evaluation grid size in y"},
    {"window", "fixed (s in [0,T]) | full (s in [0, horizon - t])"},
    {"mise-norm", "last | per-rep"},
    {"m1", "fixed x dimension (fit)"},
    {"m2", "fixed y dimension (fit)"},
    {"payoff", "one | identity | call:K | put:K (price)"},
    {"x", "starting point (price)"},
    {"rate", "risk-free rate (price)"},
};

struct Invocation {
  std::string config_file;
  std::string ensemble_file;
  std::string format = "bin";
  std::map<std::string, std::string> flags;
};

void add_common(CLI::App* cmd, Invocation& inv) {
  cmd->add_option("--config", inv.config_file, "key=value or JSON config file");
  for (const auto& [name, help] : kConfigFlags)
    cmd->add_option_function<std::string>(
        "--" + name, [&inv, key = name](const std::string& v) { inv.flags[key] = v; }, help);
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

ExperimentConfig load_config(const Invocation& inv) {
  const ConfigMap base = inv.config_file.empty() ? ConfigMap{} : read_config_file(inv.config_file);
  return parse_config(base, inv.flags);
}

PathEnsemble obtain_ensemble(const ExperimentConfig& c, const Invocation& inv) {
  if (!inv.ensemble_file.empty()) return read_ensemble(inv.ensemble_file);
  return simulate_model(c.model, c.params(), c.grid(), c.n_paths, c.seed);
}

EstimationWindow window_for(const ExperimentConfig& c, const PathEnsemble& e) {
  return c.window == WindowMode::kFull ? make_full_window(e.grid, c.lag)
                                       : make_window(e.grid, c.horizon, c.lag);
}

void check_roundtrip_fit(const TransitionFit& fit, const fs::path& path) {
  const TransitionFit back = read_fit(path);
  if (back.theta != fit.theta || back.z != fit.z || back.gram.psi != fit.gram.psi ||
      back.truncated != fit.truncated)
    throw EvaluationError("fit record failed round-trip validation: " + path.string());
}

void write_grid_file(const fs::path& path, const EvalWindow& w, const Eigen::MatrixXd& values) {
  std::ostringstream s;
  write_grid_csv(w.xs(), w.ys(), values, s);
  write_text(path, s.str());
}

// Estimate and truth grids on the ensemble's evaluation window.
double write_fit_outputs(const ExperimentConfig& c, const PathEnsemble& e,
                         const TransitionFit& fit, std::ostream& out) {
  const fs::path dir = c.output_dir;
  write_fit(fit, dir / "fit.json");
  check_roundtrip_fit(fit, dir / "fit.json");
  const int lag_index = static_cast<int>(std::lround(fit.lag / e.grid.delta));
  const EvalWindow w = eval_window(e, lag_index, lag_index, c.grid_x, c.grid_y);
  const Eigen::MatrixXd estimate = evaluate(fit, w.xs(), w.ys());
  write_grid_file(dir / "estimate_grid.csv", w, estimate);
  const TransitionDensityOracle oracle{e.model, e.params, fit.lag};
  const MiseSample sample{true_density_grid(oracle, w.xs(), w.ys()), estimate, w};
  write_grid_file(dir / "truth_grid.csv", w, sample.truth);
  const double mise100 = 100.0 * squared_error(sample) / squared_mass(sample);
  out << "m=(" << fit.m1 << "," << fit.m2 << ") truncated=" << (fit.truncated ? 1 : 0)
      << " sq_norm=" << format_number(empirical_sq_norm(fit))
      << " mise100=" << format_number(mise100) << "\n";
  return mise100;
}

int cmd_simulate(const ExperimentConfig& c, const Invocation& inv, std::ostream& out) {
  const PathEnsemble e = simulate_model(c.model, c.params(), c.grid(), c.n_paths, c.seed);
  const fs::path path = c.output_dir / (inv.format == "csv" ? "ensemble.csv" : "ensemble.bin");
  write_ensemble(e, path);
  const PathEnsemble back = read_ensemble(path);
  if (back.values != e.values) throw EvaluationError("ensemble failed round-trip validation");
  out << "wrote " << path.string() << " (" << e.n_paths() << " paths, " << e.grid.n_steps
      << " steps, seed " << e.seed << ")\n";
  return 0;
}

int cmd_fit(const ExperimentConfig& c, const Invocation& inv, std::ostream& out) {
  if (!c.m1 || !c.m2) throw ConfigError("m1", "fit needs --m1 and --m2");
  const PathEnsemble e = obtain_ensemble(c, inv);
  const EstimationWindow w = window_for(c, e);
  const TransitionFit f = fit(e, w, basis_for(c.basis_x, e), basis_for(c.basis_y, e), *c.m1,
                              *c.m2, c.cutoff_config());
  write_fit_outputs(c, e, f, out);
  return 0;
}

int cmd_select(const ExperimentConfig& c, const Invocation& inv, std::ostream& out) {
  const PathEnsemble e = obtain_ensemble(c, inv);
  const EstimationWindow w = window_for(c, e);
  const SelectionResult r = select_model(e, w, basis_for(c.basis_x, e), basis_for(c.basis_y, e),
                                         c.caps(), c.penalty_spec(), c.cutoff_config());
  std::ostringstream table;
  write_selection_csv(r, table);
  write_text(c.output_dir / "selection.csv", table.str());
  write_fit_outputs(c, e, r.fit, out);
  return 0;
}

int cmd_benchmark(const ExperimentConfig& c, const Invocation&, std::ostream& out) {
  const ExperimentReport report = run_experiment(c);
  std::ostringstream csv;
  write_report_csv(report, csv);
  write_text(c.output_dir / "report.csv", csv.str());
  write_text(c.output_dir / "report.json", report_to_json(report).dump(2) + "\n");
  const Aggregate& a = report.summary;
  out << "K=" << c.reps << " N=" << c.n_paths << " 100*MISE=" << format_number(100.0 * a.mise)
      << " sd=" << format_number(a.sd100) << " median=" << format_number(a.median100)
      << " dims=(" << format_number(a.mean_m1) << "," << format_number(a.mean_m2) << ")\n";
  return 0;
}

int cmd_price(const ExperimentConfig& c, const Invocation& inv, std::ostream& out) {
  const PathEnsemble e = obtain_ensemble(c, inv);
  const EstimationWindow w = window_for(c, e);
  const SelectionResult r = select_model(e, w, basis_for(c.basis_x, e), basis_for(c.basis_y, e),
                                         c.caps(), c.penalty_spec(), c.cutoff_config());
  const EvalWindow ew = eval_window(e, w.lag_index, w.lag_index, c.grid_x, c.grid_y);
  const Payoff v = parse_payoff(c.payoff);
  const Eigen::VectorXd ys = ew.ys();
  const TransitionDensityOracle oracle{e.model, e.params, w.lag()};
  const ConditionalDensity exact = [&](double x, double y) {
    return true_transition_density(oracle, x, y);
  };
  const double fk_fit = feynman_kac(r.fit, v, c.x0, ys);
  const double fk_exact = feynman_kac(exact, v, c.x0, ys);
  const double price_fit = option_price(r.fit, v, c.x0, c.rate, ys);
  const double price_exact = option_price(exact, w.lag(), v, c.x0, c.rate, ys);
  const nlohmann::json doc = {{"format", "tde-price"},
                              {"payoff", c.payoff},
                              {"x", c.x0},
                              {"rate", c.rate},
                              {"maturity", w.lag()},
                              {"m1", r.chosen.m1},
                              {"m2", r.chosen.m2},
                              {"y_range", {ys[0], ys[ys.size() - 1]}},
                              {"feynman_kac_fit", fk_fit},
                              {"feynman_kac_exact", fk_exact},
                              {"price_fit", price_fit},
                              {"price_exact", price_exact},
                              {"seed", c.seed}};
  write_text(c.output_dir / "price.json", doc.dump(2) + "\n");
  out << "F_hat=" << format_number(fk_fit) << " F_exact=" << format_number(fk_exact)
      << " P_hat=" << format_number(price_fit) << " P_exact=" << format_number(price_exact)
      << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Projection least-squares transition density estimation"};
  app.require_subcommand(1);
  Invocation inv;

  CLI::App* simulate = app.add_subcommand("simulate", "simulate an ensemble");
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a fixed model (m1, m2)");
  CLI::App* select_cmd = app.add_subcommand("select", "adaptive model selection");
  CLI::App* benchmark = app.add_subcommand("benchmark", "Monte-Carlo MISE study");
  CLI::App* price = app.add_subcommand("price", "Feynman-Kac / option price functionals");
  for (CLI::App* cmd : {simulate, fit_cmd, select_cmd, benchmark, price}) add_common(cmd, inv);
  simulate->add_option("--format", inv.format, "bin | csv")->check(CLI::IsMember({"bin", "csv"}));
  for (CLI::App* cmd : {fit_cmd, select_cmd, price})
    cmd->add_option("--ensemble", inv.ensemble_file, "read paths from a simulate output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "tde-error:usage:" << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    const ExperimentConfig c = load_config(inv);
    if (simulate->parsed()) return cmd_simulate(c, inv, out);
    if (fit_cmd->parsed()) return cmd_fit(c, inv, out);
    if (select_cmd->parsed()) return cmd_select(c, inv, out);
    if (benchmark->parsed()) return cmd_benchmark(c, inv, out);
    return cmd_price(c, inv, out);
  } catch (const ConfigError& e) {
    err << "tde-error:config:" << one_line(e.what()) << "\n";
  } catch (const ParameterError& e) {
    err << "tde-error:parameter:" << one_line(e.what()) << "\n";
  } catch (const DomainError& e) {
    err << "tde-error:domain:" << one_line(e.what()) << "\n";
  } catch (const SelectionError& e) {
    err << "tde-error:selection:" << one_line(e.what()) << "\n";
  } catch (const EvaluationError& e) {
    err << "tde-error:evaluation:" << one_line(e.what()) << "\n";
  } catch (const std::exception& e) {
    err << "tde-error:io:" << one_line(e.what()) << "\n";
  }
  return 1;
}

}  // namespace tde
