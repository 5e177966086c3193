#include "tde/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "tde/errors.hpp"

namespace tde {

DimensionPair default_caps(ModelTag model) {
  switch (model) {
    case ModelTag::kOu:
      return {10, 12};
    case ModelTag::kTanhOu:
      return {8, 45};
    case ModelTag::kCir:
      return {12, 15};
  }
  return {10, 12};
}

DimensionPair ExperimentConfig::caps() const {
  const DimensionPair d = default_caps(model);
  return {cap_m1.value_or(d.m1), cap_m2.value_or(d.m2)};
}

SimGrid ExperimentConfig::grid() const {
  return {delta, required_steps(delta, horizon, lag)};
}

EstimationWindow ExperimentConfig::window_spec() const {
  const SimGrid g = grid();
  return window == WindowMode::kFull ? make_full_window(g, lag) : make_window(g, horizon, lag);
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out))
    throw ConfigError(key, "expected a number, got '" + value + "'");
  return out;
}

long long to_integer(const std::string& key, const std::string& value) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError(key, "expected an integer, got '" + value + "'");
  return out;
}

int to_int(const std::string& key, const std::string& value) {
  const long long v = to_integer(key, value);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(key, "integer out of range");
  return static_cast<int>(v);
}

bool is_multiple(double value, double delta) {
  const double ratio = value / delta;
  return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, std::abs(ratio));
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config", "JSON config must be an object");
    for (const auto& [key, value] : doc.items()) {
      if (value.is_string())
        out[key] = value.get<std::string>();
      else if (value.is_number_integer())
        out[key] = std::to_string(value.get<long long>());
      else if (value.is_number())
        out[key] = format_double(value.get<double>());
      else
        throw ConfigError(key, "expected a string or number");
    }
    return out;
  }
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config", "line " + std::to_string(line_no) + ": expected key = value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

ConfigMap read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

ExperimentConfig parse_config(const ConfigMap& base, const ConfigMap& overrides) {
  ConfigMap merged = base;
  for (const auto& [k, v] : overrides) merged[k] = v;

  ExperimentConfig c;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"model",
       [&](auto& k, auto& v) {
         try {
           c.model = parse_model(v);
         } catch (const ParameterError& e) {
           throw ConfigError(k, e.what());
         }
       }},
      {"n-paths", [&](auto& k, auto& v) { c.n_paths = to_int(k, v); }},
      {"horizon", [&](auto& k, auto& v) { c.horizon = to_double(k, v); }},
      {"delta", [&](auto& k, auto& v) { c.delta = to_double(k, v); }},
      {"lag", [&](auto& k, auto& v) { c.lag = to_double(k, v); }},
      {"reps", [&](auto& k, auto& v) { c.reps = to_int(k, v); }},
      {"basis-x",
       [&](auto& k, auto& v) {
         try {
           c.basis_x = parse_family(v);
         } catch (const ParameterError& e) {
           throw ConfigError(k, e.what());
         }
       }},
      {"basis-y",
       [&](auto& k, auto& v) {
         try {
           c.basis_y = parse_family(v);
         } catch (const ParameterError& e) {
           throw ConfigError(k, e.what());
         }
       }},
      {"cap-m1", [&](auto& k, auto& v) { c.cap_m1 = to_int(k, v); }},
      {"cap-m2", [&](auto& k, auto& v) { c.cap_m2 = to_int(k, v); }},
      {"penalty",
       [&](auto& k, auto& v) {
         try {
           c.penalty = parse_penalty(v);
         } catch (const ParameterError& e) {
           throw ConfigError(k, e.what());
         }
       }},
      {"kappa", [&](auto& k, auto& v) { c.kappa = to_double(k, v); }},
      {"penalty-scale",
       [&](auto& k, auto& v) {
         try {
           c.penalty_scale = parse_penalty_scale(v);
         } catch (const ParameterError& e) {
           throw ConfigError(k, e.what());
         }
       }},
      {"cutoff", [&](auto& k, auto& v) { c.cutoff = to_double(k, v); }},
      {"cutoff-exponent", [&](auto& k, auto& v) { c.cutoff_exponent = to_int(k, v); }},
      {"seed",
       [&](auto& k, auto& v) {
         std::uint64_t s = 0;
         const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
         if (ec != std::errc() || ptr != v.data() + v.size())
           throw ConfigError(k, "expected a non-negative integer, got '" + v + "'");
         c.seed = s;
       }},
      {"out", [&](auto&, auto& v) { c.output_dir = v; }},
      {"grid-x", [&](auto& k, auto& v) { c.grid_x = to_int(k, v); }},
      {"grid-y", [&](auto& k, auto& v) { c.grid_y = to_int(k, v); }},
      {"window",
       [&](auto& k, auto& v) {
         if (v == "fixed")
           c.window = WindowMode::kFixed;
         else if (v == "full")
           c.window = WindowMode::kFull;
         else
           throw ConfigError(k, "expected fixed or full");
       }},
      {"mise-norm",
       [&](auto& k, auto& v) {
         if (v == "last")
           c.mise_norm = MiseNormalization::kLastRep;
         else if (v == "per-rep")
           c.mise_norm = MiseNormalization::kPerRep;
         else
           throw ConfigError(k, "expected last or per-rep");
       }},
      {"m1", [&](auto& k, auto& v) { c.m1 = to_int(k, v); }},
      {"m2", [&](auto& k, auto& v) { c.m2 = to_int(k, v); }},
      {"payoff", [&](auto&, auto& v) { c.payoff = v; }},
      {"x", [&](auto& k, auto& v) { c.x0 = to_double(k, v); }},
      {"rate", [&](auto& k, auto& v) { c.rate = to_double(k, v); }},
  };

  for (const auto& [key, value] : merged) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(key, "unknown configuration key");
    it->second(key, value);
  }

  if (c.n_paths < 1) throw ConfigError("n-paths", "must be >= 1");
  if (!(c.delta > 0.0)) throw ConfigError("delta", "must be > 0");
  if (!(c.horizon > 0.0)) throw ConfigError("horizon", "must be > 0");
  if (!is_multiple(c.horizon, c.delta))
    throw ConfigError("horizon", "must be an integer multiple of delta");
  if (!(c.lag > 0.0)) throw ConfigError("lag", "must be > 0");
  if (!is_multiple(c.lag, c.delta)) throw ConfigError("lag", "must be an integer multiple of delta");
  if (c.reps < 1) throw ConfigError("reps", "must be >= 1");
  if (c.cap_m1 && *c.cap_m1 < 1) throw ConfigError("cap-m1", "must be >= 1");
  if (c.cap_m2 && *c.cap_m2 < 1) throw ConfigError("cap-m2", "must be >= 1");
  if (!(c.kappa > 0.0)) throw ConfigError("kappa", "must be > 0");
  if (!(c.cutoff > 0.0)) throw ConfigError("cutoff", "must be > 0");
  if (c.cutoff_exponent != 1 && c.cutoff_exponent != 2)
    throw ConfigError("cutoff-exponent", "must be 1 or 2");
  if (c.grid_x < 2) throw ConfigError("grid-x", "must be >= 2");
  if (c.grid_y < 2) throw ConfigError("grid-y", "must be >= 2");
  if (c.m1 && *c.m1 < 1) throw ConfigError("m1", "must be >= 1");
  if (c.m2 && *c.m2 < 1) throw ConfigError("m2", "must be >= 1");
  return c;
}

BasisSpec basis_for(BasisFamily family, const PathEnsemble& ensemble) {
  if (family == BasisFamily::kHermite) return BasisSpec::hermite();
  const double lo = ensemble.values.minCoeff();
  const double hi = ensemble.values.maxCoeff();
  if (!(hi > lo)) throw ParameterError("constant ensemble: no trigonometric support");
  const double pad = 1e-9 * (hi - lo);
  return BasisSpec::trigonometric(lo - pad, hi + pad);
}

ConfigMap to_config_map(const ExperimentConfig& c) {
  ConfigMap m;
  const DimensionPair caps = c.caps();
  m["model"] = std::string(model_name(c.model));
  m["n-paths"] = std::to_string(c.n_paths);
  m["horizon"] = format_double(c.horizon);
  m["delta"] = format_double(c.delta);
  m["lag"] = format_double(c.lag);
  m["reps"] = std::to_string(c.reps);
  m["basis-x"] = std::string(family_name(c.basis_x));
  m["basis-y"] = std::string(family_name(c.basis_y));
  m["cap-m1"] = std::to_string(caps.m1);
  m["cap-m2"] = std::to_string(caps.m2);
  m["penalty"] = std::string(penalty_name(c.penalty));
  m["kappa"] = format_double(c.kappa);
  m["penalty-scale"] = std::string(penalty_scale_name(c.penalty_scale));
  m["cutoff"] = format_double(c.cutoff);
  m["cutoff-exponent"] = std::to_string(c.cutoff_exponent);
  m["seed"] = std::to_string(c.seed);
  m["grid-x"] = std::to_string(c.grid_x);
  m["grid-y"] = std::to_string(c.grid_y);
  m["window"] = c.window == WindowMode::kFull ? "full" : "fixed";
  m["mise-norm"] = c.mise_norm == MiseNormalization::kPerRep ? "per-rep" : "last";
  if (c.m1) m["m1"] = std::to_string(*c.m1);
  if (c.m2) m["m2"] = std::to_string(*c.m2);
  m["payoff"] = c.payoff;
  m["x"] = format_double(c.x0);
  m["rate"] = format_double(c.rate);
  return m;
}

}  // namespace tde
