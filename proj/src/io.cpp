#include "tde/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "tde/errors.hpp"

namespace tde {

namespace fs = std::filesystem;

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

double parse_number(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ParameterError("not a number: '" + text + "'");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// --- binary ensembles -------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'T', 'D', 'E', 'E', 'N', 'S', '0', '1'};
constexpr std::uint32_t kBinaryVersion = 1;

class LeWriter {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const char*>(data);
    buf_.insert(buf_.end(), p, p + n);
  }
  template <typename U>
  void uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void i32(std::int32_t v) { uint(static_cast<std::uint32_t>(v)); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  const std::vector<char>& data() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class LeReader {
 public:
  explicit LeReader(std::vector<char> buf) : buf_(std::move(buf)) {}
  void bytes(void* out, std::size_t n) {
    need(n);
    std::memcpy(out, buf_.data() + pos_, n);
    pos_ += n;
  }
  template <typename U>
  U uint() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      v |= static_cast<U>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(uint<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  bool at_end() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > buf_.size()) throw ParameterError("truncated ensemble file");
  }
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

std::vector<char> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ModelTag model_from_int(int tag) {
  if (tag < 1 || tag > 3) throw ParameterError("unknown model tag " + std::to_string(tag));
  return static_cast<ModelTag>(tag);
}

}  // namespace

void write_ensemble_binary(const PathEnsemble& e, const fs::path& path) {
  LeWriter w;
  w.bytes(kMagic, sizeof kMagic);
  w.uint<std::uint32_t>(kBinaryVersion);
  w.i32(static_cast<std::int32_t>(e.model));
  w.uint<std::uint64_t>(static_cast<std::uint64_t>(e.n_paths()));
  w.uint<std::uint64_t>(static_cast<std::uint64_t>(e.grid.n_steps));
  w.f64(e.grid.delta);
  w.f64(e.params.r);
  w.f64(e.params.gamma);
  w.i32(e.params.d);
  w.uint<std::uint32_t>(0);
  w.uint<std::uint64_t>(e.seed);
  for (Eigen::Index i = 0; i < e.values.rows(); ++i)
    for (Eigen::Index k = 0; k < e.values.cols(); ++k) w.f64(e.values(i, k));
  write_text(path, std::string(w.data().begin(), w.data().end()));
}

PathEnsemble read_ensemble_binary(const fs::path& path) {
  LeReader r(slurp(path));
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw ParameterError(path.string() + ": not a binary ensemble file");
  if (r.uint<std::uint32_t>() != kBinaryVersion)
    throw ParameterError(path.string() + ": unsupported ensemble version");
  PathEnsemble e;
  e.model = model_from_int(r.i32());
  const auto n_paths = r.uint<std::uint64_t>();
  const auto n_steps = r.uint<std::uint64_t>();
  if (n_paths > (1u << 30) || n_steps > (1u << 30)) throw ParameterError("implausible ensemble size");
  e.grid = {r.f64(), static_cast<int>(n_steps)};
  e.params.r = r.f64();
  e.params.gamma = r.f64();
  e.params.d = r.i32();
  r.uint<std::uint32_t>();
  e.seed = r.uint<std::uint64_t>();
  e.values.resize(static_cast<Eigen::Index>(n_paths), static_cast<Eigen::Index>(n_steps + 1));
  for (Eigen::Index i = 0; i < e.values.rows(); ++i)
    for (Eigen::Index k = 0; k < e.values.cols(); ++k) e.values(i, k) = r.f64();
  if (!r.at_end()) throw ParameterError(path.string() + ": trailing bytes after ensemble");
  e.validate();
  return e;
}

// --- CSV ensembles ----------------------------------------------------------

void write_ensemble_csv(const PathEnsemble& e, const fs::path& path) {
  std::ostringstream out;
  out << "# tde-ensemble v1\n";
  out << "# n_paths=" << e.n_paths() << ",n_steps=" << e.grid.n_steps
      << ",delta=" << format_number(e.grid.delta) << ",model=" << model_name(e.model)
      << ",r=" << format_number(e.params.r) << ",gamma=" << format_number(e.params.gamma)
      << ",d=" << e.params.d << ",seed=" << e.seed << "\n";
  for (Eigen::Index i = 0; i < e.values.rows(); ++i) {
    for (Eigen::Index k = 0; k < e.values.cols(); ++k) {
      if (k) out << ',';
      out << format_number(e.values(i, k));
    }
    out << '\n';
  }
  write_text(path, out.str());
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

PathEnsemble read_ensemble_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "# tde-ensemble v1")
    throw ParameterError(path.string() + ": not a CSV ensemble file");
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw ParameterError(path.string() + ": missing metadata line");
  std::map<std::string, std::string> meta;
  for (const std::string& kv : split(line.substr(2), ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ParameterError("bad metadata entry '" + kv + "'");
    meta[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  auto get = [&](const char* key) -> const std::string& {
    const auto it = meta.find(key);
    if (it == meta.end()) throw ParameterError(std::string("ensemble metadata lacks ") + key);
    return it->second;
  };
  PathEnsemble e;
  const int n_paths = std::stoi(get("n_paths"));
  e.grid = {parse_number(get("delta")), std::stoi(get("n_steps"))};
  e.model = parse_model(get("model"));
  e.params = {parse_number(get("r")), parse_number(get("gamma")), std::stoi(get("d"))};
  e.seed = std::stoull(get("seed"));
  e.values.resize(n_paths, e.grid.n_points());
  for (int i = 0; i < n_paths; ++i) {
    if (!std::getline(in, line)) throw ParameterError(path.string() + ": missing path rows");
    const auto fields = split(line, ',');
    if (static_cast<int>(fields.size()) != e.grid.n_points())
      throw ParameterError(path.string() + ": row " + std::to_string(i) + " has wrong length");
    for (int k = 0; k < e.grid.n_points(); ++k) e.values(i, k) = parse_number(fields[k]);
  }
  e.validate();
  return e;
}

void write_ensemble(const PathEnsemble& e, const fs::path& path) {
  if (path.extension() == ".csv")
    write_ensemble_csv(e, path);
  else
    write_ensemble_binary(e, path);
}

PathEnsemble read_ensemble(const fs::path& path) {
  return path.extension() == ".csv" ? read_ensemble_csv(path) : read_ensemble_binary(path);
}

// --- fit records ------------------------------------------------------------

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) rows.push_back(m(i, j));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& doc) {
  const auto rows = doc.at("rows").get<Eigen::Index>();
  const auto cols = doc.at("cols").get<Eigen::Index>();
  const auto& data = doc.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw ParameterError("matrix record size mismatch");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = data[i * cols + j].get<double>();
  return m;
}

nlohmann::json basis_to_json(const BasisSpec& b) {
  nlohmann::json out = {{"family", family_name(b.family)}, {"max_dim", b.max_dim}};
  if (b.family == BasisFamily::kTrigonometric) {
    out["lower"] = b.lower;
    out["upper"] = b.upper;
  }
  return out;
}

BasisSpec basis_from_json(const nlohmann::json& doc) {
  const BasisFamily family = parse_family(doc.at("family").get<std::string>());
  const int max_dim = doc.at("max_dim").get<int>();
  if (family == BasisFamily::kHermite) return BasisSpec::hermite(max_dim);
  return BasisSpec::trigonometric(doc.at("lower").get<double>(), doc.at("upper").get<double>(),
                                  max_dim);
}

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json fit_to_json(const TransitionFit& f) {
  return {{"format", "tde-fit"},
          {"version", 1},
          {"m1", f.m1},
          {"m2", f.m2},
          {"lag", f.lag},
          {"n_paths", f.n_paths},
          {"horizon", f.horizon},
          {"truncated", f.truncated},
          {"phi", basis_to_json(f.phi)},
          {"psi", basis_to_json(f.psi)},
          {"theta", matrix_to_json(f.theta)},
          {"z", matrix_to_json(f.z)},
          {"gram", matrix_to_json(f.gram.psi)},
          {"diagnostics",
           {{"min_eig", f.gram.min_eig},
            {"max_eig", f.gram.max_eig},
            {"inv_op_norm", finite_or_null(f.gram.inv_op_norm)},
            {"sq_norm", empirical_sq_norm(f)}}}};
}

TransitionFit fit_from_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != "tde-fit") throw ParameterError("not a tde-fit record");
  TransitionFit f;
  f.m1 = doc.at("m1").get<int>();
  f.m2 = doc.at("m2").get<int>();
  f.lag = doc.at("lag").get<double>();
  f.n_paths = doc.at("n_paths").get<int>();
  f.horizon = doc.at("horizon").get<double>();
  f.truncated = doc.at("truncated").get<bool>();
  f.phi = basis_from_json(doc.at("phi"));
  f.psi = basis_from_json(doc.at("psi"));
  f.theta = matrix_from_json(doc.at("theta"));
  f.z = matrix_from_json(doc.at("z"));
  f.gram.psi = matrix_from_json(doc.at("gram"));
  const auto& diag = doc.at("diagnostics");
  f.gram.min_eig = diag.at("min_eig").get<double>();
  f.gram.max_eig = diag.at("max_eig").get<double>();
  f.gram.inv_op_norm = diag.at("inv_op_norm").is_null() ? std::numeric_limits<double>::infinity()
                                                        : diag.at("inv_op_norm").get<double>();
  if (f.theta.rows() != f.m1 || f.theta.cols() != f.m2 || f.gram.psi.rows() != f.m1)
    throw ParameterError("fit record dimensions inconsistent");
  return f;
}

void write_fit(const TransitionFit& fit, const fs::path& path) {
  write_text(path, fit_to_json(fit).dump(2) + "\n");
}

TransitionFit read_fit(const fs::path& path) {
  const std::vector<char> bytes = slurp(path);
  return fit_from_json(nlohmann::json::parse(bytes.begin(), bytes.end()));
}

// --- tables and grids ---------------------------------------------------------

void write_selection_csv(const SelectionResult& result, std::ostream& out) {
  out << "m1,m2,sq_norm,penalty,criterion,truncated,chosen\n";
  for (const CriterionRow& row : result.table) {
    out << row.m.m1 << ',' << row.m.m2 << ',' << format_number(row.sq_norm) << ','
        << format_number(row.penalty) << ',' << format_number(row.criterion) << ','
        << (row.truncated ? 1 : 0) << ',' << (row.m == result.chosen ? 1 : 0) << '\n';
  }
}

void write_grid_csv(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                    const Eigen::MatrixXd& values, std::ostream& out) {
  if (values.rows() != xs.size() || values.cols() != ys.size())
    throw ParameterError("grid values do not match the axes");
  out << "x/y";
  for (double y : ys) out << ',' << format_number(y);
  out << '\n';
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    out << format_number(xs[i]);
    for (Eigen::Index j = 0; j < ys.size(); ++j) out << ',' << format_number(values(i, j));
    out << '\n';
  }
}

GridData read_grid_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParameterError("empty grid file");
  const auto header = split(line, ',');
  if (header.size() < 2) throw ParameterError("grid header has no y values");
  std::vector<double> ys;
  for (std::size_t j = 1; j < header.size(); ++j) ys.push_back(parse_number(header[j]));
  std::vector<double> xs;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != header.size()) throw ParameterError("grid row has wrong length");
    xs.push_back(parse_number(fields[0]));
    std::vector<double> row;
    for (std::size_t j = 1; j < fields.size(); ++j) row.push_back(parse_number(fields[j]));
    rows.push_back(std::move(row));
  }
  GridData g{Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size())),
             Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size())),
             Eigen::MatrixXd(xs.size(), ys.size())};
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j) g.values(i, j) = rows[i][j];
  return g;
}

void write_report_csv(const ExperimentReport& report, std::ostream& out) {
  out << "rep,seed,m1,m2,sq_error,sq_mass,mise100,ax,bx,ay,by\n";
  for (const RepRecord& r : report.reps) {
    out << r.index << ',' << r.seed << ',' << r.chosen.m1 << ',' << r.chosen.m2 << ','
        << format_number(r.error) << ',' << format_number(r.mass) << ','
        << format_number(r.mise100) << ',' << format_number(r.window.ax) << ','
        << format_number(r.window.bx) << ',' << format_number(r.window.ay) << ','
        << format_number(r.window.by) << '\n';
  }
  const Aggregate& a = report.summary;
  out << "\nstatistic,mise,mean100,sd100,median100,mean_m1,mean_m2\n";
  out << "aggregate," << format_number(a.mise) << ',' << format_number(a.mean100) << ','
      << format_number(a.sd100) << ',' << format_number(a.median100) << ','
      << format_number(a.mean_m1) << ',' << format_number(a.mean_m2) << '\n';
}

nlohmann::json report_to_json(const ExperimentReport& report) {
  nlohmann::json reps = nlohmann::json::array();
  for (const RepRecord& r : report.reps) {
    reps.push_back({{"rep", r.index},
                    {"seed", r.seed},
                    {"m1", r.chosen.m1},
                    {"m2", r.chosen.m2},
                    {"sq_error", r.error},
                    {"sq_mass", r.mass},
                    {"mise100", r.mise100},
                    {"window", {r.window.ax, r.window.bx, r.window.ay, r.window.by}}});
  }
  const Aggregate& a = report.summary;
  return {{"format", "tde-report"},
          {"version", 1},
          {"config", to_config_map(report.config)},
          {"reps", reps},
          {"summary",
           {{"mise", a.mise},
            {"mean100", a.mean100},
            {"sd100", a.sd100},
            {"median100", a.median100},
            {"mean_m1", a.mean_m1},
            {"mean_m2", a.mean_m2}}}};
}

}  // namespace tde
