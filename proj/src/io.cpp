#include "meshforge/io.hpp"

#include <cmath>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace meshforge {

std::string tool_version() { return MESHFORGE_VERSION; }

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_cmx(std::ostream& os, const Eigen::MatrixXcd& m) {
  os << "CMX " << m.rows() << ' ' << m.cols() << '\n';
  char buf[96];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g", m(r, c).real(), m(r, c).imag());
      os << (c ? "  " : "") << buf;
    }
    os << '\n';
  }
}

namespace {

double parse_double(const std::string& token) {
  double x = 0.0;
  const char* end = token.data() + token.size();
  const auto res = std::from_chars(token.data(), end, x);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(x)) {
    throw ParseError("not a finite number: '" + token + "'");
  }
  return x;
}

}  // namespace

Eigen::MatrixXcd read_cmx(std::istream& is) {
  std::string magic;
  long rows = -1;
  long cols = -1;
  if (!(is >> magic >> rows >> cols) || magic != "CMX" || rows < 0 || cols < 0) {
    throw ParseError("expected header 'CMX <rows> <cols>'");
  }
  Eigen::MatrixXcd m(rows, cols);
  std::string re;
  std::string im;
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      if (!(is >> re >> im)) {
        throw ParseError("matrix data ends early at entry (" + std::to_string(r) + ", " +
                         std::to_string(c) + ")");
      }
      m(r, c) = Complex(parse_double(re), parse_double(im));
    }
  }
  std::string extra;
  if (is >> extra) throw ParseError("unexpected trailing data '" + extra + "'");
  return m;
}

void save_cmx(const std::string& path, const Eigen::MatrixXcd& m) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot write " + path);
  write_cmx(os, m);
}

Eigen::MatrixXcd load_cmx(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot read " + path);
  return read_cmx(is);
}

Json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot read " + path);
  try {
    return Json::parse(is);
  } catch (const Json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_json(const std::string& path, const Json& j) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot write " + path);
  os << j.dump(2) << '\n';
}

namespace {

template <class T>
T get(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ParseError(std::string("key '") + key + "' has the wrong type");
  }
}

void require_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

Json matrix_columns(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Json col = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) col.push_back(m(r, c));
    out.push_back(std::move(col));
  }
  return out;
}

Eigen::MatrixXd columns_matrix(const Json& j, int rows, const char* name) {
  if (!j.is_array()) throw ParseError(std::string(name) + " must be an array of columns");
  Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(j.size()));
  for (size_t c = 0; c < j.size(); ++c) {
    if (!j[c].is_array() || static_cast<int>(j[c].size()) != rows) {
      throw ParseError(std::string(name) + " column " + std::to_string(c) + " must hold " +
                       std::to_string(rows) + " numbers");
    }
    for (int r = 0; r < rows; ++r) m(r, static_cast<Eigen::Index>(c)) = j[c][r].get<double>();
  }
  return m;
}

}  // namespace

Json to_json(const Netlist& netlist) {
  Json couplings = Json::array();
  for (const auto& c : netlist.couplings) {
    couplings.push_back({{"id", c.node_id},
                         {"in", {c.in_top, c.in_bottom}},
                         {"out", {c.out_top, c.out_bottom}}});
  }
  return {{"n_inputs", netlist.n_inputs}, {"couplings", couplings}, {"outputs", netlist.outputs}};
}

Netlist netlist_from_json(const Json& j) {
  Netlist n;
  n.n_inputs = get<int>(j, "n_inputs");
  n.outputs = get<std::vector<int>>(j, "outputs");
  for (const auto& c : get<Json>(j, "couplings")) {
    const auto in = get<std::vector<int>>(c, "in");
    const auto out = get<std::vector<int>>(c, "out");
    if (in.size() != 2 || out.size() != 2) throw ParseError("a coupling needs two inputs and two outputs");
    n.couplings.push_back({get<int>(c, "id"), in[0], in[1], out[0], out[1]});
  }
  return n;
}

Json to_json(const ColumnedTopology& t) {
  Json columns = Json::array();
  for (int l = 0; l < t.depth(); ++l) {
    columns.push_back({{"perm", t.columns[l].perm},
                       {"active", t.columns[l].active},
                       {"nodes", t.node_labels[l]}});
  }
  return {{"n", t.n},
          {"architecture", t.architecture},
          {"depth", t.depth()},
          {"node_count", node_count(t)},
          {"columns", columns},
          {"final_perm", t.final_perm}};
}

ColumnedTopology topology_from_json(const Json& j) {
  ColumnedTopology t;
  t.n = get<int>(j, "n");
  t.architecture = j.value("architecture", std::string("netlist"));
  for (const auto& c : get<Json>(j, "columns")) {
    t.columns.push_back({get<Permutation>(c, "perm"), get<int>(c, "active")});
    t.node_labels.push_back(get<std::vector<int>>(c, "nodes"));
  }
  t.final_perm = get<Permutation>(j, "final_perm");
  try {
    t.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid topology: ") + e.what());
  }
  return t;
}

Json to_json(const ParamsDocument& doc) {
  return {{"architecture", doc.topology.architecture},
          {"n", doc.topology.n},
          {"variant", to_string(doc.variant.kind)},
          {"theta", matrix_columns(doc.params.theta)},
          {"phi", matrix_columns(doc.params.phi)},
          {"gamma", std::vector<double>(doc.params.gamma.data(),
                                        doc.params.gamma.data() + doc.params.gamma.size())},
          {"topology", to_json(doc.topology)}};
}

ParamsDocument params_from_json(const Json& j) {
  ParamsDocument doc;
  doc.topology = topology_from_json(get<Json>(j, "topology"));
  try {
    doc.variant.kind = variant_kind_from_string(j.value("variant", std::string("standard")));
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
  const int m = doc.topology.slots();
  doc.params.theta = columns_matrix(get<Json>(j, "theta"), m, "theta");
  doc.params.phi = columns_matrix(get<Json>(j, "phi"), m, "phi");
  const auto gamma = get<std::vector<double>>(j, "gamma");
  doc.params.gamma = Eigen::Map<const Eigen::VectorXd>(gamma.data(), static_cast<Eigen::Index>(gamma.size()));
  try {
    doc.params.check(doc.topology);
  } catch (const DimensionError& e) {
    throw ParseError(e.what());
  }
  return doc;
}

Json to_json(const ErrorModel& e) {
  return {{"drift_sigma", e.drift_sigma},
          {"theta_min", e.theta_min},
          {"theta_max", e.theta_max},
          {"column_loss", e.column_loss},
          {"crosstalk", e.crosstalk},
          {"detector_floor", e.detector_floor}};
}

ErrorModel error_model_from_json(const Json& j) {
  require_keys(j, {"drift_sigma", "theta_min", "theta_max", "column_loss", "crosstalk", "detector_floor"},
               "error_model");
  ErrorModel e;
  try {
    e.drift_sigma = j.value("drift_sigma", 0.0);
    e.theta_min = j.value("theta_min", 0.0);
    e.theta_max = j.value("theta_max", kPi);
    e.column_loss = j.value("column_loss", std::vector<double>{});
    e.crosstalk = j.value("crosstalk", std::vector<double>{});
    e.detector_floor = j.value("detector_floor", 0.0);
  } catch (const Json::exception&) {
    throw ConfigError("error_model has a value of the wrong type");
  }
  return e;
}

Json to_json(const ProgramReport& r) {
  Json columns = Json::array();
  for (const auto& c : r.columns) {
    columns.push_back({{"column", c.column},
                       {"residuals", c.residuals},
                       {"iterations", c.iterations},
                       {"evaluations", c.evaluations},
                       {"flagged", c.flagged},
                       {"phase_indeterminate", c.phase_indeterminate}});
  }
  return {{"mode", r.mode},
          {"tolerance", r.tolerance},
          {"inputs_consumed", r.inputs_consumed},
          {"success", r.success()},
          {"flagged_nodes", r.flagged_count()},
          {"max_alpha_error", r.max_alpha_error},
          {"max_beta_error", r.max_beta_error},
          {"max_setting_change", r.max_setting_change},
          {"fidelity_before", r.fidelity_before},
          {"fidelity_after", r.fidelity_after},
          {"distance_before", r.distance_before},
          {"distance_after", r.distance_after},
          {"columns", columns}};
}

Json to_json(const CalibrationModel& m) {
  Json shifters = Json::array();
  for (size_t l = 0; l < m.theta.size(); ++l) {
    for (size_t s = 0; s < m.theta[l].size(); ++s) {
      for (const char* role : {"theta", "phi"}) {
        const ShifterFit& f = std::string(role) == "theta" ? m.theta[l][s] : m.phi[l][s];
        shifters.push_back({{"column", l},
                            {"slot", s},
                            {"role", role},
                            {"coefficients", f.coefficients},
                            {"reference", f.reference},
                            {"rms_residual", f.rms_residual}});
      }
    }
  }
  return {{"samples", m.samples}, {"v_min", m.v_min}, {"v_max", m.v_max}, {"shifters", shifters}};
}

CalibrationModel calibration_from_json(const Json& j) {
  CalibrationModel m;
  m.samples = get<int>(j, "samples");
  m.v_min = get<double>(j, "v_min");
  m.v_max = get<double>(j, "v_max");
  for (const auto& s : get<Json>(j, "shifters")) {
    const size_t l = get<size_t>(s, "column");
    const size_t slot = get<size_t>(s, "slot");
    const std::string role = get<std::string>(s, "role");
    if (role != "theta" && role != "phi") throw ParseError("unknown shifter role '" + role + "'");
    auto& table = role == "theta" ? m.theta : m.phi;
    if (table.size() <= l) table.resize(l + 1);
    if (table[l].size() <= slot) table[l].resize(slot + 1);
    ShifterFit& f = table[l][slot];
    f.coefficients = get<std::array<double, 4>>(s, "coefficients");
    f.reference = get<double>(s, "reference");
    f.rms_residual = s.value("rms_residual", 0.0);
    f.v_min = m.v_min;
    f.v_max = m.v_max;
  }
  return m;
}

void write_power_csv(std::ostream& os, const NullificationSet& nset) {
  const int n = nset.size() ? static_cast<int>(nset.vectors.front().size()) : 0;
  os << "column";
  for (int i = 0; i < n; ++i) os << ",mode" << i;
  os << '\n';
  for (int l = 0; l < nset.size(); ++l) {
    os << l;
    for (int i = 0; i < n; ++i) os << ',' << format_double(std::norm(nset.vectors[l][i]));
    os << '\n';
  }
}

ExperimentConfig config_from_json(const Json& j) {
  require_keys(j, {"architecture", "n", "seed", "mode", "variant", "target", "initial", "error_model",
                   "calibration", "out"},
               "config");
  ExperimentConfig c;
  try {
    c.architecture = j.value("architecture", c.architecture);
    c.n = j.value("n", c.n);
    c.seed = j.value("seed", c.seed);
    c.mode = nullify_mode_from_string(j.value("mode", std::string("closed-form")));
    c.variant = j.value("variant", c.variant);
    variant_kind_from_string(c.variant);
    c.initial = j.value("initial", c.initial);
    c.out = j.value("out", c.out);
    if (j.contains("target")) {
      const Json& t = j.at("target");
      require_keys(t, {"kind", "path"}, "target");
      c.target.kind = t.value("kind", c.target.kind);
      c.target.path = t.value("path", std::string());
    }
    if (j.contains("error_model")) c.errors = error_model_from_json(j.at("error_model"));
    if (j.contains("calibration")) {
      const Json& k = j.at("calibration");
      require_keys(k, {"samples", "drive_min", "drive_max"}, "calibration");
      c.calibration_samples = k.value("samples", c.calibration_samples);
      c.drive_min = k.value("drive_min", c.drive_min);
      c.drive_max = k.value("drive_max", c.drive_max);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config value has the wrong type: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  static const std::set<std::string> kinds = {"haar", "phase-random", "params", "matrix"};
  if (!kinds.count(c.target.kind)) throw ConfigError("unknown target kind '" + c.target.kind + "'");
  if ((c.target.kind == "params" || c.target.kind == "matrix") && c.target.path.empty()) {
    throw ConfigError("target kind '" + c.target.kind + "' needs a path");
  }
  if (c.initial != "random" && c.initial != "target") {
    throw ConfigError("initial must be 'random' or 'target'");
  }
  if (c.n < 2) throw ConfigError("n must be at least 2");
  if (c.calibration_samples < 256) throw ConfigError("calibration needs at least 256 samples");
  if (!(c.drive_min < c.drive_max)) throw ConfigError("drive range is empty");
  return c;
}

Json to_json(const ExperimentConfig& c) {
  return {{"architecture", c.architecture},
          {"n", c.n},
          {"seed", c.seed},
          {"mode", to_string(c.mode)},
          {"variant", c.variant},
          {"target", {{"kind", c.target.kind}, {"path", c.target.path}}},
          {"initial", c.initial},
          {"error_model", to_json(c.errors)},
          {"calibration",
           {{"samples", c.calibration_samples}, {"drive_min", c.drive_min}, {"drive_max", c.drive_max}}},
          {"out", c.out}};
}

std::string config_hash(const ExperimentConfig& c) {
  // the output directory is where results go, not part of the experiment
  Json canonical = to_json(c);
  canonical.erase("out");
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canonical.dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

ColumnedTopology build_architecture(const std::string& arch, int n) {
  if (arch == "rectangular") return rectangular(n);
  if (arch == "triangular") return triangular(n);
  if (arch == "butterfly") return butterfly(n);
  if (arch.rfind("netlist:", 0) == 0) return compactify(netlist_from_json(load_json(arch.substr(8))));
  throw ConfigError("unknown architecture '" + arch + "'");
}

}  // namespace meshforge
