#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "meshforge/calibration.hpp"
#include "meshforge/decompose.hpp"
#include "meshforge/io.hpp"
#include "meshforge/metrics.hpp"

namespace fs = std::filesystem;
using namespace meshforge;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitDomain = 2;
constexpr int kExitInternal = 3;

struct Options {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out = ".";
  std::optional<std::string> mode;
  std::optional<std::string> arch;
  std::optional<int> n;
  std::string input;
  std::string preset;
  std::string kind = "haar";
};

void configure_logging() {
  const char* level = std::getenv("MESHFORGE_LOG");
  // stdout carries results; diagnostics go to stderr
  spdlog::set_default_logger(spdlog::stderr_color_st("meshforge"));
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
}

const char* error_type(const Error& e) {
  if (dynamic_cast<const RangeError*>(&e)) return "RangeError";
  if (dynamic_cast<const FitError*>(&e)) return "FitError";
  if (dynamic_cast<const OrderError*>(&e)) return "OrderError";
  if (dynamic_cast<const NonLinearizableError*>(&e)) return "NonLinearizableError";
  if (dynamic_cast<const NonNullifiableError*>(&e)) return "NonNullifiableError";
  if (dynamic_cast<const DegenerateInputError*>(&e)) return "DegenerateInputError";
  if (dynamic_cast<const DanglingLinkError*>(&e)) return "DanglingLinkError";
  if (dynamic_cast<const DimensionError*>(&e)) return "DimensionError";
  if (dynamic_cast<const IndexError*>(&e)) return "IndexError";
  if (dynamic_cast<const InvalidArgument*>(&e)) return "InvalidArgument";
  return "DomainError";
}

fs::path out_file(const Options& o, const std::string& name) {
  fs::create_directories(o.out);
  return fs::path(o.out) / name;
}

ExperimentConfig load_config(const Options& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : config_from_json(load_json(o.config));
  if (o.seed) c.seed = *o.seed;
  if (o.mode) {
    try {
      c.mode = nullify_mode_from_string(*o.mode);
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }
  if (o.arch) c.architecture = *o.arch;
  if (o.n) c.n = *o.n;
  if (o.out != ".") c.out = o.out;
  return c;
}

Json report_header(const ExperimentConfig& c) {
  Json echo = to_json(c);
  echo.erase("out");
  return {{"tool", "meshforge"},
          {"version", tool_version()},
          {"config_hash", config_hash(c)},
          {"config", echo}};
}

MeshParams build_target(const ExperimentConfig& c, ColumnedTopology& t, NodeVariant& variant) {
  if (c.target.kind == "params") {
    ParamsDocument doc = params_from_json(load_json(c.target.path));
    t = doc.topology;
    variant = doc.variant;
    return doc.params;
  }
  if (c.target.kind == "matrix" || c.target.kind == "haar") {
    if (t.architecture != "rectangular") {
      throw ConfigError("matrix and haar targets need the rectangular architecture");
    }
    const TransferMatrix u =
        c.target.kind == "haar" ? haar_unitary(t.n, c.seed) : load_cmx(c.target.path);
    if (u.rows() != t.n || u.cols() != t.n) throw DimensionError("target matrix size differs from n");
    return decompose_rectangular(u);
  }
  return random_phase_params(t, c.seed);
}

int cmd_compile(const Options& o) {
  ColumnedTopology t;
  if (!o.input.empty()) {
    t = compactify(netlist_from_json(load_json(o.input)));
  } else if (o.arch) {
    t = build_architecture(*o.arch, o.n.value_or(8));
  } else {
    throw ConfigError("compile needs a netlist file or --arch");
  }
  save_json(out_file(o, "topology.json"), to_json(t));
  std::cout << "depth " << t.depth() << " nodes " << node_count(t) << '\n';
  return 0;
}

int cmd_decompose(const Options& o) {
  if (o.input.empty()) throw ConfigError("decompose needs a target .cmx file");
  const TransferMatrix u = load_cmx(o.input);
  ParamsDocument doc{rectangular(static_cast<int>(u.rows())), {}, decompose_rectangular(u)};
  const double err = (mesh_matrix(doc.topology, doc.params) - u).norm();
  save_json(out_file(o, "params.json"), to_json(doc));
  std::cout << "rebuild_error " << format_double(err) << '\n';
  return 0;
}

int cmd_nullset(const Options& o) {
  ParamsDocument doc;
  if (!o.input.empty()) {
    doc = params_from_json(load_json(o.input));
  } else {
    if (o.preset.empty()) throw ConfigError("nullset needs a params file or --preset");
    doc.topology = build_architecture(o.arch.value_or("rectangular"), o.n.value_or(8));
    const std::uint64_t seed = o.seed.value_or(0);
    if (o.preset == "bar") {
      doc.params = MeshParams::bar(doc.topology);
    } else if (o.preset == "cross") {
      doc.params = cross_params(doc.topology);
    } else if (o.preset == "phase-random") {
      doc.params = random_phase_params(doc.topology, seed);
    } else if (o.preset == "haar-random") {
      if (doc.topology.architecture != "rectangular") {
        throw ConfigError("the haar-random preset needs the rectangular architecture");
      }
      doc.params = decompose_rectangular(haar_unitary(doc.topology.n, seed));
    } else {
      throw ConfigError("unknown preset '" + o.preset + "'");
    }
  }
  const NullificationSet nset = nullification_set(doc.topology, doc.params, doc.variant);
  Eigen::MatrixXcd rows(nset.size(), doc.topology.n);
  double worst = 0.0;
  for (int l = 0; l < nset.size(); ++l) {
    rows.row(l) = nset.vectors[l].transpose();
    const ModeVector p = propagate(doc.topology, doc.params, nset.vectors[l], l + 1, doc.variant);
    worst = std::max(worst, (p - nset.target_pattern).norm());
  }
  save_cmx(out_file(o, "nullset.cmx").string(), rows);
  std::ofstream csv(out_file(o, "nullset_power.csv"));
  write_power_csv(csv, nset);
  std::cout << "vectors " << nset.size() << " identity_error " << format_double(worst) << '\n';
  return 0;
}

int cmd_program(const Options& o) {
  const ExperimentConfig c = load_config(o);
  ColumnedTopology t = build_architecture(c.architecture, c.n);
  NodeVariant variant;
  variant.kind = variant_kind_from_string(c.variant);
  const MeshParams target = build_target(c, t, variant);

  PhysicalMesh physical(t, variant, c.errors, c.seed);
  if (c.initial == "random") {
    physical.randomize(c.seed + 1);
  } else {
    physical.set_settings(target);
  }
  Json out = report_header(c);
  out["architecture"] = t.architecture;
  out["n"] = t.n;
  out["depth"] = t.depth();
  out["node_count"] = node_count(t);
  out["drift"] = {{"sigma", c.errors.drift_sigma}, {"clamp_events", 0}};
  if (c.errors.drift_sigma > 0.0) {
    const DriftSummary d = physical.inject_drift(c.errors.drift_sigma, c.seed + 2);
    out["drift"]["clamp_events"] = d.clamp_events;
  }
  spdlog::info("programming {} columns in {} mode", t.depth(), to_string(c.mode));

  NullifyOptions opts;
  opts.mode = c.mode;
  int code = 0;
  ProgramReport report;
  try {
    report = program_mesh(physical, target, opts);
  } catch (const NonNullifiableError& e) {
    report = e.report();
    out["error"] = {{"type", "NonNullifiableError"}, {"message", e.what()}};
    code = kExitDomain;
  }
  const TransferMatrix u = mesh_matrix(t, target, variant);
  const Eigen::VectorXd chi = align_output_phases(physical, u);
  out["report"] = to_json(report);
  out["gamma_correction"] = std::vector<double>(chi.data(), chi.data() + chi.size());
  out["aligned_distance"] = (physical.matrix() - u).norm();
  save_json(out_file(o, "report.json"), out);
  std::cout << "fidelity_before " << format_double(report.fidelity_before) << " fidelity_after "
            << format_double(report.fidelity_after) << " flagged " << report.flagged_count() << '\n';
  if (code) std::cerr << Json{{"error", out["error"]}}.dump() << '\n';
  return code;
}

int cmd_calibrate(const Options& o) {
  const ExperimentConfig c = load_config(o);
  ColumnedTopology t = build_architecture(c.architecture, c.n);
  NodeVariant variant;
  variant.kind = variant_kind_from_string(c.variant);
  PhysicalMesh physical(t, variant, c.errors, c.seed);
  physical.set_drive_range(c.drive_min, c.drive_max);
  CalibrationOptions copt;
  copt.samples = c.calibration_samples;
  const CalibrationModel model = parallel_calibrate(physical, copt);

  double worst = 0.0;
  for (int l = 0; l < t.depth(); ++l) {
    for (int m = 0; m < t.columns[l].active; ++m) {
      for (auto role : {ShifterId::Role::kTheta, ShifterId::Role::kPhi}) {
        const ShifterId id{l, m, role};
        const VoltageCurve& truth = physical.hidden_curve(id);
        const ShifterFit& fit = model.fit(id);
        for (int k = 1; k < 4; ++k) {
          worst = std::max(worst, std::abs(fit.coefficients[k] - truth.coefficients[k]) /
                                      std::abs(truth.coefficients[k]));
        }
      }
    }
  }
  const MeshParams target = t.architecture == "rectangular"
                                ? decompose_rectangular(haar_unitary(t.n, c.seed + 3))
                                : random_phase_params(t, c.seed + 3);
  flash(physical, model, target);
  const double fid = fidelity(mesh_matrix(t, target, variant), physical.matrix());

  Json out = report_header(c);
  out["calibration"] = to_json(model);
  out["verification"] = {{"max_relative_coefficient_error", worst}, {"flash_fidelity", fid}};
  save_json(out_file(o, "calibration.json"), out);
  std::cout << "max_relative_coefficient_error " << format_double(worst) << " flash_fidelity "
            << format_double(fid) << '\n';
  return 0;
}

int cmd_random(const Options& o) {
  const int n = o.n.value_or(8);
  if (n < 2) throw ConfigError("--n must be at least 2");
  const std::uint64_t seed = o.seed.value_or(0);
  if (o.kind == "haar") {
    const TransferMatrix u = haar_unitary(n, seed);
    save_cmx(out_file(o, "haar.cmx").string(), u);
    std::cout << "unitarity_deviation " << format_double(unitarity_deviation(u)) << '\n';
  } else if (o.kind == "phase-random") {
    ParamsDocument doc;
    doc.topology = build_architecture(o.arch.value_or("rectangular"), n);
    doc.params = random_phase_params(doc.topology, seed);
    save_json(out_file(o, "params.json"), to_json(doc));
    std::cout << "nodes " << node_count(doc.topology) << '\n';
  } else {
    throw ConfigError("unknown kind '" + o.kind + "'");
  }
  return 0;
}

int cmd_speedup(const Options& o) {
  const int n = o.n.value_or(64);
  std::vector<std::string> archs = {"rectangular", "triangular", "butterfly"};
  if (o.arch) archs = {*o.arch};
  std::cout << "architecture,n,nodes,depth,ratio\n";
  for (const auto& a : archs) {
    const ColumnedTopology t = build_architecture(a, n);
    const int nodes = node_count(t);
    std::cout << a << ',' << t.n << ',' << nodes << ',' << t.depth() << ','
              << format_double(static_cast<double>(nodes) / t.depth()) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Feedforward photonic mesh compiler, programmer and simulator"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "RNG seed");
    sub->add_option("--out", o.out, "output directory");
  };
  auto arch_n = [&](CLI::App* sub) {
    sub->add_option("--arch", o.arch,
                    "rectangular | triangular | butterfly | netlist:<path>");
    sub->add_option("--n", o.n, "number of modes");
  };

  auto* compile = app.add_subcommand("compile", "compactify a netlist into columns");
  compile->add_option("netlist", o.input, "netlist JSON");
  common(compile);
  arch_n(compile);

  auto* decompose = app.add_subcommand("decompose", "rectangular-mesh parameters for a unitary");
  decompose->add_option("target", o.input, "target matrix (.cmx)")->required();
  common(decompose);

  auto* nullset = app.add_subcommand("nullset", "nullification set and power map");
  nullset->add_option("params", o.input, "params JSON");
  nullset->add_option("--preset", o.preset, "bar | cross | phase-random | haar-random");
  common(nullset);
  arch_n(nullset);

  auto* program = app.add_subcommand("program", "program a simulated mesh by nullification");
  auto* calibrate = app.add_subcommand("calibrate", "calibrate a simulated mesh's drive curves");
  for (auto* sub : {program, calibrate}) {
    sub->add_option("--config", o.config, "experiment config JSON");
    sub->add_option("--mode", o.mode, "closed-form | sweep")
        ->check(CLI::IsMember({"closed-form", "sweep"}));
    common(sub);
    arch_n(sub);
  }

  auto* random = app.add_subcommand("random", "random unitary or phase settings");
  random->add_option("--kind", o.kind, "haar | phase-random")
      ->check(CLI::IsMember({"haar", "phase-random"}));
  common(random);
  arch_n(random);

  auto* speedup = app.add_subcommand("speedup", "sequential vs parallel programming steps");
  arch_n(speedup);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*compile) return cmd_compile(o);
    if (*decompose) return cmd_decompose(o);
    if (*nullset) return cmd_nullset(o);
    if (*program) return cmd_program(o);
    if (*calibrate) return cmd_calibrate(o);
    if (*random) return cmd_random(o);
    if (*speedup) return cmd_speedup(o);
  } catch (const ParseError& e) {
    std::cerr << Json{{"error", {{"type", "ParseError"}, {"message", e.what()}}}}.dump() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << Json{{"error", {{"type", "ConfigError"}, {"message", e.what()}}}}.dump() << '\n';
    return kExitUsage;
  } catch (const CycleError& e) {
    std::cerr << Json{{"error", {{"type", "CycleError"}, {"message", e.what()}, {"nodes", e.nodes()}}}}
                     .dump()
              << '\n';
    return kExitDomain;
  } catch (const NonUnitaryError& e) {
    std::cerr << Json{{"error",
                       {{"type", "NonUnitaryError"}, {"message", e.what()}, {"deviation", e.deviation()}}}}
                     .dump()
              << '\n';
    return kExitDomain;
  } catch (const Error& e) {
    std::cerr << Json{{"error", {{"type", error_type(e)}, {"message", e.what()}}}}.dump() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", {{"type", "InternalError"}, {"message", e.what()}}}}.dump() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
