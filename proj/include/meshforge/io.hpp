#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "meshforge/calibration.hpp"
#include "meshforge/programming.hpp"

namespace meshforge {

using Json = nlohmann::json;

std::string tool_version();

// -- complex matrix text files ("CMX rows cols", then "re im" pairs) --------
void write_cmx(std::ostream& os, const Eigen::MatrixXcd& m);
Eigen::MatrixXcd read_cmx(std::istream& is);
void save_cmx(const std::string& path, const Eigen::MatrixXcd& m);
Eigen::MatrixXcd load_cmx(const std::string& path);

/// Shortest representation that parses back to the same double.
std::string format_double(double x);

// -- JSON ------------------------------------------------------------------
Json to_json(const Netlist& netlist);
Netlist netlist_from_json(const Json& j);

Json to_json(const ColumnedTopology& t);
ColumnedTopology topology_from_json(const Json& j);

/// Parameters plus the topology and node variant they belong to.
struct ParamsDocument {
  ColumnedTopology topology;
  NodeVariant variant;
  MeshParams params;
};
Json to_json(const ParamsDocument& doc);
ParamsDocument params_from_json(const Json& j);

Json to_json(const ErrorModel& e);
ErrorModel error_model_from_json(const Json& j);

Json to_json(const ProgramReport& r);
Json to_json(const CalibrationModel& m);
CalibrationModel calibration_from_json(const Json& j);

Json load_json(const std::string& path);
void save_json(const std::string& path, const Json& j);

/// |w_ln|^2 grid, one row per column l.
void write_power_csv(std::ostream& os, const NullificationSet& nset);

// -- experiment configuration ------------------------------------------------
struct TargetSpec {
  std::string kind = "haar";  // haar | phase-random | params | matrix
  std::string path;
};

struct ExperimentConfig {
  std::string architecture = "rectangular";  // or netlist:<path>
  int n = 8;
  std::uint64_t seed = 0;
  NullifyMode mode = NullifyMode::kClosedForm;
  std::string variant = "standard";
  TargetSpec target;
  std::string initial = "random";  // random | target
  ErrorModel errors;
  int calibration_samples = 256;
  double drive_min = 0.0;
  double drive_max = 10.0;
  std::string out = ".";
};

/// Strict parse: unknown keys, wrong types and out-of-range values raise
/// ConfigError.
ExperimentConfig config_from_json(const Json& j);
Json to_json(const ExperimentConfig& c);

/// FNV-1a 64 over the canonical JSON dump without `out`, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

/// Builds the topology named by an architecture string.
ColumnedTopology build_architecture(const std::string& arch, int n);

}  // namespace meshforge
