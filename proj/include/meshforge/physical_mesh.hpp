#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "meshforge/mesh.hpp"

namespace meshforge {

/// Injectable hardware imperfections. Empty per-column vectors mean "none".
struct ErrorModel {
  double drift_sigma = 0.0;
  // achievable split range of MZI nodes (imperfect 50/50 splitters)
  double theta_min = 0.0;
  double theta_max = kPi;
  // amplitude transmission mu_l applied to every mode after column l
  std::vector<double> column_loss;
  // nearest-neighbour theta coupling coefficient per column
  std::vector<double> crosstalk;
  // readings below this fraction of injected power are reported as 0
  double detector_floor = 0.0;

  void validate(int depth) const;
  double loss(int column) const;
  double coupling(int column) const;
};

struct DetectorReading {
  int port = 0;  // slot index m of the node in its column
  double power = 0.0;
};

struct ShifterId {
  enum class Role { kTheta, kPhi };
  int column = 0;
  int slot = 0;
  Role role = Role::kTheta;
};

/// Hidden ground-truth drive curve: shifter phase psi(v) = c1 v + c2 v^2 +
/// c3 v^3 (c0 = 0, so v = 0 is a root) and a reference phase offset. The
/// node parameter driven by the shifter is 2 (psi(v) + reference).
struct VoltageCurve {
  std::array<double, 4> coefficients{0.0, 0.0, 0.0, 0.0};
  double reference = 0.0;

  double phase(double v) const;
  double slope(double v) const;
};

struct DriftSummary {
  int clamp_events = 0;
};

/// Simulated chip. Holds the actual node settings (alpha, beta), output
/// phases, the error model and the hidden voltage curves, and answers
/// detector queries for injected inputs. Mutations must be serialized.
class PhysicalMesh {
 public:
  explicit PhysicalMesh(ColumnedTopology topology, NodeVariant variant = {},
                        ErrorModel errors = {}, std::uint64_t seed = 0);

  const ColumnedTopology& topology() const { return topology_; }
  const NodeVariant& variant() const { return variant_; }
  const ErrorModel& error_model() const { return errors_; }
  std::uint64_t seed() const { return seed_; }

  const Eigen::MatrixXd& alpha() const { return alpha_; }
  const Eigen::MatrixXd& beta() const { return beta_; }
  const Eigen::VectorXd& gamma() const { return gamma_; }

  /// Achievable alpha interval: the coupler's own range for tunable
  /// couplers, the error model's split-ratio range otherwise.
  std::pair<double, double> theta_range() const;

  /// Sets one node; alpha is clamped into theta_range(), beta wrapped.
  /// Returns true when alpha had to be clamped.
  bool set_node(int column, int slot, double alpha, double beta);
  bool set_alpha(int column, int slot, double alpha);
  void set_beta(int column, int slot, double beta);
  void set_gamma(const Eigen::VectorXd& gamma);

  /// Writes alpha/beta/gamma directly from ideal parameters (clamped).
  void set_settings(const MeshParams& params);
  MeshParams settings() const;

  /// Uniform random alpha in theta_range(), beta and gamma in [0, 2pi).
  void randomize(std::uint64_t seed);

  void set_split_ratio_limit(double theta_min, double theta_max);
  void apply_crosstalk(std::vector<double> coefficients);
  void set_column_loss(std::vector<double> losses);
  void set_detector_floor(double floor);

  /// Adds N(0, sigma^2) to every active alpha and beta; alpha is clamped to
  /// theta_range() and each clamp is counted.
  DriftSummary inject_drift(double sigma, std::uint64_t seed);

  /// alpha_m + c (alpha_{m-1} + alpha_{m+1}) over the column's active nodes.
  Eigen::VectorXd effective_theta(int column) const;

  /// Physical action of column `column` (routing, nodes, loss) on v.
  void apply_column(int column, ModeVector& v) const;

  /// Field entering the nodes of `column` (after its routing) when `input`
  /// is injected at the device inputs.
  ModeVector column_input(const ModeVector& input, int column) const;

  /// Bottom-port power of one node for routed column input `u`, as a
  /// fraction of `injected_power`, with loss and detector floor applied.
  double read_node(int column, int slot, const ModeVector& u, double injected_power) const;

  /// Bottom-port readings of every active node of `column`.
  std::vector<DetectorReading> inject_and_read(const ModeVector& input, int column) const;

  /// Full physical operator including loss and output phases.
  TransferMatrix matrix() const;

  // -- voltage drive --------------------------------------------------------
  double drive_min() const { return drive_min_; }
  double drive_max() const { return drive_max_; }
  void set_drive_range(double v_min, double v_max);
  const VoltageCurve& hidden_curve(const ShifterId& id) const;
  void set_hidden_curve(const ShifterId& id, const VoltageCurve& curve);
  /// Drives one shifter through its hidden curve. Throws RangeError outside
  /// the drive range.
  void apply_voltage(const ShifterId& id, double volts);

  // -- programming progress -------------------------------------------------
  int programmed_columns() const { return programmed_; }
  void mark_programmed(int column);
  void reset_programming() { programmed_ = 0; }

 private:
  void check_slot(int column, int slot) const;
  VoltageCurve& curve_ref(const ShifterId& id);

  ColumnedTopology topology_;
  NodeVariant variant_;
  ErrorModel errors_;
  std::uint64_t seed_;
  Eigen::MatrixXd alpha_;
  Eigen::MatrixXd beta_;
  Eigen::VectorXd gamma_;
  double drive_min_ = 0.0;
  double drive_max_ = 10.0;
  std::vector<VoltageCurve> theta_curves_;
  std::vector<VoltageCurve> phi_curves_;
  int programmed_ = 0;
};

/// Seeded random monotone curve whose phase span over [v_min, v_max] is at
/// least pi (rejection sampled).
VoltageCurve random_voltage_curve(std::uint64_t seed, double v_min, double v_max);

}  // namespace meshforge
