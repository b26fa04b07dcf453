#pragma once

#include <functional>
#include <string>
#include <vector>

#include "meshforge/errors.hpp"
#include "meshforge/nullification.hpp"
#include "meshforge/physical_mesh.hpp"

namespace meshforge {

enum class NullifyMode { kClosedForm, kSweep };

const char* to_string(NullifyMode mode);
NullifyMode nullify_mode_from_string(const std::string& name);

struct NullifyOptions {
  NullifyMode mode = NullifyMode::kClosedForm;
  // bottom power threshold relative to column input power; <= 0 picks the
  // mode default (1e-12 closed form, 1e-8 sweep)
  double tolerance = 0.0;
  // round-robin column iterations when crosstalk couples the nodes
  int max_iterations = 50;
  int grid_points = 64;
  double bracket = 1e-10;
  int max_sweep_passes = 8;
  // order in which a column's nodes are visited; empty means ascending
  std::vector<int> node_order;

  double effective_tolerance() const;
};

struct ColumnReport {
  int column = 0;
  std::vector<double> residuals;
  int iterations = 0;
  long evaluations = 0;
  std::vector<int> flagged;
  std::vector<int> phase_indeterminate;
};

struct ProgramReport {
  std::string mode;
  double tolerance = 0.0;
  std::vector<ColumnReport> columns;
  int inputs_consumed = 0;
  // filled only when the target parameters are known
  double max_alpha_error = 0.0;
  double max_beta_error = 0.0;
  double max_setting_change = 0.0;
  double fidelity_before = 0.0;
  double fidelity_after = 0.0;
  double distance_before = 0.0;
  double distance_after = 0.0;

  bool success() const;
  int flagged_count() const;
};

class NonNullifiableError : public Error {
 public:
  explicit NonNullifiableError(ProgramReport report);
  const ProgramReport& report() const { return report_; }

 private:
  ProgramReport report_;
};

/// Optional device section in front of the mesh (cascades); maps a device
/// input to the field arriving at the mesh input.
using InputStage = std::function<ModeVector(const ModeVector&)>;

/// Result of a two-parameter grid + golden-section minimization of a bottom
/// port reading f(alpha, beta).
struct SweepResult {
  double alpha = 0.0;
  double beta = 0.0;
  double reading = 0.0;
  int passes = 0;
  long evaluations = 0;
  bool phase_indeterminate = false;
};

/// Alternating beta-then-alpha sweeps starting from (alpha0, beta0). Each
/// sweep is a coarse grid followed by golden-section refinement. Runs at
/// least two passes and stops once the reading drops to `threshold`.
SweepResult sweep_minimize(const std::function<double(double, double)>& reading, double alpha0,
                           double beta0, double alpha_lo, double alpha_hi, double threshold,
                           const NullifyOptions& options = {});

/// Nullifies every node of one column with input `w` (a device input).
/// Throws OrderError if an earlier column has not been programmed.
ColumnReport nullify_column(PhysicalMesh& physical, const ModeVector& w, int column,
                            const NullifyOptions& options = {}, const InputStage& stage = {});

/// Programs all columns in order. Columns that cannot be nullified are
/// flagged and programming continues; NonNullifiableError (carrying the full
/// report) is raised at the end if any node was flagged.
ProgramReport parallel_nullify(PhysicalMesh& physical, const NullificationSet& nset,
                               const NullifyOptions& options = {}, const InputStage& stage = {});

/// parallel_nullify against known target parameters, with parameter errors
/// and phase-aligned fidelity before/after filled in.
ProgramReport program_mesh(PhysicalMesh& physical, const MeshParams& target,
                           const NullifyOptions& options = {});

/// Same, for a mesh fed through `stage` with device-level vectors `nset`.
ProgramReport program_mesh(PhysicalMesh& physical, const MeshParams& target,
                           const NullificationSet& nset, const NullifyOptions& options,
                           const InputStage& stage);

/// Adds output phases so every row of the measured operator matches the
/// target row phase. Returns the applied correction (radians, [0, 2pi)).
Eigen::VectorXd align_output_phases(PhysicalMesh& physical, const TransferMatrix& target);

}  // namespace meshforge
