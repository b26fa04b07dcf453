#pragma once

#include <array>
#include <vector>

#include "meshforge/physical_mesh.hpp"

namespace meshforge {

/// Fitted drive curve of one shifter. The node parameter produced at drive
/// v is 2 (phase(v) + reference) with phase(v) = sum_k c_k v^k and c_0 = 0.
struct ShifterFit {
  std::array<double, 4> coefficients{0.0, 0.0, 0.0, 0.0};
  double reference = 0.0;  // in [0, pi)
  double rms_residual = 0.0;
  double v_min = 0.0;
  double v_max = 0.0;

  double phase(double v) const;
  /// Drive voltage that produces node parameter `param` (mod 2pi). Throws
  /// RangeError when the fitted curve cannot reach it.
  double voltage_for(double param) const;
};

struct CalibrationModel {
  int samples = 0;
  double v_min = 0.0;
  double v_max = 0.0;
  // [column][slot], active slots only
  std::vector<std::vector<ShifterFit>> theta;
  std::vector<std::vector<ShifterFit>> phi;

  const ShifterFit& fit(const ShifterId& id) const;
};

struct CalibrationOptions {
  int samples = 256;
  double max_rms = 1e-3;
};

/// Fits a monotone cubic to transmissivity samples T_k = sin^2(x(v_k))
/// after unwrapping x. Throws FitError or RangeError (`min_span` is the
/// smallest acceptable phase excursion of x over the sweep).
ShifterFit fit_transmissivity(const std::vector<double>& volts, const std::vector<double>& t,
                              double min_span, double max_rms);

/// Column-by-column calibration through the detectors: earlier columns are
/// flashed to bar, theta shifters are swept with every node fed (1, 0), then
/// theta is set to pi/2 and phi shifters are swept with (1, 1). Assumes a
/// lossless, crosstalk-free chip.
CalibrationModel parallel_calibrate(PhysicalMesh& physical, const CalibrationOptions& options = {});

/// Drives every active shifter to the target via the calibration; output
/// phases are written directly.
void flash(PhysicalMesh& physical, const CalibrationModel& model, const MeshParams& target);

}  // namespace meshforge
