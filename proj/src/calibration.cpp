#include "meshforge/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "meshforge/errors.hpp"

namespace meshforge {

double ShifterFit::phase(double v) const {
  const auto& c = coefficients;
  return c[0] + v * (c[1] + v * (c[2] + v * c[3]));
}

double ShifterFit::voltage_for(double param) const {
  const double target = 0.5 * param;
  const double lo = phase(v_min) + reference;
  const double hi = phase(v_max) + reference;
  const double k = std::ceil((lo - target) / kPi);
  const double x = target + k * kPi;
  if (x > hi) {
    throw RangeError("calibrated drive range cannot reach parameter " + std::to_string(param));
  }
  double a = v_min;
  double b = v_max;
  for (int i = 0; i < 200 && b - a > 1e-15 * (1.0 + std::abs(b)); ++i) {
    const double mid = 0.5 * (a + b);
    (phase(mid) + reference < x ? a : b) = mid;
  }
  return 0.5 * (a + b);
}

const ShifterFit& CalibrationModel::fit(const ShifterId& id) const {
  const auto& table = id.role == ShifterId::Role::kTheta ? theta : phi;
  if (id.column < 0 || id.column >= static_cast<int>(table.size()) || id.slot < 0 ||
      id.slot >= static_cast<int>(table[id.column].size())) {
    throw IndexError("no calibration for shifter at column " + std::to_string(id.column) +
                     ", slot " + std::to_string(id.slot));
  }
  return table[id.column][id.slot];
}

ShifterFit fit_transmissivity(const std::vector<double>& volts, const std::vector<double>& t,
                              double min_span, double max_rms) {
  const size_t n = volts.size();
  if (n != t.size() || n < 8) throw FitError("need at least 8 paired sweep samples");

  std::vector<double> y(n);
  for (size_t k = 0; k < n; ++k) {
    const double tk = std::clamp(t[k], 0.0, 1.0);
    y[k] = std::atan2(std::sqrt(tk), std::sqrt(1.0 - tk));
  }
  // candidate x = +-y + j pi closest to `predict`
  const auto nearest = [&](size_t k, double predict) {
    double best = 0.0;
    double dist = INFINITY;
    const double j0 = std::floor(predict / kPi);
    for (double j = j0 - 1; j <= j0 + 2; ++j) {
      for (double cand : {j * kPi + y[k], j * kPi - y[k]}) {
        if (std::abs(cand - predict) < dist) {
          dist = std::abs(cand - predict);
          best = cand;
        }
      }
    }
    return best;
  };
  // unwrap assuming x(v) increases: take the smallest non-negative advance
  std::vector<double> x(n);
  x[0] = y[1] >= y[0] ? y[0] : kPi - y[0];
  for (size_t k = 1; k < n; ++k) {
    double best = INFINITY;
    const double j0 = std::floor(x[k - 1] / kPi);
    for (double j = j0; j <= j0 + 1; ++j) {
      for (double cand : {j * kPi + y[k], (j + 1) * kPi - y[k]}) {
        if (cand >= x[k - 1] && cand < best) best = cand;
      }
    }
    x[k] = best;
  }
  const double span = x[n - 1] - x[0];
  if (span < min_span) {
    throw RangeError("drive range covers a phase span of " + std::to_string(span) +
                     " rad, need " + std::to_string(min_span));
  }

  // weighted least squares on a scaled voltage axis; samples near T = 0 or 1
  // carry little phase information
  const double scale = std::max(std::abs(volts.front()), std::abs(volts.back()));
  const auto solve = [&] {
    Eigen::MatrixXd a(n, 4);
    Eigen::VectorXd b(n);
    for (size_t k = 0; k < n; ++k) {
      const double w = std::abs(std::sin(2.0 * x[k])) + 1e-6;
      const double s = volts[k] / scale;
      a(k, 0) = w;
      a(k, 1) = w * s;
      a(k, 2) = w * s * s;
      a(k, 3) = w * s * s * s;
      b[k] = w * x[k];
    }
    return Eigen::Vector4d(a.colPivHouseholderQr().solve(b));
  };
  Eigen::Vector4d beta = solve();
  // samples right at an extremum can land on the wrong branch; re-pick them
  // against the first fit and solve again
  for (size_t k = 0; k < n; ++k) {
    const double s = volts[k] / scale;
    x[k] = nearest(k, beta[0] + s * (beta[1] + s * (beta[2] + s * beta[3])));
  }
  beta = solve();

  ShifterFit fit;
  fit.coefficients = {0.0, beta[1] / scale, beta[2] / (scale * scale),
                      beta[3] / (scale * scale * scale)};
  fit.reference = beta[0] - std::floor(beta[0] / kPi) * kPi;
  fit.v_min = volts.front();
  fit.v_max = volts.back();

  double ss = 0.0;
  for (size_t k = 0; k < n; ++k) {
    const double r = beta[0] + fit.phase(volts[k]) - x[k];
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(n));
  if (!(fit.rms_residual < max_rms)) {
    throw FitError("cubic fit residual " + std::to_string(fit.rms_residual) + " rad exceeds " +
                   std::to_string(max_rms));
  }
  const auto& c = fit.coefficients;
  for (int i = 0; i <= 256; ++i) {
    const double v = fit.v_min + (fit.v_max - fit.v_min) * i / 256.0;
    if (!(c[1] + v * (2.0 * c[2] + 3.0 * c[3] * v) > 0.0)) {
      throw FitError("fitted drive curve is not monotone");
    }
  }
  return fit;
}

namespace {

// Device input that delivers `routed` at the nodes of `column` when every
// earlier column is in the bar state.
ModeVector input_through_bar(const PhysicalMesh& physical, const ModeVector& routed, int column) {
  const ColumnedTopology& t = physical.topology();
  const MeshParams bar = MeshParams::bar(t);
  ModeVector v(t.n);
  const Permutation& perm = t.columns[column].perm;
  for (int i = 0; i < t.n; ++i) v[perm[i]] = routed[i];
  for (int l = column - 1; l >= 0; --l) apply_column_adjoint(t, bar, l, v, physical.variant());
  return v;
}

}  // namespace

CalibrationModel parallel_calibrate(PhysicalMesh& physical, const CalibrationOptions& options) {
  if (options.samples < 256) throw InvalidArgument("calibration needs at least 256 samples");
  const ColumnedTopology& t = physical.topology();
  CalibrationModel model;
  model.samples = options.samples;
  model.v_min = physical.drive_min();
  model.v_max = physical.drive_max();
  model.theta.resize(static_cast<size_t>(t.depth()));
  model.phi.resize(static_cast<size_t>(t.depth()));

  std::vector<double> volts(static_cast<size_t>(options.samples));
  for (int k = 0; k < options.samples; ++k) {
    volts[k] = model.v_min + (model.v_max - model.v_min) * k / (options.samples - 1.0);
  }
  const Eigen::Vector2cd d = variant_input_phases(physical.variant());
  using Role = ShifterId::Role;

  for (int l = 0; l < t.depth(); ++l) {
    if (l > 0) {
      const int prev = l - 1;
      for (int m = 0; m < t.columns[prev].active; ++m) {
        physical.apply_voltage({prev, m, Role::kTheta},
                               model.theta[prev][m].voltage_for(kPi));
        physical.apply_voltage({prev, m, Role::kPhi}, model.phi[prev][m].voltage_for(kPi));
      }
    }
    const int active = t.columns[l].active;

    // step a: every node sees (1, 0); top transmissivity is sin^2 of the theta phase
    ModeVector routed = ModeVector::Zero(t.n);
    for (int m = 0; m < active; ++m) routed[2 * m] = 1.0;
    ModeVector input = input_through_bar(physical, routed, l);
    std::vector<std::vector<double>> trace(static_cast<size_t>(active));
    for (double v : volts) {
      for (int m = 0; m < active; ++m) physical.apply_voltage({l, m, Role::kTheta}, v);
      const auto readings = physical.inject_and_read(input, l);
      for (int m = 0; m < active; ++m) trace[m].push_back(1.0 - readings[m].power * active);
    }
    for (int m = 0; m < active; ++m) {
      model.theta[l].push_back(fit_transmissivity(volts, trace[m], 0.5 * kPi, options.max_rms));
      physical.apply_voltage({l, m, Role::kTheta}, model.theta[l][m].voltage_for(0.5 * kPi));
    }

    // step b: theta = pi/2, every node sees (1, 1) in its own phase convention
    routed.setZero();
    for (int m = 0; m < active; ++m) {
      routed[2 * m] = std::conj(d[0]);
      routed[2 * m + 1] = std::conj(d[1]);
    }
    input = input_through_bar(physical, routed, l);
    for (auto& tr : trace) tr.clear();
    for (double v : volts) {
      for (int m = 0; m < active; ++m) physical.apply_voltage({l, m, Role::kPhi}, v);
      const auto readings = physical.inject_and_read(input, l);
      for (int m = 0; m < active; ++m) trace[m].push_back(readings[m].power * active);
    }
    for (int m = 0; m < active; ++m) {
      model.phi[l].push_back(fit_transmissivity(volts, trace[m], kPi, options.max_rms));
    }
  }
  return model;
}

void flash(PhysicalMesh& physical, const CalibrationModel& model, const MeshParams& target) {
  const ColumnedTopology& t = physical.topology();
  target.check(t);
  using Role = ShifterId::Role;
  for (int l = 0; l < t.depth(); ++l) {
    for (int m = 0; m < t.columns[l].active; ++m) {
      physical.apply_voltage({l, m, Role::kTheta}, model.fit({l, m, Role::kTheta}).voltage_for(target.theta(m, l)));
      physical.apply_voltage({l, m, Role::kPhi}, model.fit({l, m, Role::kPhi}).voltage_for(target.phi(m, l)));
    }
  }
  physical.set_gamma(target.gamma);
}

}  // namespace meshforge
