#include "meshforge/physical_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "meshforge/errors.hpp"

namespace meshforge {

void ErrorModel::validate(int depth) const {
  if (!(drift_sigma >= 0.0)) throw InvalidArgument("drift sigma must be non-negative");
  if (!(theta_min >= 0.0 && theta_max <= kPi && theta_min <= theta_max)) {
    throw InvalidArgument("split-ratio range must satisfy 0 <= min <= max <= pi");
  }
  if (!column_loss.empty()) {
    if (static_cast<int>(column_loss.size()) != depth) {
      throw DimensionError("column loss needs " + std::to_string(depth) + " entries");
    }
    for (double mu : column_loss) {
      if (!(mu > 0.0 && mu <= 1.0)) throw InvalidArgument("column loss must lie in (0, 1]");
    }
  }
  if (!crosstalk.empty()) {
    if (static_cast<int>(crosstalk.size()) != depth) {
      throw DimensionError("crosstalk needs " + std::to_string(depth) + " entries");
    }
    for (double c : crosstalk) {
      if (!(c >= 0.0) || !std::isfinite(c)) {
        throw InvalidArgument("crosstalk coefficients must be finite and non-negative");
      }
    }
  }
  if (!(detector_floor >= 0.0 && detector_floor < 1.0)) {
    throw InvalidArgument("detector floor must lie in [0, 1)");
  }
}

double ErrorModel::loss(int column) const {
  return column_loss.empty() ? 1.0 : column_loss[column];
}

double ErrorModel::coupling(int column) const {
  return crosstalk.empty() ? 0.0 : crosstalk[column];
}

double VoltageCurve::phase(double v) const {
  const auto& c = coefficients;
  return c[0] + v * (c[1] + v * (c[2] + v * c[3]));
}

double VoltageCurve::slope(double v) const {
  const auto& c = coefficients;
  return c[1] + v * (2.0 * c[2] + v * 3.0 * c[3]);
}

VoltageCurve random_voltage_curve(std::uint64_t seed, double v_min, double v_max) {
  std::mt19937_64 rng(seed);
  const double scale = v_max - v_min;
  std::uniform_real_distribution<double> lin(0.4, 0.6), quad(-0.005, 0.005), cub(0.0, 3e-4),
      ref(0.0, kPi);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    VoltageCurve curve;
    // coefficients drawn for a 10 V range and rescaled to the actual one
    const double k = 10.0 / scale;
    curve.coefficients = {0.0, lin(rng) * k, quad(rng) * k * k, cub(rng) * k * k * k};
    curve.reference = ref(rng);
    bool monotone = true;
    for (int i = 0; i <= 64 && monotone; ++i) {
      monotone = curve.slope(v_min + scale * i / 64.0) > 0.0;
    }
    if (monotone && curve.phase(v_max) - curve.phase(v_min) >= 1.02 * kPi) return curve;
  }
  throw InvalidArgument("could not draw a monotone drive curve");
}

PhysicalMesh::PhysicalMesh(ColumnedTopology topology, NodeVariant variant, ErrorModel errors,
                           std::uint64_t seed)
    : topology_(std::move(topology)), variant_(variant), errors_(std::move(errors)), seed_(seed) {
  topology_.validate();
  errors_.validate(topology_.depth());
  const int m = topology_.slots();
  const int l = topology_.depth();
  alpha_ = Eigen::MatrixXd::Constant(m, l, kPi);
  beta_ = Eigen::MatrixXd::Constant(m, l, kPi);
  gamma_ = Eigen::VectorXd::Zero(topology_.n);
  theta_curves_.resize(static_cast<size_t>(m * l));
  phi_curves_.resize(static_cast<size_t>(m * l));
  std::mt19937_64 seeder(seed ^ 0x9e3779b97f4a7c15ULL);
  for (int c = 0; c < l; ++c) {
    for (int s = 0; s < m; ++s) {
      theta_curves_[c * m + s] = random_voltage_curve(seeder(), drive_min_, drive_max_);
      phi_curves_[c * m + s] = random_voltage_curve(seeder(), drive_min_, drive_max_);
    }
  }
}

std::pair<double, double> PhysicalMesh::theta_range() const {
  if (variant_.kind == NodeVariant::Kind::kTunableCoupler) return variant_.theta_range();
  return {errors_.theta_min, errors_.theta_max};
}

void PhysicalMesh::check_slot(int column, int slot) const {
  if (column < 0 || column >= topology_.depth()) {
    throw IndexError("column " + std::to_string(column) + " out of range");
  }
  if (slot < 0 || slot >= topology_.columns[column].active) {
    throw IndexError("slot " + std::to_string(slot) + " is not an active node of column " +
                     std::to_string(column));
  }
}

bool PhysicalMesh::set_alpha(int column, int slot, double alpha) {
  check_slot(column, slot);
  if (!std::isfinite(alpha)) throw InvalidArgument("alpha must be finite");
  const auto [lo, hi] = theta_range();
  const double clamped = std::clamp(alpha, lo, hi);
  alpha_(slot, column) = clamped;
  return clamped != alpha;
}

void PhysicalMesh::set_beta(int column, int slot, double beta) {
  check_slot(column, slot);
  if (!std::isfinite(beta)) throw InvalidArgument("beta must be finite");
  beta_(slot, column) = wrap_phase(beta);
}

bool PhysicalMesh::set_node(int column, int slot, double alpha, double beta) {
  set_beta(column, slot, beta);
  return set_alpha(column, slot, alpha);
}

void PhysicalMesh::set_gamma(const Eigen::VectorXd& gamma) {
  if (gamma.size() != topology_.n) throw DimensionError("gamma needs one phase per output");
  gamma_ = gamma.unaryExpr([](double g) { return wrap_phase(g); });
}

void PhysicalMesh::set_settings(const MeshParams& params) {
  params.check(topology_);
  for (int l = 0; l < topology_.depth(); ++l) {
    for (int m = 0; m < topology_.columns[l].active; ++m) {
      set_node(l, m, params.theta(m, l), params.phi(m, l));
    }
  }
  set_gamma(params.gamma);
}

MeshParams PhysicalMesh::settings() const {
  MeshParams p;
  p.theta = alpha_;
  p.phi = beta_;
  p.gamma = gamma_;
  return p;
}

void PhysicalMesh::randomize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto [lo, hi] = theta_range();
  std::uniform_real_distribution<double> th(lo, hi), ph(0.0, kTwoPi);
  for (int l = 0; l < topology_.depth(); ++l) {
    for (int m = 0; m < topology_.columns[l].active; ++m) {
      alpha_(m, l) = th(rng);
      beta_(m, l) = ph(rng);
    }
  }
  for (int i = 0; i < topology_.n; ++i) gamma_[i] = ph(rng);
}

void PhysicalMesh::set_split_ratio_limit(double theta_min, double theta_max) {
  ErrorModel e = errors_;
  e.theta_min = theta_min;
  e.theta_max = theta_max;
  e.validate(topology_.depth());
  errors_ = std::move(e);
}

void PhysicalMesh::apply_crosstalk(std::vector<double> coefficients) {
  ErrorModel e = errors_;
  e.crosstalk = std::move(coefficients);
  e.validate(topology_.depth());
  errors_ = std::move(e);
}

void PhysicalMesh::set_column_loss(std::vector<double> losses) {
  ErrorModel e = errors_;
  e.column_loss = std::move(losses);
  e.validate(topology_.depth());
  errors_ = std::move(e);
}

void PhysicalMesh::set_detector_floor(double floor) {
  ErrorModel e = errors_;
  e.detector_floor = floor;
  e.validate(topology_.depth());
  errors_ = std::move(e);
}

DriftSummary PhysicalMesh::inject_drift(double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("drift sigma must be non-negative");
  DriftSummary summary;
  if (sigma == 0.0) return summary;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  const auto [lo, hi] = theta_range();
  for (int l = 0; l < topology_.depth(); ++l) {
    for (int m = 0; m < topology_.columns[l].active; ++m) {
      const double a = alpha_(m, l) + noise(rng);
      const double clamped = std::clamp(a, lo, hi);
      if (clamped != a) ++summary.clamp_events;
      alpha_(m, l) = clamped;
      beta_(m, l) = wrap_phase(beta_(m, l) + noise(rng));
    }
  }
  return summary;
}

Eigen::VectorXd PhysicalMesh::effective_theta(int column) const {
  if (column < 0 || column >= topology_.depth()) throw IndexError("column out of range");
  const int active = topology_.columns[column].active;
  const double c = errors_.coupling(column);
  Eigen::VectorXd out(active);
  for (int m = 0; m < active; ++m) {
    double neighbours = 0.0;
    if (m > 0) neighbours += alpha_(m - 1, column);
    if (m + 1 < active) neighbours += alpha_(m + 1, column);
    out[m] = alpha_(m, column) + c * neighbours;
  }
  return out;
}

void PhysicalMesh::apply_column(int column, ModeVector& v) const {
  if (column < 0 || column >= topology_.depth()) throw IndexError("column out of range");
  const Permutation& perm = topology_.columns[column].perm;
  const int active = topology_.columns[column].active;
  ModeVector routed(topology_.n);
  for (int i = 0; i < topology_.n; ++i) routed[i] = v[perm[i]];
  const Eigen::VectorXd theta = effective_theta(column);
  for (int m = 0; m < topology_.slots(); ++m) {
    const Matrix2c node = m < active ? node_matrix(theta[m], beta_(m, column), variant_)
                                     : node_matrix(kPi, kPi, variant_);
    routed.segment<2>(2 * m) = node * routed.segment<2>(2 * m);
  }
  const double mu = errors_.loss(column);
  if (mu != 1.0) routed *= mu;
  v = std::move(routed);
}

ModeVector PhysicalMesh::column_input(const ModeVector& input, int column) const {
  if (input.size() != topology_.n) throw DimensionError("input length differs from mesh size");
  if (column < 0 || column >= topology_.depth()) throw IndexError("column out of range");
  ModeVector v = input;
  for (int l = 0; l < column; ++l) apply_column(l, v);
  const Permutation& perm = topology_.columns[column].perm;
  ModeVector routed(topology_.n);
  for (int i = 0; i < topology_.n; ++i) routed[i] = v[perm[i]];
  return routed;
}

double PhysicalMesh::read_node(int column, int slot, const ModeVector& u,
                               double injected_power) const {
  check_slot(column, slot);
  const int active = topology_.columns[column].active;
  double theta = alpha_(slot, column);
  const double c = errors_.coupling(column);
  if (c != 0.0) {
    if (slot > 0) theta += c * alpha_(slot - 1, column);
    if (slot + 1 < active) theta += c * alpha_(slot + 1, column);
  }
  const Matrix2c node = node_matrix(theta, beta_(slot, column), variant_);
  const Complex bottom = node(1, 0) * u[2 * slot] + node(1, 1) * u[2 * slot + 1];
  const double mu = errors_.loss(column);
  const double fraction = mu * mu * std::norm(bottom) / injected_power;
  return fraction < errors_.detector_floor ? 0.0 : fraction;
}

std::vector<DetectorReading> PhysicalMesh::inject_and_read(const ModeVector& input,
                                                           int column) const {
  const double p_in = power(input);
  if (!(p_in > 0.0)) throw DegenerateInputError("injected input carries no power");
  const ModeVector u = column_input(input, column);
  std::vector<DetectorReading> out;
  for (int m = 0; m < topology_.columns[column].active; ++m) {
    out.push_back({m, read_node(column, m, u, p_in)});
  }
  return out;
}

TransferMatrix PhysicalMesh::matrix() const {
  TransferMatrix u(topology_.n, topology_.n);
  for (int j = 0; j < topology_.n; ++j) {
    ModeVector e = ModeVector::Unit(topology_.n, j);
    for (int l = 0; l < topology_.depth(); ++l) apply_column(l, e);
    apply_output(topology_, gamma_, e);
    u.col(j) = e;
  }
  return u;
}

void PhysicalMesh::set_drive_range(double v_min, double v_max) {
  if (!(v_min < v_max) || !std::isfinite(v_min) || !std::isfinite(v_max)) {
    throw InvalidArgument("drive range must be a finite, non-empty interval");
  }
  drive_min_ = v_min;
  drive_max_ = v_max;
}

VoltageCurve& PhysicalMesh::curve_ref(const ShifterId& id) {
  check_slot(id.column, id.slot);
  const size_t k = static_cast<size_t>(id.column * topology_.slots() + id.slot);
  return id.role == ShifterId::Role::kTheta ? theta_curves_[k] : phi_curves_[k];
}

const VoltageCurve& PhysicalMesh::hidden_curve(const ShifterId& id) const {
  return const_cast<PhysicalMesh*>(this)->curve_ref(id);
}

void PhysicalMesh::set_hidden_curve(const ShifterId& id, const VoltageCurve& curve) {
  curve_ref(id) = curve;
}

void PhysicalMesh::apply_voltage(const ShifterId& id, double volts) {
  if (!(volts >= drive_min_ && volts <= drive_max_)) {
    throw RangeError("drive voltage " + std::to_string(volts) + " outside [" +
                     std::to_string(drive_min_) + ", " + std::to_string(drive_max_) + "]");
  }
  const VoltageCurve& curve = curve_ref(id);
  const double param = 2.0 * (curve.phase(volts) + curve.reference);
  if (id.role == ShifterId::Role::kTheta) {
    alpha_(id.slot, id.column) = wrap_phase_from(param, -0.5 * kPi);
  } else {
    beta_(id.slot, id.column) = wrap_phase(param);
  }
}

void PhysicalMesh::mark_programmed(int column) {
  if (column < 0 || column > programmed_) {
    throw OrderError("column " + std::to_string(column) + " programmed before column " +
                     std::to_string(programmed_));
  }
  // reprogramming an earlier column invalidates everything downstream
  programmed_ = column + 1;
}

}  // namespace meshforge
