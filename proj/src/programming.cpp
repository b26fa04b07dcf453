#include "meshforge/programming.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "meshforge/metrics.hpp"

namespace meshforge {

const char* to_string(NullifyMode mode) {
  return mode == NullifyMode::kSweep ? "sweep" : "closed-form";
}

NullifyMode nullify_mode_from_string(const std::string& name) {
  if (name == "closed-form") return NullifyMode::kClosedForm;
  if (name == "sweep") return NullifyMode::kSweep;
  throw InvalidArgument("unknown nullification mode '" + name + "'");
}

double NullifyOptions::effective_tolerance() const {
  if (tolerance > 0.0) return tolerance;
  return mode == NullifyMode::kSweep ? 1e-8 : 1e-12;
}

bool ProgramReport::success() const { return flagged_count() == 0; }

int ProgramReport::flagged_count() const {
  int n = 0;
  for (const auto& c : columns) n += static_cast<int>(c.flagged.size());
  return n;
}

NonNullifiableError::NonNullifiableError(ProgramReport report)
    : Error(std::to_string(report.flagged_count()) +
            " node(s) could not be nullified below the power tolerance"),
      report_(std::move(report)) {}

namespace {

constexpr double kInvPhi = 0.6180339887498949;

template <class F>
std::pair<double, double> golden_section(const F& f, double a, double b, double bracket,
                                         long& evals) {
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  evals += 2;
  while (b - a > bracket) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
    ++evals;
  }
  return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

}  // namespace

SweepResult sweep_minimize(const std::function<double(double, double)>& reading, double alpha0,
                           double beta0, double alpha_lo, double alpha_hi, double threshold,
                           const NullifyOptions& options) {
  if (!(alpha_lo <= alpha_hi)) throw InvalidArgument("empty alpha range");
  const int g = std::max(options.grid_points, 4);
  SweepResult r;
  r.alpha = std::clamp(alpha0, alpha_lo, alpha_hi);
  r.beta = wrap_phase(beta0);
  double previous = std::numeric_limits<double>::infinity();
  std::vector<double> grid(static_cast<size_t>(g));

  for (int pass = 1; pass <= std::max(options.max_sweep_passes, 2); ++pass) {
    r.passes = pass;

    // beta: periodic grid, then refine around the best sample
    const double step = kTwoPi / g;
    for (int k = 0; k < g; ++k) grid[k] = reading(r.alpha, k * step);
    r.evaluations += g;
    const auto [lo_it, hi_it] = std::minmax_element(grid.begin(), grid.end());
    const double span = *hi_it - *lo_it;
    if (!(span > 1e-13 * *hi_it)) {
      // reading does not depend on beta: phase is unconstrained
      r.beta = 0.0;
      r.phase_indeterminate = true;
    } else {
      r.phase_indeterminate = false;
      const double centre = static_cast<double>(lo_it - grid.begin()) * step;
      auto fb = [&](double b) { return reading(r.alpha, wrap_phase(b)); };
      const auto [b, fbest] =
          golden_section(fb, centre - step, centre + step, options.bracket, r.evaluations);
      r.beta = fbest <= *lo_it ? wrap_phase(b) : centre;
    }

    // alpha: bounded grid, then refine between the neighbours of the best
    if (alpha_hi > alpha_lo) {
      const double astep = (alpha_hi - alpha_lo) / (g - 1);
      for (int k = 0; k < g; ++k) grid[k] = reading(alpha_lo + k * astep, r.beta);
      r.evaluations += g;
      const int kbest = static_cast<int>(std::min_element(grid.begin(), grid.end()) - grid.begin());
      const double a_best = alpha_lo + kbest * astep;
      auto fa = [&](double a) { return reading(a, r.beta); };
      const auto [a, fbest] =
          golden_section(fa, std::max(alpha_lo, a_best - astep), std::min(alpha_hi, a_best + astep),
                         options.bracket, r.evaluations);
      r.alpha = fbest <= grid[kbest] ? a : a_best;
    }

    r.reading = reading(r.alpha, r.beta);
    ++r.evaluations;
    if (pass >= 2 && (r.reading <= threshold || r.reading >= 0.999 * previous)) break;
    previous = r.reading;
  }
  return r;
}

ColumnReport nullify_column(PhysicalMesh& physical, const ModeVector& w, int column,
                            const NullifyOptions& options, const InputStage& stage) {
  const ColumnedTopology& t = physical.topology();
  if (column < 0 || column >= t.depth()) {
    throw IndexError("column " + std::to_string(column) + " out of range");
  }
  if (column > physical.programmed_columns()) {
    throw OrderError("column " + std::to_string(column) + " requested before column " +
                     std::to_string(physical.programmed_columns()) + " was programmed");
  }
  if (w.size() != t.n) throw DimensionError("nullification vector length differs from mesh size");
  const double p_in = power(w);
  if (!(p_in > 0.0)) throw DegenerateInputError("nullification vector carries no power");

  const ModeVector x = stage ? stage(w) : w;
  const ModeVector u = physical.column_input(x, column);
  const int active = t.columns[column].active;

  std::vector<int> order = options.node_order;
  if (order.empty()) {
    order.resize(static_cast<size_t>(active));
    std::iota(order.begin(), order.end(), 0);
  } else if (!is_permutation(order, active)) {
    throw InvalidArgument("node order must be a permutation of the column's active nodes");
  }

  const double mu = physical.error_model().loss(column);
  const double threshold = options.effective_tolerance() * mu * mu * power(u) / p_in;
  const double c = physical.error_model().coupling(column);
  const Eigen::Vector2cd d = variant_input_phases(physical.variant());
  const auto [lo, hi] = physical.theta_range();

  ColumnReport report;
  report.column = column;
  report.residuals.assign(static_cast<size_t>(active), 0.0);
  std::vector<bool> indeterminate(static_cast<size_t>(active), false);

  for (;;) {
    ++report.iterations;
    for (int m : order) {
      const Complex u1 = d[0] * u[2 * m];
      const Complex u2 = d[1] * u[2 * m + 1];
      if (u1 == 0.0 && u2 == 0.0) {
        indeterminate[m] = true;
        continue;
      }
      double neighbours = 0.0;
      if (m > 0) neighbours += physical.alpha()(m - 1, column);
      if (m + 1 < active) neighbours += physical.alpha()(m + 1, column);
      if (options.mode == NullifyMode::kClosedForm) {
        const NodeSolution s = nullify_node_closed_form(u1, u2);
        physical.set_node(column, m, s.alpha - c * neighbours, s.beta);
        indeterminate[m] = s.phase_indeterminate;
        ++report.evaluations;
      } else {
        auto f = [&](double a, double b) {
          physical.set_node(column, m, a, b);
          return physical.read_node(column, m, u, p_in);
        };
        const SweepResult s =
            sweep_minimize(f, physical.alpha()(m, column), physical.beta()(m, column), lo, hi,
                           threshold, options);
        physical.set_node(column, m, s.alpha, s.beta);
        indeterminate[m] = s.phase_indeterminate;
        report.evaluations += s.evaluations;
      }
    }
    double worst = 0.0;
    for (int m = 0; m < active; ++m) {
      report.residuals[m] = physical.read_node(column, m, u, p_in);
      worst = std::max(worst, report.residuals[m]);
    }
    if (worst <= threshold || c == 0.0 || report.iterations >= options.max_iterations) break;
  }

  for (int m = 0; m < active; ++m) {
    if (report.residuals[m] > threshold) report.flagged.push_back(m);
    if (indeterminate[m]) report.phase_indeterminate.push_back(m);
  }
  physical.mark_programmed(column);
  return report;
}

ProgramReport parallel_nullify(PhysicalMesh& physical, const NullificationSet& nset,
                               const NullifyOptions& options, const InputStage& stage) {
  const ColumnedTopology& t = physical.topology();
  if (nset.size() != t.depth()) {
    throw DimensionError("nullification set has " + std::to_string(nset.size()) +
                         " vectors, mesh has " + std::to_string(t.depth()) + " columns");
  }
  ProgramReport report;
  report.mode = to_string(options.mode);
  report.tolerance = options.effective_tolerance();
  for (int l = 0; l < t.depth(); ++l) {
    report.columns.push_back(nullify_column(physical, nset.vectors[l], l, options, stage));
    ++report.inputs_consumed;
  }
  if (!report.success()) throw NonNullifiableError(std::move(report));
  return report;
}

ProgramReport program_mesh(PhysicalMesh& physical, const MeshParams& target,
                           const NullifyOptions& options) {
  target.check(physical.topology());
  return program_mesh(physical, target,
                      nullification_set(physical.topology(), target, physical.variant()), options,
                      {});
}

ProgramReport program_mesh(PhysicalMesh& physical, const MeshParams& target,
                           const NullificationSet& nset, const NullifyOptions& options,
                           const InputStage& stage) {
  const ColumnedTopology& t = physical.topology();
  target.check(t);
  const TransferMatrix u = mesh_matrix(t, target, physical.variant());

  const Eigen::MatrixXd alpha_before = physical.alpha();
  const Eigen::MatrixXd beta_before = physical.beta();
  const TransferMatrix u_before = physical.matrix();

  ProgramReport report;
  bool failed = false;
  try {
    report = parallel_nullify(physical, nset, options, stage);
  } catch (const NonNullifiableError& e) {
    report = e.report();
    failed = true;
  }

  report.fidelity_before = phase_aligned_fidelity(u, u_before);
  report.distance_before = phase_aligned_distance(u, u_before);
  const TransferMatrix u_after = physical.matrix();
  report.fidelity_after = phase_aligned_fidelity(u, u_after);
  report.distance_after = phase_aligned_distance(u, u_after);

  report.max_alpha_error = 0.0;
  report.max_beta_error = 0.0;
  report.max_setting_change = 0.0;
  for (int l = 0; l < t.depth(); ++l) {
    const Eigen::VectorXd eff = physical.effective_theta(l);
    const auto& skip = report.columns[l].phase_indeterminate;
    for (int m = 0; m < t.columns[l].active; ++m) {
      report.max_alpha_error = std::max(report.max_alpha_error, std::abs(eff[m] - target.theta(m, l)));
      if (std::find(skip.begin(), skip.end(), m) == skip.end()) {
        report.max_beta_error = std::max(
            report.max_beta_error, std::abs(phase_difference(physical.beta()(m, l), target.phi(m, l))));
      }
      report.max_setting_change =
          std::max({report.max_setting_change, std::abs(physical.alpha()(m, l) - alpha_before(m, l)),
                    std::abs(phase_difference(physical.beta()(m, l), beta_before(m, l)))});
    }
  }
  if (failed) throw NonNullifiableError(std::move(report));
  return report;
}

Eigen::VectorXd align_output_phases(PhysicalMesh& physical, const TransferMatrix& target) {
  const ColumnedTopology& t = physical.topology();
  if (target.rows() != t.n || target.cols() != t.n) {
    throw DimensionError("target matrix does not match mesh size");
  }
  const TransferMatrix measured = physical.matrix();
  Eigen::VectorXd chi(t.n);
  for (int r = 0; r < t.n; ++r) {
    const Complex overlap = measured.row(r).dot(target.row(r));
    if (std::abs(overlap) == 0.0) {
      throw DegenerateInputError("output " + std::to_string(r) + " has no overlap with the target row");
    }
    chi[r] = wrap_phase(std::arg(overlap));
  }
  Eigen::VectorXd gamma = physical.gamma() + chi;
  physical.set_gamma(gamma);
  return chi;
}

}  // namespace meshforge
