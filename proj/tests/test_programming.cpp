#include <random>

#include "helpers.hpp"
#include "meshforge/cascade.hpp"
#include "meshforge/decompose.hpp"
#include "meshforge/metrics.hpp"

using namespace meshforge;

namespace {

MeshParams haar_params(int n, std::uint64_t seed) { return decompose_rectangular(haar_unitary(n, seed)); }

double max_identity_error(const ColumnedTopology& t, const MeshParams& p, const NodeVariant& v = {}) {
  const NullificationSet nset = nullification_set(t, p, v);
  double worst = 0.0;
  for (int l = 0; l < t.depth(); ++l) {
    worst = std::max(worst, (propagate(t, p, nset.vectors[l], l + 1, v) - nset.target_pattern).norm());
  }
  return worst;
}

}  // namespace

TEST_SUITE("programming") {

TEST_CASE("target vector") {
  CHECK(target_vector(4) == ModeVector((ModeVector(4) << 1, 0, 1, 0).finished()));
  CHECK(target_vector(5) == ModeVector((ModeVector(5) << 1, 0, 1, 0, 0).finished()));
  CHECK(target_vector(2) == ModeVector((ModeVector(2) << 1, 0).finished()));
}

TEST_CASE("nullification vectors") {
  SUBCASE("single bar column undoes the bar phases") {
    const ColumnedTopology t = rectangular(4);
    const MeshParams bar = MeshParams::bar(t);
    const ModeVector w = nullification_vector(t, bar, 0);
    CHECK((w.cwiseAbs() - target_vector(4).cwiseAbs()).norm() < 1e-15);
    CHECK(std::abs(w[0] - kI) < 1e-15);
  }
  SUBCASE("defining identity on every architecture and variant") {
    for (const auto& t : {rectangular(8), rectangular(7), triangular(6), butterfly(16)}) {
      for (const auto& v : {NodeVariant::standard(), NodeVariant::tunable_coupler()}) {
        CHECK(max_identity_error(t, random_phase_params(t, 21), v) < 1e-10);
      }
    }
    for (std::uint64_t s = 0; s < 20; ++s) {
      const ColumnedTopology t = compactify(random_dag_netlist(3 + static_cast<int>(s % 8), 4 + static_cast<int>(s), s));
      CHECK(max_identity_error(t, random_phase_params(t, s)) < 1e-10);
    }
  }
  SUBCASE("vectors carry the target power") {
    const ColumnedTopology t = rectangular(9);
    const NullificationSet nset = nullification_set(t, random_phase_params(t, 2));
    for (const auto& w : nset.vectors) CHECK(std::abs(power(w) - 4.0) < 1e-12);
  }
  SUBCASE("one vector per column") {
    CHECK(nullification_set(rectangular(6), MeshParams::bar(rectangular(6))).size() == 6);
    CHECK(nullification_set(triangular(5), MeshParams::bar(triangular(5))).size() == 7);
    CHECK(nullification_set(butterfly(8), MeshParams::bar(butterfly(8))).size() == 3);
  }
  SUBCASE("column out of range") {
    const ColumnedTopology t = rectangular(4);
    CHECK_THROWS_AS(nullification_vector(t, MeshParams::bar(t), 4), IndexError);
    CHECK_THROWS_AS(nullification_vector(t, MeshParams::bar(t), -1), IndexError);
  }
}

TEST_CASE("power map presets have the expected mirror structure") {
  // bar: light never leaves its waveguide, rows alternate with period two
  // cross: reversing the mode axis complements every row
  const ColumnedTopology t = rectangular(16);
  const NullificationSet bar = nullification_set(t, MeshParams::bar(t));
  const NullificationSet cross = nullification_set(t, cross_params(t));
  for (int l = 0; l < t.depth(); ++l) {
    for (int n = 0; n < t.n; ++n) {
      CHECK(std::abs(std::norm(cross.vectors[l][n]) + std::norm(cross.vectors[l][t.n - 1 - n]) - 1.0) < 1e-10);
      CHECK(std::abs(std::norm(bar.vectors[l][n]) - ((n + l) % 2 == 0 ? 1.0 : 0.0)) < 1e-10);
    }
  }
}

TEST_CASE("closed-form node nullification") {
  NodeSolution s = nullify_node_closed_form(1.0, 1.0);
  CHECK(s.alpha == doctest::Approx(kPi / 2));
  CHECK(s.beta == doctest::Approx(0.0));
  s = nullify_node_closed_form(1.0, 0.0);
  CHECK(s.alpha == doctest::Approx(kPi));
  CHECK(s.beta == 0.0);
  CHECK(s.phase_indeterminate);
  s = nullify_node_closed_form(0.0, 2.0);
  CHECK(s.alpha == 0.0);
  CHECK(s.phase_indeterminate);
  s = nullify_node_closed_form(1.0, kI);
  CHECK(s.alpha == doctest::Approx(kPi / 2));
  CHECK(s.beta == doctest::Approx(kPi / 2));
  CHECK_THROWS_AS(nullify_node_closed_form(0.0, 0.0), DegenerateInputError);

  std::mt19937_64 rng(1);
  for (int k = 0; k < 1000; ++k) {
    const ModeVector u = testing::random_vector(2, rng);
    s = nullify_node_closed_form(u[0], u[1]);
    const Eigen::Vector2cd out = node_matrix(NodePhases(s.alpha, s.beta)) * Eigen::Vector2cd(u[0], u[1]);
    CHECK(std::norm(out[1]) < 1e-28 * power(u));
    CHECK(bottom_power(s.alpha, s.beta, u[0], u[1]) < 1e-28 * power(u));
  }
}

TEST_CASE("beta minimizer does not depend on alpha") {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 50; ++k) {
    const ModeVector u = testing::random_vector(2, rng);
    int reference = -1;
    for (double alpha : {0.4, 1.3, 2.6}) {
      int best = 0;
      double best_p = INFINITY;
      for (int j = 0; j < 4096; ++j) {
        const double p = bottom_power(alpha, kTwoPi * j / 4096, u[0], u[1]);
        if (p < best_p) {
          best_p = p;
          best = j;
        }
      }
      if (reference < 0) reference = best;
      CHECK(std::abs(best - reference) <= 1);
    }
  }
}

TEST_CASE("sweep minimizer matches the closed form") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 500; ++k) {
    const ModeVector u = testing::random_vector(2, rng);
    const NodeSolution cf = nullify_node_closed_form(u[0], u[1]);
    const auto f = [&](double a, double b) { return bottom_power(a, b, u[0], u[1]); };
    const SweepResult s = sweep_minimize(f, 0.5, 5.0, 0.0, kPi, 1e-8 * power(u));
    CHECK(std::abs(s.alpha - cf.alpha) < 1e-8);
    CHECK(std::abs(phase_difference(s.beta, cf.beta)) < 1e-8);
    CHECK(s.passes >= 2);
  }
  // flat reading in beta: phase convention 0 and flagged
  const auto f = [](double a, double b) { return bottom_power(a, b, 1.0, 0.0); };
  const SweepResult s = sweep_minimize(f, 1.0, 1.0, 0.0, kPi, 1e-8);
  CHECK(s.phase_indeterminate);
  CHECK(s.beta == 0.0);
  CHECK(s.alpha == doctest::Approx(kPi).epsilon(1e-9));
}

TEST_CASE("parallel nullification programs a random device") {
  for (auto mode : {NullifyMode::kClosedForm, NullifyMode::kSweep}) {
    const ColumnedTopology t = rectangular(8);
    const MeshParams target = haar_params(8, 4);
    PhysicalMesh physical(t);
    physical.randomize(5);
    NullifyOptions opt;
    opt.mode = mode;
    const ProgramReport r = program_mesh(physical, target, opt);
    CHECK(r.success());
    CHECK(r.inputs_consumed == t.depth());
    CHECK(r.max_alpha_error < 1e-8);
    CHECK(r.max_beta_error < 1e-8);
    CHECK(r.distance_after < 1e-8);
    CHECK(r.fidelity_after > r.fidelity_before);
    for (const auto& c : r.columns) {
      CHECK(c.residuals.size() == static_cast<size_t>(t.columns[c.column].active));
      for (double x : c.residuals) CHECK(x >= 0.0);
    }
    align_output_phases(physical, mesh_matrix(t, target));
    CHECK((physical.matrix() - mesh_matrix(t, target)).norm() < 1e-8);
  }
}

TEST_CASE("programming other architectures and variants") {
  for (const auto& t : {triangular(7), butterfly(8), compactify(random_dag_netlist(6, 15, 9))}) {
    for (const auto& v : {NodeVariant::standard(), NodeVariant::differential(), NodeVariant::tunable_coupler()}) {
      const MeshParams target = random_phase_params(t, 8);
      PhysicalMesh physical(t, v);
      physical.randomize(1);
      const ProgramReport r = program_mesh(physical, target);
      CHECK(r.distance_after < 1e-9);
      CHECK(r.max_alpha_error < 1e-9);
    }
  }
}

TEST_CASE("sweep and closed-form modes reach the same settings") {
  const ColumnedTopology t = rectangular(8);
  const MeshParams target = haar_params(8, 12);
  PhysicalMesh a(t), b(t);
  a.randomize(2);
  b.randomize(2);
  program_mesh(a, target);
  NullifyOptions sweep;
  sweep.mode = NullifyMode::kSweep;
  program_mesh(b, target, sweep);
  CHECK((a.alpha() - b.alpha()).cwiseAbs().maxCoeff() < 1e-8);
  for (int l = 0; l < t.depth(); ++l) {
    for (int m = 0; m < t.columns[l].active; ++m) {
      CHECK(std::abs(phase_difference(a.beta()(m, l), b.beta()(m, l))) < 1e-8);
    }
  }
}

TEST_CASE("fixed point and idempotence") {
  const ColumnedTopology t = rectangular(8);
  const MeshParams target = haar_params(8, 6);
  PhysicalMesh physical(t);
  physical.set_settings(target);
  ProgramReport r = program_mesh(physical, target);
  for (const auto& c : r.columns) {
    for (double x : c.residuals) CHECK(x < 1e-12);
  }
  CHECK(r.max_setting_change < 1e-12);
  const Eigen::MatrixXd alpha = physical.alpha();
  r = program_mesh(physical, target);
  CHECK(r.max_setting_change < 1e-12);
  CHECK((physical.alpha() - alpha).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("node order inside a column does not matter") {
  const ColumnedTopology t = rectangular(10);
  const MeshParams target = haar_params(10, 3);
  const NullificationSet nset = nullification_set(t, target);
  PhysicalMesh a(t), b(t);
  a.randomize(4);
  b.randomize(4);
  NullifyOptions reversed;
  for (int l = 0; l < t.depth(); ++l) {
    nullify_column(a, nset.vectors[l], l);
    reversed.node_order.clear();
    for (int m = t.columns[l].active - 1; m >= 0; --m) reversed.node_order.push_back(m);
    nullify_column(b, nset.vectors[l], l, reversed);
  }
  CHECK((a.alpha() - b.alpha()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.beta() - b.beta()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("columns must be programmed in order") {
  const ColumnedTopology t = rectangular(6);
  const MeshParams target = haar_params(6, 1);
  const NullificationSet nset = nullification_set(t, target);
  PhysicalMesh physical(t);
  CHECK_THROWS_AS(nullify_column(physical, nset.vectors[2], 2), OrderError);
  nullify_column(physical, nset.vectors[0], 0);
  nullify_column(physical, nset.vectors[1], 1);
  CHECK_NOTHROW(nullify_column(physical, nset.vectors[2], 2));
  CHECK_NOTHROW(nullify_column(physical, nset.vectors[0], 0));
  CHECK(physical.programmed_columns() == 1);
  CHECK_THROWS_AS(nullify_column(physical, nset.vectors[3], 3), OrderError);
}

TEST_CASE("programming consumes exactly one input per column") {
  for (const auto& t : {rectangular(64), triangular(12), butterfly(64)}) {
    PhysicalMesh physical(t);
    const ProgramReport r = parallel_nullify(physical, nullification_set(t, random_phase_params(t, 1)));
    CHECK(r.inputs_consumed == t.depth());
  }
}

TEST_CASE("split-ratio limits flag unreachable nodes") {
  const ColumnedTopology t = rectangular(4);
  MeshParams target = random_phase_params(t, 3);
  for (int l = 0; l < t.depth(); ++l) {
    for (int m = 0; m < t.columns[l].active; ++m) target.theta(m, l) = std::max(target.theta(m, l), 0.5);
  }
  target.theta(0, 1) = 0.1;
  PhysicalMesh physical(t);
  physical.set_split_ratio_limit(0.3, kPi);
  try {
    program_mesh(physical, target);
    FAIL("expected NonNullifiableError");
  } catch (const NonNullifiableError& e) {
    const ProgramReport& r = e.report();
    REQUIRE(r.columns[1].flagged == std::vector<int>{0});
    CHECK(r.flagged_count() == 1);
    // residual is exactly the closed-form bottom power at the clamped split
    const NullificationSet nset = nullification_set(t, target);
    const ModeVector u = physical.column_input(nset.vectors[1], 1);
    const double expect = bottom_power(0.3, target.phi(0, 1), u[0], u[1]) / power(nset.vectors[1]);
    CHECK(r.columns[1].residuals[0] == doctest::Approx(expect).epsilon(1e-9));
    CHECK(r.columns[1].residuals[0] > 0.0);
  }
  // full range is the default behaviour
  PhysicalMesh full(t);
  full.set_split_ratio_limit(0.0, kPi);
  CHECK(program_mesh(full, target).success());
  CHECK_THROWS_AS(full.set_split_ratio_limit(2.0, 1.0), InvalidArgument);
}

TEST_CASE("tunable couplers with full coupling range never flag") {
  const ColumnedTopology t = rectangular(4);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 100; ++k) {
    MeshParams target = random_phase_params(t, rng());
    target.theta(0, 0) = (k % 2) ? 0.0 : kPi;
    PhysicalMesh physical(t, NodeVariant::tunable_coupler());
    physical.randomize(rng());
    CHECK(program_mesh(physical, target).success());
  }
}

TEST_CASE("output phase alignment") {
  const ColumnedTopology t = rectangular(8);
  const MeshParams target = haar_params(8, 9);
  const TransferMatrix u = mesh_matrix(t, target);
  PhysicalMesh physical(t);
  physical.set_settings(target);
  CHECK(align_output_phases(physical, physical.matrix()).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd shift(8);
  shift << 0.1, 0.9, 1.7, 2.5, 3.3, 4.1, 4.9, 5.7;
  physical.set_gamma(target.gamma + shift);
  const Eigen::VectorXd chi = align_output_phases(physical, u);
  for (int i = 0; i < 8; ++i) CHECK(std::abs(phase_difference(chi[i], -shift[i])) < 1e-12);
  CHECK((physical.matrix() - u).norm() < 1e-10);

  for (int n = 2; n <= 16; n += 2) {
    const ColumnedTopology tn = rectangular(n);
    const MeshParams p = haar_params(n, n);
    PhysicalMesh m(tn);
    m.randomize(n);
    program_mesh(m, p);
    align_output_phases(m, mesh_matrix(tn, p));
    CHECK((m.matrix() - mesh_matrix(tn, p)).norm() < 1e-10);
  }
}

TEST_CASE("cascade programming") {
  const ColumnedTopology t = rectangular(8);
  const std::vector<MeshParams> targets = {haar_params(8, 1), haar_params(8, 2)};

  SUBCASE("one mesh behaves like a single programming run") {
    Cascade c{{PhysicalMesh(t)}, {}};
    c.meshes[0].randomize(3);
    PhysicalMesh single(t);
    single.randomize(3);
    program_cascade(c, {targets[0]});
    program_mesh(single, targets[0]);
    CHECK((c.meshes[0].alpha() - single.alpha()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("two meshes with a linear interstitial") {
    Cascade c{{PhysicalMesh(t), PhysicalMesh(t)}, {InterstitialElement::scalar(8, 1.0)}};
    c.meshes[0].randomize(4);
    c.meshes[1].randomize(5);
    const auto reports = program_cascade(c, targets);
    CHECK(reports.size() == 2);
    CHECK(phase_aligned_distance(cascade_target(c, targets), c.matrix()) < 1e-8);
  }
  SUBCASE("interstitial gain is restored and scales the composite") {
    const Complex g(0.8, 0.3);
    Cascade c{{PhysicalMesh(t), PhysicalMesh(t)}, {InterstitialElement::scalar(8, g)}};
    c.meshes[0].randomize(6);
    c.meshes[1].randomize(7);
    program_cascade(c, targets);
    CHECK(c.interstitials[0].gain[0] == g);
    const TransferMatrix expect = g * mesh_matrix(t, targets[1]) * mesh_matrix(t, targets[0]);
    CHECK(phase_aligned_distance(expect, c.matrix()) < 1e-8);
  }
  SUBCASE("a nonlinearity that cannot be linearized aborts before programming") {
    Cascade c{{PhysicalMesh(t), PhysicalMesh(t)}, {InterstitialElement::scalar(8, 1.0, false)}};
    const Eigen::MatrixXd before = c.meshes[0].alpha();
    CHECK_THROWS_AS(program_cascade(c, targets), NonLinearizableError);
    CHECK(c.meshes[0].alpha() == before);
  }
}

TEST_CASE("rectangular decomposition") {
  CHECK((mesh_matrix(rectangular(4), decompose_rectangular(TransferMatrix::Identity(4, 4))) -
         TransferMatrix::Identity(4, 4)).norm() < 1e-12);

  const TransferMatrix node = node_matrix(NodePhases(1.2, 4.0));
  const MeshParams p = decompose_rectangular(node);
  CHECK(p.theta(0, 0) == doctest::Approx(1.2).epsilon(1e-12));
  CHECK((mesh_matrix(rectangular(2), p) - node).norm() < 1e-12);

  std::mt19937_64 rng(10);
  for (int k = 0; k < 100; ++k) {
    const int n = 2 + static_cast<int>(rng() % 15);
    const TransferMatrix u = haar_unitary(n, rng());
    const MeshParams q = decompose_rectangular(u);
    CHECK((mesh_matrix(rectangular(n), q) - u).norm() < 1e-9);
    for (int l = 0; l < q.theta.cols(); ++l) {
      for (int m = 0; m < q.theta.rows(); ++m) {
        CHECK(q.theta(m, l) >= 0.0);
        CHECK(q.theta(m, l) <= kPi);
        CHECK(q.phi(m, l) >= 0.0);
        CHECK(q.phi(m, l) < kTwoPi);
      }
    }
  }

  TransferMatrix bad = haar_unitary(4, 1);
  bad(0, 0) += 1e-6;
  try {
    decompose_rectangular(bad);
    FAIL("expected NonUnitaryError");
  } catch (const NonUnitaryError& e) {
    CHECK(e.deviation() > 1e-8);
  }
  CHECK_THROWS_AS(decompose_rectangular(TransferMatrix::Identity(3, 4)), DimensionError);
}

}  // TEST_SUITE
