#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "shellcontact/solver.hpp"
#include "test_support.hpp"

using namespace shellcontact;

namespace {

StepRecord rec(std::size_t step, Phase phase, double F, double A, bool apex = true) {
  StepRecord r;
  r.step = step;
  r.phase = phase;
  r.d = 1e-4 * static_cast<double>(step);
  r.F = F;
  r.A = A;
  r.apex_in_contact = apex && A > 0.0;
  return r;
}

/// Exact Hertz law A = k F^(2/3) on a monotone loading ramp.
std::vector<StepRecord> hertz_ramp(std::size_t n, double k = 2.0) {
  std::vector<StepRecord> rs;
  for (std::size_t s = 0; s < n; ++s) {
    const double F = 0.01 * static_cast<double>(s);
    rs.push_back(rec(s, Phase::load, F, k * std::pow(F, 2.0 / 3.0)));
  }
  return rs;
}

struct Small {
  ShellModel model;
  ReferenceMesh mesh;
  ContactParams contact;
  SolverParams params;
  Schedule schedule;
  Small(std::size_t n, double mu, std::size_t steps) : model(fixtures::default_model(n)) {
    mesh = build_mesh(model);
    contact = ContactParams::defaults(model, mu);
    params = SolverParams::defaults(model);
    schedule = Schedule::defaults(model);
    schedule.n_steps_load = steps;
    schedule.n_steps_unload = steps;
  }
  Trajectory run(const RunOptions& opt = {}) const {
    return run_schedule(model, mesh, contact, schedule, params, opt);
  }
};

}  // namespace

TEST(SolveStep, ZeroIndentationKeepsTheReference) {
  Small s(200, 0.0, 1);
  const QuasiStaticSolver solver(s.mesh, s.model, s.contact, s.params, LoadingMode::plate);
  const SolverState start = solver.initial_state();
  const StepResult res = solver.solve_step(start, 0.0, 1);
  const Configuration ref = reference_configuration(s.mesh);
  for (std::size_t i = 0; i < s.mesh.size(); ++i) {
    EXPECT_NEAR(res.state.config.r[i], ref.r[i], 1e-15);
    EXPECT_NEAR(res.state.config.z[i], ref.z[i], 1e-15);
  }
  EXPECT_EQ(res.state.F, 0.0);
}

TEST(SolveStep, SmallFrictionlessStepConvergesQuickly) {
  Small s(400, 0.0, 1);
  const QuasiStaticSolver solver(s.mesh, s.model, s.contact, s.params, LoadingMode::plate);
  const StepResult res = solver.solve_step(solver.initial_state(), s.model.h / 10.0, 1);
  EXPECT_LE(res.newton_iterations, 10u);
  EXPECT_EQ(res.substeps, 1u);
  EXPECT_FALSE(res.stabilized);
  EXPECT_GT(res.state.F, 0.0);
  EXPECT_LT(res.residual, 1e-6 * s.model.F0());
}

TEST(SolveStep, PressureIntegralMatchesPlateReaction) {
  // With mu = 0 the plate reaction is the z-derivative of the stored energy
  // with respect to the plate height, i.e. the sum of the nodal contact
  // z-forces; it must agree with the pressure integral.
  Small s(400, 0.0, 1);
  const QuasiStaticSolver solver(s.mesh, s.model, s.contact, s.params, LoadingMode::plate);
  const StepResult res = solver.solve_step(solver.initial_state(), 0.02 * s.model.R, 1);
  const ContactEvaluation e =
      evaluate_contact(s.mesh, res.state.config, s.contact, res.state.config.anchors);
  double reaction = 0.0;
  for (std::size_t i = 0; i < s.mesh.size(); ++i) reaction -= e.forces[dof_z(i)];
  EXPECT_NEAR(contact_force_total(res.state.field), reaction, 0.01 * reaction);
}

TEST(Detectors, MonotoneAreaNeverBuckles) {
  EXPECT_FALSE(detect_buckling(hertz_ramp(50)).has_value());
  EXPECT_THROW(detect_buckling(hertz_ramp(1)), InputError);
}

TEST(Detectors, SnapNeedsAreaAndForceDrop) {
  auto rs = hertz_ramp(30);
  // Area falls 30 % while the force keeps rising: smooth inversion, no snap.
  rs[20].A = 0.7 * rs[19].A;
  EXPECT_FALSE(detect_buckling(rs).has_value());
  // Same drop with a force drop: snap.
  rs[20].F = 0.95 * rs[19].F;
  ASSERT_TRUE(detect_buckling(rs).has_value());
  EXPECT_EQ(*detect_buckling(rs), 20u);
}

TEST(Detectors, UnbucklingNeedsAPriorBuckle) {
  auto rs = hertz_ramp(20);
  rs[10].A = 0.6 * rs[9].A;
  rs[10].F = 0.9 * rs[9].F;
  const double A_low = rs[19].A * 0.6;
  for (std::size_t k = 11; k < 20; ++k) rs[k].A = A_low;
  rs.push_back(rec(20, Phase::unload, rs[19].F * 0.8, A_low));
  rs.push_back(rec(21, Phase::unload, rs[19].F * 0.7, A_low));
  rs.push_back(rec(22, Phase::unload, rs[19].F * 0.75, A_low * 1.4));
  const auto b = detect_buckling(rs);
  ASSERT_TRUE(b.has_value());
  EXPECT_EQ(detect_unbuckling(rs, b), std::optional<std::size_t>(22));
  EXPECT_FALSE(detect_unbuckling(rs, std::nullopt).has_value());
}

TEST(Detectors, ExactHertzNeverDeviates) {
  const HertzDeviation hd = detect_hertz_deviation(hertz_ramp(60, 3.0));
  EXPECT_FALSE(hd.index.has_value());
  EXPECT_NEAR(hd.prefactor, 3.0, 1e-12);
}

TEST(Detectors, PersistentDeviationIsFound) {
  auto rs = hertz_ramp(60, 3.0);
  rs[30].A *= 1.2;  // single outlier is ignored
  for (std::size_t k = 40; k < 60; ++k) rs[k].A *= 1.1;
  const HertzDeviation hd = detect_hertz_deviation(rs);
  ASSERT_TRUE(hd.index.has_value());
  EXPECT_EQ(*hd.index, 40u);
}

TEST(Detectors, TooFewContactStepsIsAnError) {
  EXPECT_THROW(detect_hertz_deviation(hertz_ramp(4)), InputError);  // 3 contacting steps
}

TEST(Regimes, LoadingOrderAndBuckledLabel) {
  std::vector<StepRecord> rs;
  rs.push_back(rec(0, Phase::load, 0.0, 0.0));
  for (std::size_t s = 1; s <= 10; ++s) rs.push_back(rec(s, Phase::load, 0.1 * s, 0.01 * s));
  for (std::size_t s = 11; s <= 15; ++s) rs.push_back(rec(s, Phase::load, 0.1 * s, 0.05, false));
  Events ev;
  ev.hertz_deviation = 6;
  ev.buckling = 11;
  classify_regimes(rs, ev, std::nullopt);
  EXPECT_EQ(rs[0].regime, Regime::none);
  EXPECT_EQ(rs[1].regime, Regime::hertzian);
  EXPECT_EQ(rs[5].regime, Regime::hertzian);
  EXPECT_EQ(rs[6].regime, Regime::intermediate);
  EXPECT_EQ(rs[11].regime, Regime::buckled);
  int last = 0;
  for (const auto& r : rs) {
    const int order = static_cast<int>(r.regime);
    EXPECT_GE(order, last);
    last = order;
  }
}

TEST(Sweep, RejectsBadLists) {
  Small s(100, 0.0, 2);
  EXPECT_THROW(sweep_mu(s.model, s.mesh, s.contact, s.schedule, s.params, {}), InputError);
  EXPECT_THROW(sweep_mu(s.model, s.mesh, s.contact, s.schedule, s.params, {0.5, 0.5}), InputError);
  EXPECT_THROW(sweep_mu(s.model, s.mesh, s.contact, s.schedule, s.params, {-0.1}), InputError);
}

TEST(Anderson, AcceleratesASlowLinearContraction) {
  // x = 0.95 x + 0.05 c has fixed point c; plain iteration needs ~300 steps.
  const std::vector<double> c = {1.0, -2.0, 3.0};
  auto g = [&](const std::vector<double>& x) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 0.95 * x[i] + 0.05 * c[i];
    return y;
  };
  AndersonMixer mixer(5);
  std::vector<double> x(3, 0.0);
  for (int it = 0; it < 6; ++it) x = mixer.next(x, g(x));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(x[i], c[i], 1e-8);
}

TEST(Schedule, ValidatesBounds) {
  const ShellModel m = fixtures::default_model();
  Schedule s = Schedule::defaults(m);
  EXPECT_DOUBLE_EQ(s.d_max, 0.25 * m.R);
  s.d_max = m.R;
  EXPECT_THROW(s.validate(m), ConfigError);
  s = Schedule::defaults(m);
  s.n_steps_load = 0;
  EXPECT_THROW(s.validate(m), ConfigError);
  SolverParams p = SolverParams::defaults(m);
  EXPECT_DOUBLE_EQ(p.residual_tol, 1e-8 * m.F0());
  p.min_substep = 1.0;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Run, CoarseCycleIsConsistentAndDeterministic) {
  Small s(120, 0.5, 40);
  RunOptions opt;
  opt.snapshot_steps = {0, 20, 80};
  const Trajectory a = s.run(opt);
  const Trajectory b = s.run(opt);
  ASSERT_FALSE(a.failure.has_value());
  ASSERT_EQ(a.records.size(), 81u);
  ASSERT_EQ(a.snapshot_steps, (std::vector<std::size_t>{0, 20, 80}));
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    EXPECT_EQ(a.records[k].F, b.records[k].F);
    EXPECT_EQ(a.records[k].A, b.records[k].A);
    EXPECT_EQ(a.records[k].D, b.records[k].D);
    EXPECT_EQ(a.records[k].step, k);
    if (k > 0) EXPECT_GE(a.records[k].D, a.records[k - 1].D);
  }
  EXPECT_LE(a.audit_ratio, s.params.energy_audit_tol);
  ASSERT_TRUE(a.W.has_value());
  EXPECT_GT(*a.W, 0.0);
  EXPECT_NEAR(a.records.back().d, 0.0, 1e-15);
}

TEST(Run, StepFailureKeepsThePartialTrajectory) {
  Small s(120, 0.0, 2);
  s.params.max_newton = 1;
  s.params.min_substep = 0.5;
  s.params.stabilized_newton_factor = 1;
  s.params.max_lag_iterations = 1;
  const Trajectory t = s.run();
  ASSERT_TRUE(t.failure.has_value());
  EXPECT_GE(t.records.size(), 1u);
  EXPECT_FALSE(t.W.has_value());
}

TEST(PointMode, SmallIndentationMatchesShallowShellStiffness) {
  Small s(400, 0.0, 10);
  s.schedule.mode = LoadingMode::point;
  s.schedule.unload = false;
  s.schedule.d_max = 0.05 * s.model.h;
  const Trajectory t = s.run();
  ASSERT_FALSE(t.failure.has_value());
  const double k = t.records[1].F / t.records[1].d;
  EXPECT_NEAR(k, reissner_stiffness(s.model), 0.15 * reissner_stiffness(s.model));
  // Linear within 3 % up to d = h/20; the response softens beyond that
  // (about 3 % at h/10 and 30 % at h, independent of the mesh).
  for (std::size_t i = 2; i < t.records.size(); ++i)
    EXPECT_NEAR(t.records[i].F / t.records[i].d, k, 0.03 * k);
}

TEST(PointMode, RelaxedInversionRidgeConvergesUnderRefinement) {
  // A deep apex push relaxes into an inverted cap bounded by a smooth ridge;
  // its elastic energy approaches a finite limit as the mesh is refined.
  std::vector<double> U;
  for (std::size_t n : {200u, 400u, 800u}) {
    Small s(n, 0.0, 60);
    s.schedule.mode = LoadingMode::point;
    s.schedule.unload = false;
    s.schedule.d_max = 0.3 * s.model.R;
    RunOptions opt;
    opt.snapshot_steps = {60};
    const Trajectory t = s.run(opt);
    ASSERT_FALSE(t.failure.has_value()) << "n = " << n;
    ASSERT_EQ(t.snapshots.size(), 1u);
    U.push_back(t.records.back().elastic_energy);
    // Inverted cap: the meridian rises away from the pushed apex.
    const Configuration& c = t.snapshots.front();
    EXPECT_GT(c.z[n / 20], c.z[0]) << "n = " << n;
  }
  const double d1 = std::abs(U[1] - U[0]);
  const double d2 = std::abs(U[2] - U[1]);
  EXPECT_LT(d2, 0.5 * d1);
  EXPECT_LT(d2 / U[2], 1e-3);
}
