#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "crowdflow/scenario.hpp"
#include "crowdflow/solver.hpp"
#include "support.hpp"

using namespace crowdflow;
using fixture::closed;
using fixture::rect_mesh;
using fixture::still_potential;

namespace {

double cell_mass(const State& s, const Discretization& d) { return weighted_mass(s.rho, d.dual.cell_area); }

Scenario coarse(std::string_view name, double h = 0.3) {
  Scenario sc = builtin_scenario(name);
  sc.mesh.target_h = h;
  return sc;
}

ModelParams hughes() {
  ModelParams p;
  p.model = ModelKind::Hughes;
  return p;
}

}  // namespace

TEST(Step, ClosedRoomAtRestIsAFixedPoint) {
  const Discretization d(closed(rect_mesh(2.0, 2.0, 0.25, 1.0, 0.5)));
  const ModelParams p;
  State s = State::vacuum(d.size());
  std::fill(s.rho.begin(), s.rho.end(), 1.3);
  const State before = s;
  const auto pot = still_potential(d.size());
  for (int k = 0; k < 10; ++k) step(s, pot, d, p, cfl_dt(s, d, p));
  for (Index i = 0; i < d.size(); ++i) {
    EXPECT_NEAR(s.rho[i], before.rho[i], 1e-13);
    EXPECT_NEAR(norm(s.mom[i]), 0.0, 1e-13);
  }
}

TEST(Step, VacuumStaysVacuum) {
  const Discretization d(rect_mesh(2.0, 2.0, 0.25, 1.0, 0.5));
  for (const ModelParams& p : {ModelParams{}, hughes()}) {
    State s = State::vacuum(d.size());
    const auto pot = still_potential(d.size());
    const auto rep = step(s, pot, d, p, cfl_dt(s, d, p));
    for (Index i = 0; i < d.size(); ++i) {
      EXPECT_EQ(s.rho[i], 0.0);
      EXPECT_EQ(norm(s.mom[i]), 0.0);
    }
    EXPECT_EQ(rep.outflow_rate, 0.0);
  }
}

TEST(Step, ClosedRoomConservesMass) {
  const Discretization d(closed(rect_mesh(3.0, 2.0, 0.2, 1.0, 0.5)));
  std::mt19937_64 rng(31);
  for (const ModelParams& p : {ModelParams{}, hughes()}) {
    State s = fixture::random_state(d.size(), p, rng);
    const auto pot = still_potential(d.size());
    const double m0 = cell_mass(s, d);
    for (int k = 0; k < 100; ++k) {
      step(s, pot, d, p, cfl_dt(s, d, p));
      EXPECT_GE(*std::min_element(s.rho.begin(), s.rho.end()), 0.0);
    }
    EXPECT_LE(std::abs(cell_mass(s, d) - m0), 1e-10 * m0);
  }
}

TEST(Step, MassChangeEqualsBoundaryOutflux) {
  const Scenario sc = coarse("room_obstacle2");
  const auto d = discretize(sc);
  const PotentialSolver solver(d);
  std::mt19937_64 rng(37);
  ModelParams second = sc.params;
  ModelParams first = sc.params;
  first.model = ModelKind::Hughes;
  for (const ModelParams& p : {second, first}) {
    State s = fixture::random_state(d->size(), p, rng);
    for (int k = 0; k < 50; ++k) {
      const auto pot = solver.compute(s.rho, p);
      const double dt = cfl_dt(s, *d, p);
      const double before = cell_mass(s, *d);
      const StepReport rep = step(s, pot, *d, p, dt);
      const double after = cell_mass(s, *d);
      EXPECT_GE(rep.outflow_rate, 0.0);
      EXPECT_NEAR(after - before, -dt * (rep.outflow_rate + rep.wall_rate), 1e-10 * before);
      EXPECT_NEAR(rep.wall_rate, 0.0, 1e-12 * before);
      EXPECT_GE(*std::min_element(s.rho.begin(), s.rho.end()), 0.0);
    }
  }
}

TEST(Step, WallProjectionRemovesNormalVelocity) {
  const Discretization d(generate_mesh(builtin_scenario("room_five_columns").geometry, {0.2, 2.0, 1.0}));
  ASSERT_FALSE(d.walls.empty());
  const ModelParams p;
  std::mt19937_64 rng(41);
  State s = fixture::random_state(d.size(), p, rng);
  project_wall_velocity(s, d.walls);
  std::size_t pinned = 0;
  for (const auto& w : d.walls) {
    const Vec2 v = velocity(s.at(w.node));
    if (w.pin) {
      ++pinned;
      EXPECT_EQ(norm(v), 0.0);
    } else {
      EXPECT_NEAR(norm(w.normal), 1.0, 1e-12);
      EXPECT_LE(std::abs(dot(v, w.normal)), 1e-12 * p.v_max);
    }
  }
  EXPECT_GT(pinned, 0u);  // room corners
}

TEST(Step, WallConstraintsFollowTheBoundary) {
  const Discretization d(closed(rect_mesh(2.0, 1.0, 0.25, 0.5, 0.2)));
  for (const auto& w : d.walls) {
    const Vec2 x = d.mesh.nodes[w.node];
    const bool on_x = std::abs(x.x) < 1e-12 || std::abs(x.x - 2.0) < 1e-12;
    const bool on_y = std::abs(x.y) < 1e-12 || std::abs(x.y - 1.0) < 1e-12;
    if (on_x && on_y) {
      EXPECT_TRUE(w.pin);
    } else if (on_x) {
      EXPECT_NEAR(std::abs(w.normal.x), 1.0, 1e-12);
    } else {
      ASSERT_TRUE(on_y);
      EXPECT_NEAR(std::abs(w.normal.y), 1.0, 1e-12);
    }
  }
}

TEST(Step, NegativeDensityIsAHardFailure) {
  const Discretization d(rect_mesh(2.0, 2.0, 0.25, 1.0, 0.5));
  const ModelParams p;
  State s = State::vacuum(d.size());
  for (Index i = 0; i < d.size(); ++i) s.rho[i] = d.mesh.nodes[i].x < 1.0 ? 5.0 : 0.0;
  EXPECT_THROW(step(s, still_potential(d.size()), d, p, 1e3 * cfl_dt(s, d, p)), NumericalError);
}

TEST(Step, RelaxationIsFirstOrderInTime) {
  // Source stage only: v' = (V(rho) mu - v) / tau, exact exponential relaxation.
  const ModelParams p;
  const Vec2 mu{0.6, 0.8};
  const double rho = 1.5, t_end = 2.0;
  const Vec2 target = speed(rho, p) * mu;
  const Vec2 exact = target + std::exp(-t_end / p.tau) * (Vec2{} - target);
  std::vector<double> err;
  for (int n : {20, 40, 80, 160, 320}) {
    const double dt = t_end / n;
    Conserved u{rho, {}};
    for (int k = 0; k < n; ++k) u.mom += dt * source(u, mu, p).mom;
    err.push_back(norm(velocity(u) - exact));
  }
  for (std::size_t k = 1; k < err.size(); ++k) EXPECT_NEAR(std::log2(err[k - 1] / err[k]), 1.0, 0.05);
}

TEST(Cfl, UniformSpeedGivesLengthScaleOverSpeed) {
  const Discretization d(rect_mesh(2.0, 1.0, 0.2, 0.5, 0.4));
  const double lmin = *std::min_element(d.length_scale.begin(), d.length_scale.end());
  // At rest with uniform density every face speed is s(rho).
  const ModelParams p;
  State s = State::vacuum(d.size());
  std::fill(s.rho.begin(), s.rho.end(), 2.0);
  // Outflow ghost states move; close the room so the rate is s(rho) everywhere.
  const Discretization c(closed(d.mesh));
  const double lc = *std::min_element(c.length_scale.begin(), c.length_scale.end());
  EXPECT_NEAR(cfl_dt(s, c, p), 0.9 * lc / sound_speed(2.0, p), 1e-12);
  EXPECT_GT(lc, 0.0);
  EXPECT_GT(lmin, 0.0);
}

TEST(Cfl, VacuumUsesTheSpeedFloor) {
  const Discretization d(closed(rect_mesh(2.0, 1.0, 0.2, 0.5, 0.4)));
  const ModelParams p;
  const double l = *std::min_element(d.length_scale.begin(), d.length_scale.end());
  EXPECT_NEAR(cfl_dt(State::vacuum(d.size()), d, p), 0.9 * l / kMinWaveSpeed, 1e-6 * l / kMinWaveSpeed);
}

TEST(Cfl, HughesStepIgnoresDensity) {
  const Discretization d(rect_mesh(2.0, 1.0, 0.2, 0.5, 0.4));
  const ModelParams p = hughes();
  std::mt19937_64 rng(43);
  const double l = *std::min_element(d.length_scale.begin(), d.length_scale.end());
  const double dt0 = cfl_dt(State::vacuum(d.size()), d, p);
  EXPECT_NEAR(dt0, 0.9 * l / 2.0, 1e-15);
  for (int k = 0; k < 5; ++k) EXPECT_EQ(cfl_dt(fixture::random_state(d.size(), p, rng), d, p), dt0);
}

TEST(Cfl, NonFiniteStateIsRejected) {
  const Discretization d(rect_mesh(1.0, 1.0, 0.25, 0.5, 0.4));
  State s = State::vacuum(d.size());
  s.rho[3] = std::nan("");
  EXPECT_THROW(cfl_dt(s, d, ModelParams{}), NumericalError);
}

TEST(Cfl, RandomStatesStayNonnegative) {
  const Discretization d(generate_mesh(builtin_scenario("room_obstacle3").geometry, {0.3, 2.0, 1.0}));
  std::mt19937_64 rng(47);
  ModelParams p;
  for (double p0 : {0.005, 0.5, 5.0}) {
    p.p0 = p0;
    State s = fixture::random_state(d.size(), p, rng);
    // Every cell sees every neighbour move mass away at full speed.
    const auto pot = still_potential(d.size());
    for (int k = 0; k < 20; ++k) {
      step(s, pot, d, p, cfl_dt(s, d, p));
      EXPECT_GE(*std::min_element(s.rho.begin(), s.rho.end()), 0.0);
    }
  }
}

TEST(Run, InitialMass) {
  const Problem a = make_problem(coarse("room_empty"));
  EXPECT_NEAR(weighted_mass(a.initial.rho, a.evac_area), 16.0, 1e-12);
  Scenario dense = coarse("room_five_columns");
  dense.initial.rho0 = 2.0;
  const Problem b = make_problem(dense);
  EXPECT_NEAR(weighted_mass(b.initial.rho, b.evac_area), 32.0, 1e-12);
}

TEST(Run, MassDecreasesUntilTheStopRule) {
  const Scenario sc = coarse("room_empty", 0.4);
  const Problem prob = make_problem(sc);
  const RunReport rep = run(prob, make_run_options(sc));
  EXPECT_EQ(rep.stop_reason, "mass_fraction");
  ASSERT_GT(rep.series.size(), 10u);
  EXPECT_NEAR(rep.series.front().mass, 16.0, 1e-12);
  EXPECT_LE(rep.series.back().mass, 0.01 * 16.0);
  bool leaving = false;
  double t_evac = 0.0;
  for (std::size_t k = 1; k < rep.series.size(); ++k) {
    const auto& a = rep.series[k - 1];
    const auto& b = rep.series[k];
    EXPECT_GT(b.t, a.t);
    // Interior redistribution changes M only by roundoff until the crowd reaches the exit.
    EXPECT_LE(b.mass, a.mass + 1e-12 * 16.0);
    if (leaving) {
      EXPECT_LT(b.mass, a.mass) << "at t = " << b.t;
    }
    leaving = leaving || b.mass < a.mass - 1e-10;
    t_evac += a.mass * (b.t - a.t);
  }
  EXPECT_NEAR(rep.t_evac, t_evac, 1e-9 * t_evac);
  EXPECT_EQ(rep.dt.steps, rep.series.size() - 1);
  EXPECT_LE(rep.dt.min, rep.dt.mean);
  EXPECT_LE(rep.dt.mean, rep.dt.max);
}

TEST(Run, StopsAtTmaxAndLandsOnSnapshots) {
  Scenario sc = coarse("room_empty", 0.4);
  sc.stop.t_max = 1.0;
  const Problem prob = make_problem(sc);
  RunOptions opt = make_run_options(sc);
  opt.snapshot_times = {0.0, 0.25, 0.5};
  std::vector<double> seen;
  opt.on_snapshot = [&](const SnapshotRequest& r) {
    seen.push_back(r.t);
    EXPECT_EQ(r.potential->phi.size(), r.state->size());
    return std::string("snap");
  };
  const RunReport rep = run(prob, opt);
  EXPECT_EQ(rep.stop_reason, "t_max");
  EXPECT_DOUBLE_EQ(rep.stop_time, 1.0);
  ASSERT_EQ(seen.size(), 3u);
  EXPECT_EQ(seen[0], 0.0);
  EXPECT_NEAR(seen[1], 0.25, 1e-12);
  EXPECT_NEAR(seen[2], 0.5, 1e-12);
  EXPECT_EQ(rep.snapshots.size(), 3u);
}

TEST(Run, IsDeterministic) {
  Scenario sc = coarse("room_obstacle1", 0.4);
  sc.stop.t_max = 3.0;
  const Problem prob = make_problem(sc);
  const RunReport a = run(prob, make_run_options(sc));
  const RunReport b = run(prob, make_run_options(sc));
  ASSERT_EQ(a.series.size(), b.series.size());
  for (std::size_t k = 0; k < a.series.size(); ++k) {
    EXPECT_EQ(a.series[k].t, b.series[k].t);
    EXPECT_EQ(a.series[k].mass, b.series[k].mass);
  }
  EXPECT_EQ(a.t_evac, b.t_evac);
}

TEST(Run, RecomputeCadence) {
  Scenario sc = coarse("room_empty", 0.4);
  sc.stop.t_max = 2.0;
  const Problem prob = make_problem(sc);
  RunOptions opt = make_run_options(sc);
  const RunReport every = run(prob, opt);
  opt.recompute_every = 5;
  const RunReport sparse = run(prob, opt);
  EXPECT_NEAR(sparse.series.back().mass, every.series.back().mass, 1e-2 * every.series.back().mass);
  opt.recompute_every = 0;
  EXPECT_THROW(run(prob, opt), ConfigError);
}

TEST(Run, FailureCarriesThePartialReport) {
  const Scenario sc = coarse("room_empty", 0.4);
  const Problem prob = make_problem(sc);
  RunOptions opt = make_run_options(sc);
  opt.on_step = [](const SimClock& c, const State&) {
    if (c.step_index == 5) throw NumericalError("injected");
  };
  try {
    run(prob, opt);
    FAIL() << "expected RunAborted";
  } catch (const RunAborted& e) {
    EXPECT_EQ(e.partial().stop_reason, "aborted: injected");
    EXPECT_EQ(e.partial().series.size(), 6u);
    EXPECT_NEAR(e.partial().series[0].mass, 16.0, 1e-12);
    EXPECT_GT(e.partial().stop_time, 0.0);
    EXPECT_EQ(e.partial().final_state.size(), prob.initial.size());
  }
}

TEST(Run, RoomWithoutOutflowIsRejected) {
  const Scenario sc = coarse("room_empty", 0.4);
  Problem prob = make_problem(sc);
  prob.disc = std::make_shared<const Discretization>(closed(prob.disc->mesh));
  EXPECT_THROW(run(prob, make_run_options(sc)), ConfigError);
}

TEST(Run, EmptyRoomStopsImmediately) {
  Scenario sc = coarse("room_empty", 0.4);
  sc.initial.rho0 = 0.0;
  const RunReport rep = run(make_problem(sc), make_run_options(sc));
  EXPECT_EQ(rep.stop_reason, "empty");
  EXPECT_EQ(rep.t_evac, 0.0);
}
