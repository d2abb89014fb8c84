// Acceptance criteria. `acceptance` runs all of them; `acceptance 7` runs one.
// Prints one PASS/FAIL line per criterion (with indented measurements above
// it) and exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "crowdflow/diagnostics.hpp"
#include "crowdflow/scenario.hpp"
#include "crowdflow/solver.hpp"
#include "crowdflow/studies.hpp"

using namespace crowdflow;

namespace {

struct Outcome {
  bool pass = false;
  std::string summary;
};

void note(const char* fmt, auto... args) {
  std::printf("  ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

double order_of(const StudyResult& r, const std::string& field) {
  for (const auto& f : r.fields) {
    if (f.name == field) return f.study.p;
  }
  return std::nan("");
}

void print_study(const StudyResult& r) {
  for (const auto& f : r.fields) {
    std::string row;
    for (const auto& l : f.study.levels) row += fmt(" N=%zu:E=%.4g", l.cells, l.error);
    note("%-11s p=%.4f C=%.4g |%s", f.name.c_str(), f.study.p, f.study.C, row.c_str());
  }
  if (r.reference_cells) note("reference mesh: %zu cells", r.reference_cells);
  if (r.extrapolated) note("nodes extrapolated from the reference: %zu", r.extrapolated);
}

RunReport run_case(const Scenario& sc, std::shared_ptr<const Discretization> disc = nullptr,
                   std::function<void(const SimClock&, const State&)> on_step = {}) {
  const auto start = std::chrono::steady_clock::now();
  const Problem prob = make_problem(sc, std::move(disc));
  RunOptions opt = make_run_options(sc);
  opt.snapshot_times.clear();
  opt.on_step = std::move(on_step);
  RunReport rep = run(prob, opt);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  note("%-22s N=%zu M0=%.4g T_evac=%.5g stop=%s t=%.4g steps=%zu min_rho=%.3g clamped=%zu (%.0f s)",
       sc.name.c_str(), prob.disc->size(), rep.series.front().mass, rep.t_evac, rep.stop_reason.c_str(),
       rep.stop_time, rep.dt.steps, rep.min_density, rep.clamped, secs);
  return rep;
}

/// M(t) by linear interpolation of the per-step series.
double mass_at(const std::vector<MassSample>& s, double t) {
  if (t <= s.front().t) return s.front().mass;
  if (t >= s.back().t) return s.back().mass;
  const auto it = std::lower_bound(s.begin(), s.end(), t, [](const MassSample& m, double v) { return m.t < v; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  return a.mass + (b.mass - a.mass) * (t - a.t) / (b.t - a.t);
}

// ---------------------------------------------------------------------------

Outcome criterion_1() {
  const auto r = strip_eikonal_study({500, 1600, 5000, 16000, 50000});
  print_study(r);
  const double p = order_of(r, "phi"), g = order_of(r, "dphi_dx");
  return {within(p, 0.9, 1.2) && within(g, 0.85, 1.15),
          fmt("p(phi)=%.3f in [0.9,1.2], p(dphi/dx)=%.3f in [0.85,1.15]", p, g)};
}

Outcome criterion_2() {
  const auto r = room_eikonal_study({1500, 3000, 6000, 12000}, 136507);
  print_study(r);
  const double a = order_of(r, "phi"), b = order_of(r, "dphi_dx"), c = order_of(r, "dphi_dy");
  const bool ok = within(a, 0.75, 1.05) && within(b, 0.75, 1.05) && within(c, 0.75, 1.05);
  return {ok, fmt("p(phi)=%.3f p(dphi/dx)=%.3f p(dphi/dy)=%.3f, all required in [0.75,1.05]", a, b, c)};
}

Outcome criterion_3() {
  const auto r = full_scheme_study({2000, 4000, 8000, 16000, 30000}, 70772, 5.0);
  print_study(r);
  const double d = order_of(r, "density"), x = order_of(r, "velocity_x"), y = order_of(r, "velocity_y");
  const bool ok = within(d, 0.6, 1.0) && within(x, 0.9, 1.35) && within(y, 0.9, 1.35);
  return {ok, fmt("p(rho)=%.3f in [0.6,1.0], p(vx)=%.3f p(vy)=%.3f in [0.9,1.35]", d, x, y)};
}

Outcome criterion_4() {
  Mesh m = generate_mesh(builtin_scenario("room_empty").geometry, builtin_scenario("room_empty").mesh);
  for (auto& e : m.boundary_edges) e.tag = BoundaryTag::Wall;
  const Discretization d(std::move(m));
  const ModelParams p;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  State s = State::vacuum(d.size());
  PotentialField pot{std::vector<double>(d.size(), 0.0), std::vector<Vec2>(d.size()), std::vector<Vec2>(d.size())};
  for (Index i = 0; i < d.size(); ++i) {
    const double a = 6.283185307179586 * u01(rng), b = 6.283185307179586 * u01(rng);
    s.rho[i] = p.rho_max * u01(rng);
    s.mom[i] = s.rho[i] * p.v_max * u01(rng) * Vec2{std::cos(a), std::sin(a)};
    pot.mu[i] = {std::cos(b), std::sin(b)};  // arbitrary desired directions drive the source
  }
  const double m0 = weighted_mass(s.rho, d.dual.cell_area);
  double worst = 0.0, min_rho = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 1000; ++k) {
    const auto rep = step(s, pot, d, p, cfl_dt(s, d, p));
    min_rho = std::min(min_rho, rep.min_density);
    worst = std::max(worst, std::abs(weighted_mass(s.rho, d.dual.cell_area) - m0) / m0);
  }
  note("nodes=%zu M0=%.6f max relative drift over 1000 steps=%.3g min rho=%.3g", d.size(), m0, worst, min_rho);
  return {worst <= 1e-9, fmt("max |M(t)-M(0)|/M(0) = %.3g <= 1e-9", worst)};
}

Outcome criterion_5() {
  // Kernel level: two cells exchanging mass through one face at the CFL step.
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::size_t trials = 0, negative = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (double p0 : {0.001, 0.005, 0.5, 10.0}) {
    ModelParams p;
    p.p0 = p0;
    for (int k = 0; k < 2500; ++k, ++trials) {
      auto draw = [&] {
        const double rho = u01(rng) < 0.1 ? 0.0 : p.rho_max * u01(rng);
        const double a = 6.283185307179586 * u01(rng);
        return Conserved{rho, rho * p.v_max * u01(rng) * Vec2{std::cos(a), std::sin(a)}};
      };
      const Conserved a = draw(), b = draw();
      const double t = 6.283185307179586 * u01(rng);
      const Vec2 n{std::cos(t), std::sin(t)};
      const double area_a = 0.05 + u01(rng), area_b = 0.05 + u01(rng), len = 0.05 + u01(rng);
      const auto ws = einfeldt_speeds(a, b, n, p);
      const double sigma = std::max({std::abs(ws.left), std::abs(ws.right), std::abs(dot(velocity(a), n)),
                                     std::abs(dot(velocity(b), n)), kMinWaveSpeed});
      const double dt = p.cfl * std::min(area_a, area_b) / (len * sigma);
      const double f = hll_flux(a, b, n, p, &ws).mass;
      const double ra = a.rho - dt * len * f / area_a, rb = b.rho + dt * len * f / area_b;
      worst = std::min({worst, ra, rb});
      if (ra < 0.0 || rb < 0.0) ++negative;
    }
  }
  note("two-cell exchanges: %zu, negative results: %zu, smallest density %.3g", trials, negative, worst);

  // Full runs at cfl = 0.9, including the most congested configurations.
  bool runs_ok = true;
  auto check = [&](Scenario sc) {
    double min_rho = std::numeric_limits<double>::infinity();
    try {
      const auto rep = run_case(sc, nullptr, [&](const SimClock&, const State& s) {
        min_rho = std::min(min_rho, *std::min_element(s.rho.begin(), s.rho.end()));
      });
      runs_ok = runs_ok && min_rho >= 0.0 && rep.clamped == 0;
    } catch (const std::exception& e) {
      note("%s aborted: %s", sc.name.c_str(), e.what());
      runs_ok = false;
    }
  };
  for (const char* name : {"room_empty", "room_obstacle1", "room_obstacle3"}) {
    Scenario sc = builtin_scenario(name);
    sc.params.cfl = 0.9;
    check(sc);
  }
  Scenario dense = builtin_scenario("room_five_columns");
  dense.name = "five_columns_m32";
  dense.initial.rho0 = 2.0;
  dense.params.p0 = 0.001;
  check(dense);
  Scenario packed = builtin_scenario("room_empty");
  packed.name = "room_rho6_p0_1e-3";
  packed.initial.rho0 = 6.0;
  packed.params.p0 = 0.001;
  check(packed);
  return {negative == 0 && runs_ok,
          fmt("%zu negative two-cell results; room runs %s", negative,
              runs_ok ? "kept min rho >= 0 with no clamping" : "FAILED to stay nonnegative")};
}

Outcome criterion_6() {
  std::vector<double> t_evac;
  double worst_r2 = 1.0;
  for (const char* name : {"room_empty", "room_obstacle1", "room_obstacle2", "room_obstacle3"}) {
    Scenario sc = builtin_scenario(name);
    sc.params.model = ModelKind::Hughes;
    const auto rep = run_case(sc);
    t_evac.push_back(rep.t_evac);
    // Decreasing segment: from the first outflow to the end of the run.
    const double m0 = rep.series.front().mass;
    std::vector<double> t, m;
    for (const auto& s : rep.series) {
      if (s.mass < (1.0 - 1e-3) * m0) {
        t.push_back(s.t);
        m.push_back(s.mass);
      }
    }
    const double r2 = linear_r2(t, m);
    note("%-16s decreasing segment t in [%.3g, %.3g] s, R^2 = %.5f", name, t.front(), t.back(), r2);
    worst_r2 = std::min(worst_r2, r2);
  }
  const auto [lo, hi] = std::minmax_element(t_evac.begin(), t_evac.end());
  const double spread = (*hi - *lo) / *lo;
  return {spread <= 0.03 && worst_r2 >= 0.99,
          fmt("T_evac spread (max-min)/min = %.4f <= 0.03; min R^2 = %.5f >= 0.99", spread, worst_r2)};
}

/// Outflow rate -dM/dt over a centred 1 s window on a 0.1 s grid, and the
/// drop from its peak in the first half of the evacuation to its minimum
/// later on while 20%..80% of the crowd is still inside.
struct OutflowDrop {
  double peak = 0.0, t_peak = 0.0, dip = 0.0, t_dip = 0.0, drop = 0.0;
};

OutflowDrop outflow_drop(const RunReport& rep) {
  const auto& s = rep.series;
  const double m0 = s.front().mass, w = 1.0;
  OutflowDrop o;
  o.dip = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> rate;
  for (double t = 0.5 * w; t + 0.5 * w <= s.back().t; t += 0.1) {
    rate.push_back({t, (mass_at(s, t - 0.5 * w) - mass_at(s, t + 0.5 * w)) / w});
  }
  for (const auto& [t, r] : rate) {
    if (mass_at(s, t) >= 0.5 * m0 && r > o.peak) {
      o.peak = r;
      o.t_peak = t;
    }
  }
  for (const auto& [t, r] : rate) {
    const double m = mass_at(s, t);
    if (t > o.t_peak && m <= 0.8 * m0 && m >= 0.2 * m0 && r < o.dip) {
      o.dip = r;
      o.t_dip = t;
    }
  }
  o.drop = o.peak > 0.0 && std::isfinite(o.dip) ? 1.0 - o.dip / o.peak : 0.0;
  return o;
}

Outcome criterion_7() {
  bool ok = true;
  std::string summary;
  for (const char* name : {"room_empty", "room_obstacle1", "room_obstacle2", "room_obstacle3"}) {
    Scenario sc = builtin_scenario(name);
    sc.params.p0 = 0.005;
    const auto o = outflow_drop(run_case(sc));
    const bool empty = std::string(name) == "room_empty";
    note("%-16s peak %.4f ped/s at t=%.2f, minimum %.4f at t=%.2f, drop %.1f%% (%s)", name, o.peak, o.t_peak, o.dip,
         o.t_dip, 100.0 * o.drop, empty ? "needs >= 30%" : "needs < 30%");
    ok = ok && (empty ? o.drop >= 0.3 : o.drop < 0.3);
    summary += fmt("%s%s %.0f%%", summary.empty() ? "" : ", ", name, 100.0 * o.drop);
  }
  return {ok, "outflow drop: " + summary};
}

Outcome criterion_8() {
  Scenario base = builtin_scenario("room_empty");
  base.initial.rho0 = 1.5;
  base.params.gamma = 2.0;
  const std::vector<double> grid{5e-3, 1e-2, 5e-2, 0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 5.0, 10.0};
  const auto disc = discretize(base);
  std::vector<double> t_evac;
  for (double p0 : grid) {
    Scenario sc = base;
    sc.params.p0 = p0;
    sc.name = fmt("p0=%g", p0);
    t_evac.push_back(run_case(sc, disc).t_evac);
  }
  const std::size_t k = std::min_element(t_evac.begin(), t_evac.end()) - t_evac.begin();
  const bool interior = k > 0 && k + 1 < grid.size();
  return {interior && within(grid[k], 0.1, 1.25),
          fmt("T_evac minimum %.5g at p0=%g (%s); required interior and in [0.1,1.25]", t_evac[k], grid[k],
              interior ? "interior" : "at the end of the grid")};
}

Outcome criterion_9() {
  Scenario cols = builtin_scenario("room_five_columns");
  for (auto& ob : cols.geometry.obstacles) std::get<Circle>(ob).radius = 0.24;
  Scenario empty = builtin_scenario("room_empty");
  for (Scenario* sc : {&cols, &empty}) {
    sc->initial.rho0 = 2.0;
    sc->params.p0 = 0.001;
    sc->mesh.target_h = 0.11;
  }
  const auto rc = run_case(cols);
  const auto re = run_case(empty);
  const double m0 = re.series.front().mass;
  // First time the columned room is ahead, after having been behind.
  double t_behind = -1.0, t_cross = -1.0;
  const double t_end = std::min(rc.stop_time, re.stop_time);
  for (double t = 0.0; t <= t_end; t += 0.05) {
    const double mc = mass_at(rc.series, t), me = mass_at(re.series, t);
    if (mc > me + 1e-9 * m0 && t_behind < 0.0) t_behind = t;
    if (t_behind >= 0.0 && mc < me - 1e-9 * m0 && me > 0.01 * m0) {
      t_cross = t;
      break;
    }
  }
  if (t_cross >= 0.0) {
    note("columns behind from t=%.2f s, ahead from t=%.2f s (M_columns=%.3f, M_empty=%.3f)", t_behind, t_cross,
         mass_at(rc.series, t_cross), mass_at(re.series, t_cross));
  }
  return {t_cross >= 0.0, fmt("M(0)=%.3g; columned M(t) crosses below empty-room M(t) %s; T_evac columns %.5g vs empty %.5g",
                               m0, t_cross >= 0.0 ? fmt("at t=%.2f s", t_cross).c_str() : "never", rc.t_evac,
                               re.t_evac)};
}

Outcome criterion_10() {
  Scenario base = builtin_scenario("room_empty");
  base.initial.rho0 = 2.0;
  base.params.p0 = 0.5;
  const auto disc = discretize(base);
  std::vector<double> t_evac;
  std::string row;
  for (double v : {0.5, 1.0, 2.0, 4.0}) {
    Scenario sc = base;
    sc.params.v_max = v;
    sc.name = fmt("v_max=%g", v);
    t_evac.push_back(run_case(sc, disc).t_evac);
    row += fmt("%s%g:%.5g", row.empty() ? "" : " ", v, t_evac.back());
  }
  bool dec = true;
  for (std::size_t k = 1; k < t_evac.size(); ++k) dec = dec && t_evac[k] < t_evac[k - 1];
  return {dec, "T_evac by v_max " + row + (dec ? " strictly decreasing" : " NOT strictly decreasing")};
}

Outcome criterion_11() {
  // Half-scale corridor: every length halved, same densities and parameters.
  Scenario sc = builtin_scenario("corridor_two_exits");
  sc.name = "corridor_half_scale";
  sc.geometry.origin = {0.0, 3.0};
  sc.geometry.width = 50.0;
  sc.geometry.height = 10.0;
  sc.geometry.exits = {{Side::Bottom, 33.5, 0.6}, {Side::Bottom, 46.5, 0.6}};
  sc.geometry.exterior_depth = 1.5;
  sc.initial.region = {{0.0, 3.0}, {25.0, 13.0}};
  sc.mesh = {0.25, 4.0, 1.5};
  sc.params.p0 = 0.005;
  sc.stop.t_max = 30.0;
  const auto disc = discretize(sc);
  const auto& nodes = disc->mesh.nodes;
  const Rect room = sc.geometry.room();
  const double near = 3.0, far = 8.0;
  auto exit_distance = [&](const Vec2& x) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& e : sc.geometry.exits) d = std::min(d, norm(x - Vec2{e.center, room.lo.y}));
    return d;
  };
  double best = 0.0, best_t = 0.0, best_peak = 0.0, best_mean = 0.0;
  double next_sample = 1.0;
  run_case(sc, disc, [&](const SimClock& c, const State& s) {
    if (c.t < next_sample) return;
    next_sample += 1.0;
    double peak = 0.0, sum = 0.0, area = 0.0;
    for (Index i = 0; i < nodes.size(); ++i) {
      const Vec2 x = nodes[i];
      if (x.y < room.lo.y) continue;  // exit corridor outside the room
      const double d = exit_distance(x);
      if (d <= near) peak = std::max(peak, s.rho[i]);
      if (d >= far && s.rho[i] > 0.05) {
        sum += s.rho[i] * disc->dual.cell_area[i];
        area += disc->dual.cell_area[i];
      }
    }
    if (area > 0.0 && peak / (sum / area) > best) {
      best = peak / (sum / area);
      best_t = c.t;
      best_peak = peak;
      best_mean = sum / area;
    }
  });
  note("largest ratio at t=%.0f s: max density within %.0f m of an exit %.3f vs upstream mean %.3f", best_t, near,
       best_peak, best_mean);
  return {best > 1.5, fmt("near-exit maximum / upstream mean = %.3f > 1.5", best)};
}

struct Criterion {
  int id;
  const char* label;
  Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {1, "eikonal_order_strip", criterion_1},
    {2, "eikonal_order_five_columns", criterion_2},
    {3, "full_scheme_order", criterion_3},
    {4, "mass_conservation_closed_room", criterion_4},
    {5, "positivity", criterion_5},
    {6, "hughes_obstacle_insensitivity", criterion_6},
    {7, "clogging_signature", criterion_7},
    {8, "optimal_pressure_coefficient", criterion_8},
    {9, "five_column_inverse_braess", criterion_9},
    {10, "desired_speed_monotonicity", criterion_10},
    {11, "stop_and_go_half_corridor", criterion_11},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  int failed = 0, ran = 0;
  for (const auto& c : kCriteria) {
    if (only && c.id != only) continue;
    ++ran;
    std::printf("criterion %d (%s)\n", c.id, c.label);
    std::fflush(stdout);
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %d %s: %s [%.0f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.label, o.summary.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  if (ran == 0) {
    std::fprintf(stderr, "unknown criterion '%s' (1-11)\n", argv[1]);
    return 2;
  }
  return failed ? 1 : 0;
}
