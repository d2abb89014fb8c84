#pragma once

// Explicit time integration: transport stage with face fluxes, wall
// velocity projection, relaxation source stage, and the per-step eikonal
// coupling that provides the desired direction mu^n.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crowdflow/dual.hpp"
#include "crowdflow/eikonal.hpp"
#include "crowdflow/errors.hpp"
#include "crowdflow/mesh.hpp"
#include "crowdflow/physics.hpp"

namespace crowdflow {

struct State {
  std::vector<double> rho;
  std::vector<Vec2> mom;

  std::size_t size() const { return rho.size(); }
  Conserved at(Index i) const { return {rho[i], mom[i]}; }

  static State vacuum(std::size_t n) { return {std::vector<double>(n, 0.0), std::vector<Vec2>(n)}; }
};

struct SimClock {
  double t = 0.0;
  std::size_t step_index = 0;
  double dt_last = 0.0;
};

struct StopRule {
  double mass_fraction = 0.01;
  double t_max = 500.0;

  friend bool operator==(const StopRule&, const StopRule&) = default;
};

/// Velocity constraint at a node owning wall facets: one slip direction to
/// remove, or `pin` when walls of two different orientations meet.
struct WallConstraint {
  Index node = 0;
  Vec2 normal;
  bool pin = false;
};

/// Groups wall facet normals per node into orientations (within 60 degrees).
/// Opposite orientations cancel: they belong to the tip of a zero-thickness
/// wall, where the flow turns around the wall end.
inline std::vector<WallConstraint> build_wall_constraints(const DualGeometry& dual) {
  std::vector<std::vector<Vec2>> per_node(dual.cell_area.size());
  for (const auto& f : dual.boundary_facets) {
    if (f.tag == BoundaryTag::Wall) per_node[f.node].push_back(f.length * f.normal);
  }
  std::vector<WallConstraint> out;
  for (Index i = 0; i < per_node.size(); ++i) {
    if (per_node[i].empty()) continue;
    std::vector<Vec2> clusters;
    for (const Vec2& v : per_node[i]) {
      bool merged = false;
      for (Vec2& c : clusters) {
        if (dot(c, v) > 0.5 * norm(c) * norm(v)) {
          c += v;
          merged = true;
          break;
        }
      }
      if (!merged) clusters.push_back(v);
    }
    std::vector<unsigned char> dead(clusters.size(), 0);
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        if (!dead[a] && !dead[b] && dot(clusters[a], clusters[b]) < -0.5 * norm(clusters[a]) * norm(clusters[b])) {
          dead[a] = dead[b] = 1;
        }
      }
    }
    std::vector<Vec2> live;
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      if (!dead[a]) live.push_back(clusters[a] / norm(clusters[a]));
    }
    if (live.size() == 1) out.push_back({i, live.front(), false});
    if (live.size() > 1) out.push_back({i, live.front(), true});
  }
  return out;
}

/// Immutable per-mesh data shared by every run on that mesh.
struct Discretization {
  Mesh mesh;
  DualGeometry dual;
  std::vector<TriangleGradients> tri_grad;
  std::vector<double> length_scale;  // |C_i| / length of the non-wall part of its boundary
  std::vector<WallConstraint> walls;

  explicit Discretization(Mesh m) : mesh(std::move(m)) {
    validate(mesh);
    dual = build_dual(mesh);
    tri_grad = basis_gradients(mesh);
    std::vector<double> open(mesh.num_nodes(), 0.0);
    for (const auto& f : dual.faces) {
      open[f.i] += f.length;
      open[f.j] += f.length;
    }
    for (const auto& b : dual.boundary_facets) {
      if (b.tag != BoundaryTag::Wall) open[b.node] += b.length;
    }
    length_scale.resize(mesh.num_nodes());
    for (Index i = 0; i < mesh.num_nodes(); ++i) {
      length_scale[i] = open[i] > 0.0 ? dual.cell_area[i] / open[i] : std::numeric_limits<double>::infinity();
    }
    walls = build_wall_constraints(dual);
  }

  std::size_t size() const { return mesh.num_nodes(); }
};

/// Lower bound on the wave speed used for the time step.
inline constexpr double kMinWaveSpeed = 1e-6;

/// CFL time step dt = cfl * min_i |C_i| / sum_j |e_ij| sigma_ij over the
/// faces of C_i that can carry mass (wall facets carry none). sigma_ij bounds
/// the rate at which mass leaves C_i through the face: max(|sL|, |sR|, |v_i.n|)
/// for the second-order model, v_max for the Hughes model. For a uniform
/// sigma this is cfl * l_i / sigma with l_i = |C_i| / open perimeter.
/// Einfeldt speeds of every interior face and boundary facet for one state,
/// shared between the time-step selection and the flux evaluation.
struct FaceSpeeds {
  std::vector<WaveSpeeds> faces;
  std::vector<WaveSpeeds> facets;
};

inline double cfl_dt(const State& s, const Discretization& d, const ModelParams& p, FaceSpeeds* cache = nullptr) {
  const std::size_t n = d.size();
  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(s.rho[i]) || !std::isfinite(s.mom[i].x) || !std::isfinite(s.mom[i].y)) {
      throw NumericalError("non-finite state in time-step computation");
    }
  }
  double dt = std::numeric_limits<double>::infinity();
  if (p.model == ModelKind::Hughes) {
    const double sigma = hughes_wavespeed_bound(p);
    for (Index i = 0; i < n; ++i) dt = std::min(dt, d.length_scale[i] / sigma);
    return p.cfl * dt;
  }
  std::vector<double> rate(n, 0.0);
  FaceSpeeds local;
  FaceSpeeds& fs = cache ? *cache : local;
  fs.faces.resize(d.dual.faces.size());
  fs.facets.resize(d.dual.boundary_facets.size());
  auto face_speed = [&](const Conserved& ui, const Conserved& uj, const Vec2& nrm, WaveSpeeds& ws) {
    ws = einfeldt_speeds(ui, uj, nrm, p);
    return std::max({std::abs(ws.left), std::abs(ws.right), std::abs(dot(velocity(ui), nrm)),
                     std::abs(dot(velocity(uj), nrm)), kMinWaveSpeed});
  };
  for (std::size_t k = 0; k < d.dual.faces.size(); ++k) {
    const auto& f = d.dual.faces[k];
    const double r = f.length * face_speed(s.at(f.i), s.at(f.j), f.normal, fs.faces[k]);
    rate[f.i] += r;
    rate[f.j] += r;
  }
  for (std::size_t k = 0; k < d.dual.boundary_facets.size(); ++k) {
    const auto& b = d.dual.boundary_facets[k];
    const Conserved ui = s.at(b.node);
    const double r = b.length * face_speed(ui, ghost_state(ui, b.normal, b.tag, p), b.normal, fs.facets[k]);
    if (b.tag != BoundaryTag::Wall) rate[b.node] += r;
  }
  for (Index i = 0; i < n; ++i) {
    if (rate[i] > 0.0) dt = std::min(dt, d.dual.cell_area[i] / rate[i]);
  }
  return p.cfl * dt;
}

/// Zero the wall-normal velocity component at wall nodes.
inline void project_wall_velocity(State& s, std::span<const WallConstraint> walls) {
  for (const auto& w : walls) {
    Vec2& m = s.mom[w.node];
    m = w.pin ? Vec2{} : m - dot(m, w.normal) * w.normal;
  }
}

struct StepReport {
  double outflow_rate = 0.0;  // mass per second leaving through outflow facets
  double wall_rate = 0.0;     // mass per second through wall facets (zero up to roundoff)
  std::size_t clamped = 0;    // cells whose roundoff-negative density was reset to 0
  double min_density = 0.0;   // smallest density after transport, before clamping
};

/// Densities in (-kNegativeRoundoff, 0) are treated as roundoff and reset to 0.
inline constexpr double kNegativeRoundoff = 1e-12;

/// Advances the state by one splitting step:
///   U* = U - dt/|C_i| sum |e_ij| F(U_i, U_j, n_ij)      (transport)
///   wall projection of U* (second order only)
///   U^{n+1} = U* + dt S(U*)                               (source, second order only)
/// `speeds`, when given, must come from cfl_dt on the same state.
inline StepReport step(State& s, const PotentialField& pot, const Discretization& d, const ModelParams& p,
                       double dt, const FaceSpeeds* speeds = nullptr) {
  const std::size_t n = d.size();
  StepReport rep;
  std::vector<Flux> res(n);
  if (p.model == ModelKind::SecondOrder) {
    const bool cached = speeds && speeds->faces.size() == d.dual.faces.size() &&
                        speeds->facets.size() == d.dual.boundary_facets.size();
    for (std::size_t k = 0; k < d.dual.faces.size(); ++k) {
      const auto& f = d.dual.faces[k];
      Flux fl = hll_flux(s.at(f.i), s.at(f.j), f.normal, p, cached ? &speeds->faces[k] : nullptr);
      fl.mass *= f.length;
      fl.mom *= f.length;
      res[f.i].mass -= fl.mass;
      res[f.i].mom -= fl.mom;
      res[f.j] += fl;
    }
    for (std::size_t k = 0; k < d.dual.boundary_facets.size(); ++k) {
      const auto& b = d.dual.boundary_facets[k];
      const Conserved ui = s.at(b.node);
      Flux fl = hll_flux(ui, ghost_state(ui, b.normal, b.tag, p), b.normal, p, cached ? &speeds->facets[k] : nullptr);
      res[b.node].mass -= fl.mass * b.length;
      res[b.node].mom -= fl.mom * b.length;
      (b.tag == BoundaryTag::Outflow ? rep.outflow_rate : rep.wall_rate) += fl.mass * b.length;
    }
  } else {
    for (const auto& f : d.dual.faces) {
      const double fl = f.length * lax_friedrichs_flux(s.rho[f.i], s.rho[f.j], pot.mu[f.i], pot.mu[f.j], f.normal, p);
      res[f.i].mass -= fl;
      res[f.j].mass += fl;
    }
    for (const auto& b : d.dual.boundary_facets) {
      const double fl = b.length * hughes_boundary_flux(s.rho[b.node], pot.mu[b.node], b.normal, b.tag, p);
      res[b.node].mass -= fl;
      (b.tag == BoundaryTag::Outflow ? rep.outflow_rate : rep.wall_rate) += fl;
    }
  }

  rep.min_density = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    const double w = dt / d.dual.cell_area[i];
    double rho = s.rho[i] + w * res[i].mass;
    if (!std::isfinite(rho)) throw NumericalError("non-finite density after transport");
    rep.min_density = std::min(rep.min_density, rho);
    if (rho < 0.0) {
      if (rho < -kNegativeRoundoff * std::max(1.0, p.rho_max)) {
        throw NumericalError("negative density " + std::to_string(rho) + " at node " + std::to_string(i), rho);
      }
      rho = 0.0;
      ++rep.clamped;
    }
    s.rho[i] = rho;
    if (p.model == ModelKind::SecondOrder) s.mom[i] += w * res[i].mom;
  }

  if (p.model == ModelKind::SecondOrder) {
    project_wall_velocity(s, d.walls);
    for (Index i = 0; i < n; ++i) {
      if (s.rho[i] <= kVacuumDensity) {
        s.mom[i] = {};
        continue;
      }
      const Flux src = source(s.at(i), pot.mu[i], p);
      s.mom[i] += dt * src.mom;
      if (!std::isfinite(s.mom[i].x) || !std::isfinite(s.mom[i].y)) {
        throw NumericalError("non-finite momentum after source stage");
      }
    }
  }
  return rep;
}

/// Eikonal solve on the current density plus gradient and direction field.
class PotentialSolver {
 public:
  PotentialSolver(std::shared_ptr<const Discretization> d, EikonalOptions opt = {})
      : disc_(std::move(d)), eikonal_(disc_->mesh), opt_(opt) {}

  PotentialField compute(std::span<const double> rho, const ModelParams& p) const {
    auto res = eikonal_.solve(running_cost(rho, p), opt_);
    if (res.unreachable > 0) {
      throw NumericalError(std::to_string(res.unreachable) + " nodes unreachable from the outflow boundary");
    }
    PotentialField pf;
    pf.phi = std::move(res.phi);
    pf.grad = p1_gradient(disc_->mesh, disc_->dual, disc_->tri_grad, pf.phi);
    pf.mu = direction_field(pf.grad);
    return pf;
  }

 private:
  std::shared_ptr<const Discretization> disc_;
  EikonalSolver eikonal_;
  EikonalOptions opt_;
};

/// Prepared inputs of one simulation.
struct Problem {
  std::shared_ptr<const Discretization> disc;
  State initial;
  std::vector<double> evac_area;  // |C_i| restricted to the evacuation room
  ModelParams params;
};

struct MassSample {
  double t = 0.0;
  double mass = 0.0;
};

struct DtStats {
  std::size_t steps = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

struct RunReport {
  std::vector<MassSample> series;  // one sample per step, starting at t = 0
  double t_evac = 0.0;             // sum of M^n dt^n (ped s)
  std::string stop_reason;
  double stop_time = 0.0;          // clock time when the stop rule fired (s)
  DtStats dt;
  std::size_t clamped = 0;           // roundoff-negative densities reset to 0, summed over steps
  double min_density = 0.0;          // smallest pre-clamp density seen after any transport stage
  std::vector<std::string> snapshots;
  State final_state;
  PotentialField final_potential;
};

/// Thrown when a run cannot continue; carries everything computed so far.
class RunAborted : public NumericalError {
 public:
  RunAborted(const std::string& what, RunReport partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const RunReport& partial() const { return partial_; }

 private:
  RunReport partial_;
};

struct SnapshotRequest {
  double t = 0.0;
  const State* state = nullptr;
  const PotentialField* potential = nullptr;
};

struct RunOptions {
  StopRule stop;
  int recompute_every = 1;
  std::vector<double> snapshot_times;  // sorted; the clock lands on them exactly
  EikonalOptions eikonal;
  std::function<std::string(const SnapshotRequest&)> on_snapshot;  // returns the written path
  std::function<void(const SimClock&, const State&)> on_step;
};

inline double weighted_mass(std::span<const double> rho, std::span<const double> weight) {
  double m = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) m += rho[i] * weight[i];
  return m;
}

inline RunReport run(const Problem& prob, const RunOptions& opt) {
  validate(prob.params);
  if (opt.recompute_every < 1) throw ConfigError("recompute_every must be >= 1");
  if (!(opt.stop.t_max > 0.0)) throw ConfigError("t_max must be positive");
  if (!(opt.stop.mass_fraction >= 0.0 && opt.stop.mass_fraction < 1.0)) {
    throw ConfigError("mass_fraction must be in [0, 1)");
  }
  if (!std::is_sorted(opt.snapshot_times.begin(), opt.snapshot_times.end())) {
    throw ConfigError("snapshot times must be sorted");
  }
  const Discretization& d = *prob.disc;
  const ModelParams& p = prob.params;
  PotentialSolver potentials(prob.disc, opt.eikonal);

  RunReport rep;
  State s = prob.initial;
  SimClock clock;
  const double m0 = weighted_mass(s.rho, prob.evac_area);
  double mass = m0;
  rep.series.push_back({0.0, m0});
  std::size_t next_snap = 0;
  double dt_sum = 0.0;
  PotentialField pot;
  FaceSpeeds speeds;

  auto abort = [&](const std::string& why) {
    rep.stop_reason = "aborted: " + why;
    rep.stop_time = clock.t;
    rep.final_state = s;
    rep.final_potential = pot;
    throw RunAborted(why, rep);
  };
  auto take_snapshots = [&](bool need_potential) {
    while (next_snap < opt.snapshot_times.size() && opt.snapshot_times[next_snap] <= clock.t + 1e-12) {
      if (opt.on_snapshot) {
        if (need_potential) pot = potentials.compute(s.rho, p);
        rep.snapshots.push_back(opt.on_snapshot({clock.t, &s, &pot}));
      }
      ++next_snap;
    }
  };

  try {
    pot = potentials.compute(s.rho, p);
    take_snapshots(false);
    while (true) {
      if (m0 <= 0.0) {
        rep.stop_reason = "empty";
        break;
      }
      if (mass <= opt.stop.mass_fraction * m0) {
        rep.stop_reason = "mass_fraction";
        break;
      }
      if (clock.t >= opt.stop.t_max * (1.0 - 1e-14)) {
        rep.stop_reason = "t_max";
        break;
      }
      if (clock.step_index > 0 && clock.step_index % static_cast<std::size_t>(opt.recompute_every) == 0) {
        pot = potentials.compute(s.rho, p);
      }
      double dt = cfl_dt(s, d, p, &speeds);
      dt = std::min(dt, opt.stop.t_max - clock.t);
      if (next_snap < opt.snapshot_times.size()) dt = std::min(dt, opt.snapshot_times[next_snap] - clock.t);
      if (!(dt > 0.0)) abort("non-positive time step");
      const StepReport sr = step(s, pot, d, p, dt, &speeds);
      rep.clamped += sr.clamped;
      rep.min_density = clock.step_index == 0 ? sr.min_density : std::min(rep.min_density, sr.min_density);
      rep.t_evac += mass * dt;
      clock.t += dt;
      clock.dt_last = dt;
      ++clock.step_index;
      mass = weighted_mass(s.rho, prob.evac_area);
      rep.series.push_back({clock.t, mass});
      rep.dt.min = clock.step_index == 1 ? dt : std::min(rep.dt.min, dt);
      rep.dt.max = std::max(rep.dt.max, dt);
      dt_sum += dt;
      if (opt.on_step) opt.on_step(clock, s);
      take_snapshots(true);
    }
  } catch (const RunAborted&) {
    throw;
  } catch (const std::exception& e) {
    abort(e.what());
  }
  rep.dt.steps = clock.step_index;
  rep.dt.mean = clock.step_index > 0 ? dt_sum / static_cast<double>(clock.step_index) : 0.0;
  rep.stop_time = clock.t;
  rep.final_state = std::move(s);
  rep.final_potential = std::move(pot);
  return rep;
}

}  // namespace crowdflow
