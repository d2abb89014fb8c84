#pragma once

// Scenario description (geometry, initial crowd, parameters, run controls),
// the built-in evacuation layouts, and conversion into a solver Problem.

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "crowdflow/dual.hpp"
#include "crowdflow/errors.hpp"
#include "crowdflow/mesh_generator.hpp"
#include "crowdflow/physics.hpp"
#include "crowdflow/solver.hpp"

namespace crowdflow {

/// Uniform: rho0 (cell-averaged) on the rectangle `region`.
/// Strip: the piecewise-linear density of the strip eikonal benchmark,
/// sampled at the nodes; `region` and `rho0` are ignored.
enum class InitialProfile { Uniform, Strip };

struct InitialCondition {
  InitialProfile profile = InitialProfile::Uniform;
  Rect region;
  double rho0 = 0.0;  // ped/m^2
  Vec2 v0;            // m/s

  friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

struct OutputControls {
  std::vector<double> snapshot_times;  // s, sorted
  std::size_t series_every = 1;        // write every n-th step of M(t)

  friend bool operator==(const OutputControls&, const OutputControls&) = default;
};

struct Scenario {
  std::string name;
  RoomGeometry geometry;
  MeshControls mesh;
  InitialCondition initial;
  ModelParams params;
  StopRule stop;
  int recompute_every = 1;
  OutputControls output;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// rho(x) = x on [0, 0.5), 1 on [0.5, 1), x + 1 on [1, 1.5), 2.5 on [1.5, 2].
inline double strip_density(double x) {
  if (x < 0.5) return x;
  if (x < 1.0) return 1.0;
  if (x < 1.5) return x + 1.0;
  return 2.5;
}

inline void validate(const Scenario& s) {
  validate(s.params);
  validate_geometry(s.geometry, s.mesh);
  if (s.recompute_every < 1) throw ConfigError("recompute_every must be >= 1");
  if (!(s.stop.t_max > 0.0)) throw ConfigError("t_max must be positive");
  if (!(s.stop.mass_fraction >= 0.0 && s.stop.mass_fraction < 1.0)) throw ConfigError("mass_fraction must be in [0, 1)");
  if (s.output.series_every < 1) throw ConfigError("series_every must be >= 1");
  const auto& t = s.output.snapshot_times;
  if (!std::is_sorted(t.begin(), t.end())) throw ConfigError("snapshot times must be sorted");
  if (!t.empty() && t.front() < 0.0) throw ConfigError("snapshot times must be nonnegative");
  if (s.initial.profile == InitialProfile::Uniform) {
    if (!(s.initial.rho0 >= 0.0)) throw ConfigError("rho0 must be >= 0");
    const Rect& r = s.initial.region;
    const Rect room = s.geometry.room();
    const double tol = 1e-12 * std::max(s.geometry.width, s.geometry.height);
    if (!(r.lo.x < r.hi.x && r.lo.y < r.hi.y)) throw ConfigError("initial region must have positive area");
    if (r.lo.x < room.lo.x - tol || r.lo.y < room.lo.y - tol || r.hi.x > room.hi.x + tol || r.hi.y > room.hi.y + tol) {
      throw ConfigError("initial region must lie inside the evacuation room");
    }
  }
}

inline std::vector<std::string> builtin_names() {
  return {"room_empty",        "room_obstacle1",     "room_obstacle2", "room_obstacle3",
          "room_five_columns", "corridor_two_exits", "strip_test1"};
}

namespace detail {

inline Scenario room_base(std::string name) {
  Scenario s;
  s.name = std::move(name);
  s.geometry.width = 10.0;
  s.geometry.height = 6.0;
  s.geometry.exits = {{Side::Right, 3.0, 1.0}};
  s.mesh = {0.1, 2.0, 1.0};
  s.initial = {InitialProfile::Uniform, {{1.0, 1.0}, {5.0, 5.0}}, 1.0, {}};
  return s;
}

}  // namespace detail

/// Paper layouts. Rooms are 10 m x 6 m with a 1 m exit centred on the right
/// wall and rho0 = 1 on [1,5]^2 unless stated otherwise.
///
/// corridor_two_exits: a 100 m x 20 m corridor placed at y in [6, 26] so the
/// crowd block [0,50] x [6,26] is the left half of the corridor; the two 1.2 m
/// exits are on the bottom wall at x = 67 and x = 93. The experiment text
/// quotes rho_max = 10 while its figure caption uses 7; 7 is used here.
inline Scenario builtin_scenario(std::string_view name) {
  using detail::room_base;
  if (name == "room_empty") return room_base("room_empty");
  if (name == "room_obstacle1") {
    auto s = room_base("room_obstacle1");
    s.geometry.obstacles = {Circle{{8.5, 3.0}, 0.3}};
    return s;
  }
  if (name == "room_obstacle2") {
    auto s = room_base("room_obstacle2");
    s.geometry.obstacles = {Circle{{9.0, 2.5}, 0.2}, Circle{{8.0, 3.0}, 0.2}, Circle{{9.0, 3.5}, 0.2}};
    return s;
  }
  if (name == "room_obstacle3") {
    auto s = room_base("room_obstacle3");
    s.geometry.obstacles = {Rect{{7.5, 2.3}, {9.0, 2.5}}, Rect{{7.5, 3.5}, {9.0, 3.7}}};
    return s;
  }
  if (name == "room_five_columns") {
    auto s = room_base("room_five_columns");
    for (const Vec2 c : {Vec2{9.5, 2.0}, Vec2{9.0, 2.5}, Vec2{8.5, 3.0}, Vec2{9.0, 3.5}, Vec2{9.5, 4.0}}) {
      s.geometry.obstacles.push_back(Circle{c, 0.22});
    }
    return s;
  }
  if (name == "corridor_two_exits") {
    Scenario s;
    s.name = "corridor_two_exits";
    s.geometry.origin = {0.0, 6.0};
    s.geometry.width = 100.0;
    s.geometry.height = 20.0;
    s.geometry.exits = {{Side::Bottom, 67.0, 1.2}, {Side::Bottom, 93.0, 1.2}};
    s.mesh = {0.5, 4.0, 3.0};
    s.initial = {InitialProfile::Uniform, {{0.0, 6.0}, {50.0, 26.0}}, 3.0, {}};
    s.stop.t_max = 500.0;
    return s;
  }
  if (name == "strip_test1") {
    Scenario s;
    s.name = "strip_test1";
    s.geometry.width = 2.0;
    s.geometry.height = 0.2;
    s.geometry.exits = {{Side::Left, 0.1, 0.2}};
    s.geometry.exterior_depth = 0.0;
    s.mesh = {0.02, 1.0, 0.0};
    s.initial.profile = InitialProfile::Strip;
    return s;
  }
  std::string valid;
  for (const auto& n : builtin_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown scenario '" + std::string(name) + "'; valid names: " + valid);
}

/// Area of a convex polygon clipped to an axis-aligned rectangle.
inline double clipped_area(std::vector<Vec2> poly, const Rect& r) {
  auto clip = [&](auto inside, auto cut) {
    std::vector<Vec2> out;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const Vec2 a = poly[k], b = poly[(k + 1) % poly.size()];
      const bool ia = inside(a), ib = inside(b);
      if (ia) out.push_back(a);
      if (ia != ib) out.push_back(cut(a, b));
    }
    poly.swap(out);
  };
  auto lerp_x = [](double x) {
    return [x](const Vec2& a, const Vec2& b) { return a + ((x - a.x) / (b.x - a.x)) * (b - a); };
  };
  auto lerp_y = [](double y) {
    return [y](const Vec2& a, const Vec2& b) { return a + ((y - a.y) / (b.y - a.y)) * (b - a); };
  };
  clip([&](const Vec2& p) { return p.x >= r.lo.x; }, lerp_x(r.lo.x));
  clip([&](const Vec2& p) { return p.x <= r.hi.x; }, lerp_x(r.hi.x));
  clip([&](const Vec2& p) { return p.y >= r.lo.y; }, lerp_y(r.lo.y));
  clip([&](const Vec2& p) { return p.y <= r.hi.y; }, lerp_y(r.hi.y));
  double a = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) a += cross(poly[k], poly[(k + 1) % poly.size()]);
  return 0.5 * a;
}

/// True for triangles of the evacuation room (as opposed to exterior boxes).
inline std::vector<unsigned char> room_triangles(const Mesh& mesh, const Rect& room) {
  std::vector<unsigned char> in(mesh.num_triangles(), 0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) in[t] = room.contains(centroid(mesh, mesh.triangles[t]));
  return in;
}

/// |C_i intersected with the room| per node (the weights of M(t)).
inline std::vector<double> evac_areas(const Mesh& mesh, const Rect& room) {
  std::vector<double> w(mesh.num_nodes(), 0.0);
  const auto in = room_triangles(mesh, room);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (!in[t]) continue;
    const double third = signed_area(mesh, mesh.triangles[t]) / 3.0;
    for (Index v : mesh.triangles[t]) w[v] += third;
  }
  return w;
}

inline State initial_state(const Scenario& s, const Mesh& mesh, const DualGeometry& dual) {
  State st = State::vacuum(mesh.num_nodes());
  const auto& ic = s.initial;
  if (ic.profile == InitialProfile::Strip) {
    for (Index i = 0; i < mesh.num_nodes(); ++i) st.rho[i] = strip_density(mesh.nodes[i].x - s.geometry.origin.x);
  } else {
    // Exact cell averages: clip each median-dual piece to the region.
    const auto in = room_triangles(mesh, s.geometry.room());
    std::vector<double> covered(mesh.num_nodes(), 0.0);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      if (!in[t]) continue;
      const auto& tri = mesh.triangles[t];
      const Vec2 g = centroid(mesh, tri);
      for (int k = 0; k < 3; ++k) {
        const Vec2 p = mesh.nodes[tri[k]];
        const Vec2 next = 0.5 * (p + mesh.nodes[tri[(k + 1) % 3]]);
        const Vec2 prev = 0.5 * (p + mesh.nodes[tri[(k + 2) % 3]]);
        covered[tri[k]] += clipped_area({p, next, g, prev}, ic.region);
      }
    }
    for (Index i = 0; i < mesh.num_nodes(); ++i) st.rho[i] = ic.rho0 * covered[i] / dual.cell_area[i];
  }
  for (Index i = 0; i < mesh.num_nodes(); ++i) st.mom[i] = st.rho[i] * ic.v0;
  return st;
}

inline std::shared_ptr<const Discretization> discretize(const Scenario& s) {
  return std::make_shared<const Discretization>(generate_mesh(s.geometry, s.mesh));
}

inline Problem make_problem(const Scenario& s, std::shared_ptr<const Discretization> disc = nullptr) {
  validate(s);
  if (!disc) disc = discretize(s);
  Problem p;
  p.initial = initial_state(s, disc->mesh, disc->dual);
  p.evac_area = evac_areas(disc->mesh, s.geometry.room());
  p.params = s.params;
  p.disc = std::move(disc);
  return p;
}

inline RunOptions make_run_options(const Scenario& s) {
  RunOptions o;
  o.stop = s.stop;
  o.recompute_every = s.recompute_every;
  o.snapshot_times = s.output.snapshot_times;
  return o;
}

}  // namespace crowdflow
