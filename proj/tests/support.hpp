#pragma once

// Small meshes and helpers shared by the unit tests.

#include <random>

#include "crowdflow/mesh_generator.hpp"
#include "crowdflow/solver.hpp"

namespace crowdflow::fixture {

/// Rectangle [0,w]x[0,h] with one door on the left wall and the outflow on
/// the door itself.
inline Mesh rect_mesh(double w, double h, double target_h, double door_center, double door_width) {
  RoomGeometry g;
  g.width = w;
  g.height = h;
  g.exits = {{Side::Left, door_center, door_width}};
  g.exterior_depth = 0.0;
  return generate_mesh(g, {target_h, 1.0, 0.0});
}

/// The same mesh with every boundary edge turned into a wall.
inline Mesh closed(Mesh m) {
  for (auto& e : m.boundary_edges) e.tag = BoundaryTag::Wall;
  return m;
}

inline PotentialField still_potential(std::size_t n) {
  return {std::vector<double>(n, 0.0), std::vector<Vec2>(n), std::vector<Vec2>(n)};
}

/// Random admissible state: rho in [0, rho_max], |v| <= v_max.
inline State random_state(std::size_t n, const ModelParams& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  State s = State::vacuum(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.rho[i] = p.rho_max * u01(rng);
    const double speed = p.v_max * u01(rng);
    const double angle = 2.0 * 3.14159265358979323846 * u01(rng);
    s.mom[i] = s.rho[i] * speed * Vec2{std::cos(angle), std::sin(angle)};
  }
  return s;
}

inline double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace crowdflow::fixture
