#pragma once

// Vertex-centred median-dual control volumes. Each triangle is split among
// its vertices by joining the centroid to the three edge midpoints; every
// mesh edge (i, j) then carries a dual face made of one or two
// midpoint-to-centroid segments.

#include <array>
#include <map>
#include <utility>
#include <vector>

#include "crowdflow/mesh.hpp"

namespace crowdflow {

/// Dual face between cells i < j. `normal` points from i towards j and
/// `length` is the norm of the summed segment normals, so that per-cell
/// sums of length * normal close exactly.
struct DualFace {
  Index i = 0;
  Index j = 0;
  double length = 0.0;
  Vec2 normal;
};

/// Half of a boundary edge attributed to one of its end nodes.
struct BoundaryFacet {
  Index node = 0;
  double length = 0.0;
  Vec2 normal;  // outward unit normal
  BoundaryTag tag = BoundaryTag::Wall;
};

struct DualGeometry {
  std::vector<double> cell_area;
  std::vector<double> perimeter;
  std::vector<DualFace> faces;
  std::vector<BoundaryFacet> boundary_facets;
};

inline DualGeometry build_dual(const Mesh& mesh) {
  const std::size_t n = mesh.num_nodes();
  DualGeometry dual;
  dual.cell_area.assign(n, 0.0);
  dual.perimeter.assign(n, 0.0);

  std::map<std::pair<Index, Index>, Vec2> face_vec;
  std::map<std::pair<Index, Index>, Index> opposite;
  for (const auto& t : mesh.triangles) {
    const double third = signed_area(mesh, t) / 3.0;
    const Vec2 g = centroid(mesh, t);
    for (int k = 0; k < 3; ++k) {
      dual.cell_area[t[k]] += third;
      const Index a = t[k], b = t[(k + 1) % 3];
      const Vec2 m = 0.5 * (mesh.nodes[a] + mesh.nodes[b]);
      const Vec2 u = g - m;
      const Vec2 s{u.y, -u.x};  // clockwise rotation: points from a to b in a CCW triangle
      const auto key = edge_key(a, b);
      face_vec[key] += (a < b) ? s : -s;
      opposite[key] = t[(k + 2) % 3];
    }
  }
  dual.faces.reserve(face_vec.size());
  for (const auto& [key, s] : face_vec) {
    const double len = norm(s);
    dual.faces.push_back({key.first, key.second, len, s / len});
    dual.perimeter[key.first] += len;
    dual.perimeter[key.second] += len;
  }

  dual.boundary_facets.reserve(2 * mesh.boundary_edges.size());
  for (const auto& be : mesh.boundary_edges) {
    const Vec2 pa = mesh.nodes[be.nodes[0]];
    const Vec2 pb = mesh.nodes[be.nodes[1]];
    const Vec2 d = pb - pa;
    const double len = norm(d);
    Vec2 nrm = Vec2{d.y, -d.x} / len;
    const Vec2 inner = mesh.nodes[opposite.at(edge_key(be.nodes[0], be.nodes[1]))];
    if (dot(nrm, inner - pa) > 0.0) nrm = -nrm;
    for (Index v : be.nodes) {
      dual.boundary_facets.push_back({v, 0.5 * len, nrm, be.tag});
      dual.perimeter[v] += 0.5 * len;
    }
  }
  return dual;
}

/// Constant gradients of the three linear basis functions on a triangle.
struct TriangleGradients {
  double area = 0.0;
  std::array<Vec2, 3> grad{};
};

inline std::vector<TriangleGradients> basis_gradients(const Mesh& mesh) {
  std::vector<TriangleGradients> out;
  out.reserve(mesh.num_triangles());
  for (const auto& t : mesh.triangles) {
    const Vec2 p0 = mesh.nodes[t[0]], p1 = mesh.nodes[t[1]], p2 = mesh.nodes[t[2]];
    const double two_a = orient2d(p0, p1, p2);
    TriangleGradients tg;
    tg.area = 0.5 * two_a;
    tg.grad[0] = Vec2{p1.y - p2.y, p2.x - p1.x} / two_a;
    tg.grad[1] = Vec2{p2.y - p0.y, p0.x - p2.x} / two_a;
    tg.grad[2] = Vec2{p0.y - p1.y, p1.x - p0.x} / two_a;
    out.push_back(tg);
  }
  return out;
}

}  // namespace crowdflow
