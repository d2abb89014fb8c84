#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "crowdflow/errors.hpp"
#include "crowdflow/vec2.hpp"

namespace crowdflow {

using Index = std::size_t;
using Triangle = std::array<Index, 3>;

enum class BoundaryTag : std::uint8_t { Wall, Outflow };

struct BoundaryEdge {
  std::array<Index, 2> nodes{};
  BoundaryTag tag = BoundaryTag::Wall;

  friend bool operator==(const BoundaryEdge&, const BoundaryEdge&) = default;
};

/// Conforming triangulation with tagged boundary edges. Triangles are
/// counter-clockwise.
struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<Triangle> triangles;
  std::vector<BoundaryEdge> boundary_edges;

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_triangles() const { return triangles.size(); }

  friend bool operator==(const Mesh&, const Mesh&) = default;
};

inline double signed_area(const Mesh& mesh, const Triangle& t) {
  return 0.5 * orient2d(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
}

inline Vec2 centroid(const Mesh& mesh, const Triangle& t) {
  return (mesh.nodes[t[0]] + mesh.nodes[t[1]] + mesh.nodes[t[2]]) / 3.0;
}

inline double total_area(const Mesh& mesh) {
  double a = 0.0;
  for (const auto& t : mesh.triangles) a += signed_area(mesh, t);
  return a;
}

inline std::pair<Index, Index> edge_key(Index a, Index b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

/// Edges used by exactly one triangle, oriented as they appear in that
/// (counter-clockwise) triangle, so the domain lies to their left.
inline std::vector<std::array<Index, 2>> topological_boundary(const Mesh& mesh) {
  std::map<std::pair<Index, Index>, std::pair<int, std::array<Index, 2>>> count;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const Index a = t[k], b = t[(k + 1) % 3];
      auto& entry = count[edge_key(a, b)];
      ++entry.first;
      entry.second = {a, b};
    }
  }
  std::vector<std::array<Index, 2>> out;
  for (const auto& [key, entry] : count) {
    if (entry.first == 1) out.push_back(entry.second);
  }
  return out;
}

/// Checks orientation, conformity and boundary tagging; throws GeometryError.
inline void validate(const Mesh& mesh) {
  const std::size_t n = mesh.num_nodes();
  if (mesh.triangles.empty()) throw GeometryError("mesh has no triangles");
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (Index v : tri) {
      if (v >= n) throw GeometryError("triangle " + std::to_string(t) + " references missing node");
    }
    if (!(signed_area(mesh, tri) > 0.0)) {
      throw GeometryError("triangle " + std::to_string(t) + " has non-positive area");
    }
  }
  std::map<std::pair<Index, Index>, int> uses;
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const auto key = edge_key(tri[k], tri[(k + 1) % 3]);
      if (++uses[key] > 2) throw GeometryError("edge shared by more than two triangles");
    }
  }
  std::map<std::pair<Index, Index>, int> tagged;
  for (const auto& be : mesh.boundary_edges) {
    const auto key = edge_key(be.nodes[0], be.nodes[1]);
    auto it = uses.find(key);
    if (it == uses.end() || it->second != 1) {
      throw GeometryError("tagged boundary edge is not on the mesh boundary");
    }
    if (++tagged[key] > 1) throw GeometryError("boundary edge tagged twice");
  }
  for (const auto& [key, count] : uses) {
    if (count == 1 && !tagged.count(key)) throw GeometryError("untagged boundary edge");
  }
}

/// Node adjacency in compressed row form; derived once from an immutable Mesh.
struct Topology {
  std::vector<std::size_t> tri_offsets;  // node -> incident triangles
  std::vector<Index> node_triangles;
  std::vector<std::size_t> nbr_offsets;  // node -> neighbouring nodes
  std::vector<Index> neighbors;

  std::pair<const Index*, const Index*> triangles_of(Index i) const {
    return {node_triangles.data() + tri_offsets[i], node_triangles.data() + tri_offsets[i + 1]};
  }
  std::pair<const Index*, const Index*> neighbors_of(Index i) const {
    return {neighbors.data() + nbr_offsets[i], neighbors.data() + nbr_offsets[i + 1]};
  }
};

inline Topology build_topology(const Mesh& mesh) {
  const std::size_t n = mesh.num_nodes();
  Topology topo;
  topo.tri_offsets.assign(n + 1, 0);
  for (const auto& t : mesh.triangles) {
    for (Index v : t) ++topo.tri_offsets[v + 1];
  }
  std::partial_sum(topo.tri_offsets.begin(), topo.tri_offsets.end(), topo.tri_offsets.begin());
  topo.node_triangles.resize(topo.tri_offsets.back());
  std::vector<std::size_t> fill(topo.tri_offsets.begin(), topo.tri_offsets.end() - 1);
  for (Index t = 0; t < mesh.triangles.size(); ++t) {
    for (Index v : mesh.triangles[t]) topo.node_triangles[fill[v]++] = t;
  }

  std::vector<std::vector<Index>> nb(n);
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      nb[t[k]].push_back(t[(k + 1) % 3]);
      nb[t[k]].push_back(t[(k + 2) % 3]);
    }
  }
  topo.nbr_offsets.assign(n + 1, 0);
  for (Index i = 0; i < n; ++i) {
    std::sort(nb[i].begin(), nb[i].end());
    nb[i].erase(std::unique(nb[i].begin(), nb[i].end()), nb[i].end());
    topo.nbr_offsets[i + 1] = topo.nbr_offsets[i] + nb[i].size();
  }
  topo.neighbors.reserve(topo.nbr_offsets.back());
  for (const auto& list : nb) topo.neighbors.insert(topo.neighbors.end(), list.begin(), list.end());
  return topo;
}

}  // namespace crowdflow
