#pragma once

// Room meshes: a graded tensor-product background grid over the bounding box
// of the room and its exterior exit regions, split into triangles, with
// rectangle obstacles cut along grid lines and circular obstacles carved by
// snapping the nearest nodes of every crossing edge onto the circle.
//
// An exit either lies on the outer boundary (exterior_depth == 0, the exit
// segment itself is the outflow boundary) or opens into an exterior box of
// the given depth whose far side is the outflow boundary. In the second case
// the room wall beside the exit is a zero-thickness partition: nodes on it
// are split so the two sides do not communicate.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "crowdflow/errors.hpp"
#include "crowdflow/mesh.hpp"

namespace crowdflow {

struct Circle {
  Vec2 center;
  double radius = 0.0;

  friend bool operator==(const Circle&, const Circle&) = default;
};

struct Rect {
  Vec2 lo;
  Vec2 hi;

  bool contains(const Vec2& p, double tol = 0.0) const {
    return p.x > lo.x - tol && p.x < hi.x + tol && p.y > lo.y - tol && p.y < hi.y + tol;
  }
  double area() const { return (hi.x - lo.x) * (hi.y - lo.y); }

  friend bool operator==(const Rect&, const Rect&) = default;
};

using Obstacle = std::variant<Circle, Rect>;

enum class Side { Left, Right, Bottom, Top };

/// Door on one side of the room. `center` is measured along the side
/// (y for Left/Right, x for Bottom/Top) in absolute coordinates.
struct ExitSegment {
  Side side = Side::Right;
  double center = 0.0;
  double width = 0.0;

  friend bool operator==(const ExitSegment&, const ExitSegment&) = default;
};

struct RoomGeometry {
  Vec2 origin{0.0, 0.0};
  double width = 0.0;
  double height = 0.0;
  std::vector<ExitSegment> exits;
  std::vector<Obstacle> obstacles;
  double exterior_depth = 3.0;

  Rect room() const { return {origin, {origin.x + width, origin.y + height}}; }

  friend bool operator==(const RoomGeometry&, const RoomGeometry&) = default;
};

struct MeshControls {
  double target_h = 0.1;
  double refine_factor = 1.0;  // spacing divisor inside refinement bands
  double refine_margin = 1.0;  // band half-width around exits and obstacles (m)

  friend bool operator==(const MeshControls&, const MeshControls&) = default;
};

namespace detail {

inline bool is_vertical(Side s) { return s == Side::Left || s == Side::Right; }

inline double side_coord(const Rect& room, Side s) {
  switch (s) {
    case Side::Left: return room.lo.x;
    case Side::Right: return room.hi.x;
    case Side::Bottom: return room.lo.y;
    case Side::Top: return room.hi.y;
  }
  return 0.0;
}

/// Extent of a side along its own direction.
inline std::pair<double, double> side_range(const Rect& room, Side s) {
  return is_vertical(s) ? std::pair{room.lo.y, room.hi.y} : std::pair{room.lo.x, room.hi.x};
}

struct ExteriorBox {
  Rect box;
  Side side;       // room side the box is attached to
  double far = 0;  // coordinate of the outflow side
};

inline std::optional<ExteriorBox> exterior_box(const Rect& room, const ExitSegment& e, double depth) {
  if (depth <= 0.0) return std::nullopt;
  const auto [lo, hi] = side_range(room, e.side);
  const double a = std::max(lo, e.center - 0.5 * e.width - depth);
  const double b = std::min(hi, e.center + 0.5 * e.width + depth);
  ExteriorBox out{{}, e.side, 0.0};
  switch (e.side) {
    case Side::Right: out.box = {{room.hi.x, a}, {room.hi.x + depth, b}}; out.far = room.hi.x + depth; break;
    case Side::Left: out.box = {{room.lo.x - depth, a}, {room.lo.x, b}}; out.far = room.lo.x - depth; break;
    case Side::Top: out.box = {{a, room.hi.y}, {b, room.hi.y + depth}}; out.far = room.hi.y + depth; break;
    case Side::Bottom: out.box = {{a, room.lo.y - depth}, {b, room.lo.y}}; out.far = room.lo.y - depth; break;
  }
  return out;
}

inline bool rects_overlap(const Rect& a, const Rect& b) {
  return a.lo.x < b.hi.x && b.lo.x < a.hi.x && a.lo.y < b.hi.y && b.lo.y < a.hi.y;
}

inline double rect_point_distance(const Rect& r, const Vec2& p) {
  const double dx = std::max({r.lo.x - p.x, 0.0, p.x - r.hi.x});
  const double dy = std::max({r.lo.y - p.y, 0.0, p.y - r.hi.y});
  return std::hypot(dx, dy);
}

inline Rect bounding_box(const Obstacle& o) {
  if (const auto* c = std::get_if<Circle>(&o)) {
    return {{c->center.x - c->radius, c->center.y - c->radius},
            {c->center.x + c->radius, c->center.y + c->radius}};
  }
  return std::get<Rect>(o);
}

inline bool obstacles_overlap(const Obstacle& a, const Obstacle& b) {
  const auto* ca = std::get_if<Circle>(&a);
  const auto* cb = std::get_if<Circle>(&b);
  if (ca && cb) return norm(ca->center - cb->center) < ca->radius + cb->radius;
  if (ca) return rect_point_distance(std::get<Rect>(b), ca->center) < ca->radius;
  if (cb) return rect_point_distance(std::get<Rect>(a), cb->center) < cb->radius;
  return rects_overlap(std::get<Rect>(a), std::get<Rect>(b));
}

/// Grid coordinates on [lo, hi]: every hard breakpoint is a grid line, band
/// edges are soft, spacing is h (or h / refine inside a band).
inline std::vector<double> build_axis(double lo, double hi, std::vector<double> hard,
                                      const std::vector<std::pair<double, double>>& bands, double h,
                                      double refine) {
  const double scale = std::max(1.0, hi - lo);
  const double merge_tol = 1e-9 * scale;
  const double h_fine = h / refine;
  hard.push_back(lo);
  hard.push_back(hi);
  std::vector<double> pts;
  for (double v : hard) {
    if (v >= lo - merge_tol && v <= hi + merge_tol) pts.push_back(std::clamp(v, lo, hi));
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(), [&](double a, double b) { return b - a < merge_tol; }),
            pts.end());
  if (refine > 1.0) {
    std::vector<double> soft;
    for (const auto& [a, b] : bands) {
      for (double v : {a, b}) {
        if (v > lo && v < hi) soft.push_back(v);
      }
    }
    std::sort(soft.begin(), soft.end());
    for (double v : soft) {
      const auto it = std::lower_bound(pts.begin(), pts.end(), v);
      const bool near_next = it != pts.end() && *it - v < 0.5 * h_fine;
      const bool near_prev = it != pts.begin() && v - *(it - 1) < 0.5 * h_fine;
      if (!near_next && !near_prev) pts.insert(it, v);
    }
  }
  std::vector<double> axis{pts.front()};
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double a = pts[k], b = pts[k + 1];
    const double mid = 0.5 * (a + b);
    bool fine = false;
    if (refine > 1.0) {
      for (const auto& [ba, bb] : bands) fine = fine || (mid > ba && mid < bb);
    }
    const double spacing = fine ? h_fine : h;
    const auto n = std::max<long>(1, static_cast<long>(std::ceil((b - a) / spacing - 1e-9)));
    for (long s = 1; s < n; ++s) axis.push_back(a + (b - a) * static_cast<double>(s) / static_cast<double>(n));
    axis.push_back(b);
  }
  return axis;
}

}  // namespace detail

/// Throws GeometryError for exits that do not fit on their wall, obstacles
/// that are not strictly inside the room, and overlapping obstacles or
/// exterior regions.
inline void validate_geometry(const RoomGeometry& g, const MeshControls& c) {
  if (!(c.target_h > 0.0)) throw GeometryError("target_h must be positive");
  if (!(c.refine_factor >= 1.0)) throw GeometryError("refine_factor must be >= 1");
  if (!(g.width > 0.0 && g.height > 0.0)) throw GeometryError("room dimensions must be positive");
  if (g.exterior_depth < 0.0) throw GeometryError("exterior depth must be non-negative");
  if (g.exits.empty()) throw GeometryError("room needs at least one exit");
  const Rect room = g.room();
  const double tol = 1e-12 * std::max(g.width, g.height);
  for (const auto& e : g.exits) {
    if (!(e.width > 0.0)) throw GeometryError("exit width must be positive");
    const auto [lo, hi] = detail::side_range(room, e.side);
    if (e.center - 0.5 * e.width < lo - tol || e.center + 0.5 * e.width > hi + tol) {
      throw GeometryError("exit wider than its wall segment or off the wall");
    }
  }
  for (std::size_t a = 0; a < g.exits.size(); ++a) {
    for (std::size_t b = a + 1; b < g.exits.size(); ++b) {
      const auto& ea = g.exits[a];
      const auto& eb = g.exits[b];
      if (ea.side == eb.side && std::abs(ea.center - eb.center) < 0.5 * (ea.width + eb.width)) {
        throw GeometryError("exits overlap");
      }
      const auto ba = detail::exterior_box(room, ea, g.exterior_depth);
      const auto bb = detail::exterior_box(room, eb, g.exterior_depth);
      if (ba && bb && detail::rects_overlap(ba->box, bb->box)) {
        throw GeometryError("exterior regions of two exits overlap");
      }
    }
  }
  for (const auto& o : g.obstacles) {
    if (const auto* circ = std::get_if<Circle>(&o)) {
      if (!(circ->radius > 0.0)) throw GeometryError("circle radius must be positive");
    } else {
      const auto& r = std::get<Rect>(o);
      if (!(r.hi.x > r.lo.x && r.hi.y > r.lo.y)) throw GeometryError("degenerate rectangle obstacle");
    }
    const Rect bb = detail::bounding_box(o);
    if (!(bb.lo.x > room.lo.x && bb.hi.x < room.hi.x && bb.lo.y > room.lo.y && bb.hi.y < room.hi.y)) {
      throw GeometryError("obstacle is not strictly inside the room");
    }
  }
  for (std::size_t a = 0; a < g.obstacles.size(); ++a) {
    for (std::size_t b = a + 1; b < g.obstacles.size(); ++b) {
      if (detail::obstacles_overlap(g.obstacles[a], g.obstacles[b])) throw GeometryError("obstacles overlap");
    }
  }
}

inline Mesh generate_mesh(const RoomGeometry& g, const MeshControls& c) {
  validate_geometry(g, c);
  const Rect room = g.room();
  const double scale = std::max(g.width, g.height);
  const double tol = 1e-9 * scale;
  const double margin = c.refine_margin;

  std::vector<detail::ExteriorBox> boxes;
  for (const auto& e : g.exits) {
    if (auto b = detail::exterior_box(room, e, g.exterior_depth)) boxes.push_back(*b);
  }

  Rect bbox = room;
  std::vector<double> hard_x{room.lo.x, room.hi.x}, hard_y{room.lo.y, room.hi.y};
  std::vector<std::pair<double, double>> band_x, band_y;
  for (const auto& b : boxes) {
    bbox.lo.x = std::min(bbox.lo.x, b.box.lo.x);
    bbox.lo.y = std::min(bbox.lo.y, b.box.lo.y);
    bbox.hi.x = std::max(bbox.hi.x, b.box.hi.x);
    bbox.hi.y = std::max(bbox.hi.y, b.box.hi.y);
    hard_x.insert(hard_x.end(), {b.box.lo.x, b.box.hi.x});
    hard_y.insert(hard_y.end(), {b.box.lo.y, b.box.hi.y});
  }
  for (const auto& e : g.exits) {
    const double a = e.center - 0.5 * e.width, b = e.center + 0.5 * e.width;
    const double wall = detail::side_coord(room, e.side);
    if (detail::is_vertical(e.side)) {
      hard_y.insert(hard_y.end(), {a, b});
      band_y.emplace_back(a - margin, b + margin);
      band_x.emplace_back(wall - margin, wall + margin);
    } else {
      hard_x.insert(hard_x.end(), {a, b});
      band_x.emplace_back(a - margin, b + margin);
      band_y.emplace_back(wall - margin, wall + margin);
    }
  }
  for (const auto& o : g.obstacles) {
    const Rect bb = detail::bounding_box(o);
    if (std::holds_alternative<Rect>(o)) {
      hard_x.insert(hard_x.end(), {bb.lo.x, bb.hi.x});
      hard_y.insert(hard_y.end(), {bb.lo.y, bb.hi.y});
    }
    band_x.emplace_back(bb.lo.x - margin, bb.hi.x + margin);
    band_y.emplace_back(bb.lo.y - margin, bb.hi.y + margin);
  }

  // Midlines as grid lines (unless they would leave a sliver) so that a
  // mirror-symmetric room gets a mirror-symmetric mesh.
  const Vec2 centre = 0.5 * (bbox.lo + bbox.hi);
  auto add_midline = [&](std::vector<double>& hard, double m) {
    const double gap = 0.5 * c.target_h / std::max(1.0, c.refine_factor);
    for (double v : hard) {
      if (std::abs(v - m) < gap) return;
    }
    hard.push_back(m);
  };
  add_midline(hard_x, centre.x);
  add_midline(hard_y, centre.y);

  const auto xs = detail::build_axis(bbox.lo.x, bbox.hi.x, hard_x, band_x, c.target_h, c.refine_factor);
  const auto ys = detail::build_axis(bbox.lo.y, bbox.hi.y, hard_y, band_y, c.target_h, c.refine_factor);
  const std::size_t nx = xs.size(), ny = ys.size();

  std::vector<Vec2> nodes;
  nodes.reserve(nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) nodes.push_back({xs[i], ys[j]});
  }

  // Region per grid cell: 0 = room, k + 1 = exterior box k, -1 = not meshed.
  auto region_of = [&](const Vec2& p) -> int {
    if (room.contains(p)) {
      for (const auto& o : g.obstacles) {
        if (const auto* r = std::get_if<Rect>(&o); r && r->contains(p)) return -1;
      }
      return 0;
    }
    for (std::size_t k = 0; k < boxes.size(); ++k) {
      if (boxes[k].box.contains(p)) return static_cast<int>(k) + 1;
    }
    return -1;
  };

  std::vector<Triangle> tris;
  std::vector<int> tri_region;
  for (std::size_t j = 0; j + 1 < ny; ++j) {
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const Vec2 mid{0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])};
      const int region = region_of(mid);
      if (region < 0) continue;
      const Index a = j * nx + i, b = a + 1, cc = a + nx + 1, d = a + nx;
      // Alternating diagonals: the pattern is its own mirror image about
      // every grid line.
      if ((i + j) % 2 == 0) {
        tris.push_back({a, b, cc});
        tris.push_back({a, cc, d});
      } else {
        tris.push_back({a, b, d});
        tris.push_back({b, cc, d});
      }
      tri_region.insert(tri_region.end(), {region, region});
    }
  }

  // Split nodes on the partition wall between the room and an exterior box.
  if (!boxes.empty()) {
    std::vector<unsigned char> touches_room(nodes.size(), 0), touches_ext(nodes.size(), 0);
    for (std::size_t t = 0; t < tris.size(); ++t) {
      for (Index v : tris[t]) (tri_region[t] == 0 ? touches_room : touches_ext)[v] = 1;
    }
    std::vector<Index> copy_of(nodes.size(), std::numeric_limits<Index>::max());
    const std::size_t original = nodes.size();
    for (Index v = 0; v < original; ++v) {
      if (!touches_room[v] || !touches_ext[v]) continue;
      const Vec2 p = nodes[v];
      bool on_side = false, in_gap = false;
      for (Side s : {Side::Left, Side::Right, Side::Bottom, Side::Top}) {
        const double along = detail::is_vertical(s) ? p.y : p.x;
        const double across = detail::is_vertical(s) ? p.x : p.y;
        const auto [lo, hi] = detail::side_range(room, s);
        if (std::abs(across - detail::side_coord(room, s)) > tol || along < lo - tol || along > hi + tol) continue;
        on_side = true;
        for (const auto& e : g.exits) {
          if (e.side == s && along >= e.center - 0.5 * e.width - tol && along <= e.center + 0.5 * e.width + tol) {
            in_gap = true;
          }
        }
      }
      if (on_side && !in_gap) {
        copy_of[v] = nodes.size();
        nodes.push_back(p);
      }
    }
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (tri_region[t] == 0) continue;
      for (Index& v : tris[t]) {
        if (v < original && copy_of[v] != std::numeric_limits<Index>::max()) v = copy_of[v];
      }
    }
  }

  // Circles: move endpoints of edges crossing the circle radially onto it,
  // shortest moves first, refusing any move that would squash an incident
  // triangle below 10% of its area; then drop triangles centred inside.
  for (const auto& o : g.obstacles) {
    const auto* circ = std::get_if<Circle>(&o);
    if (!circ) continue;
    const double r = circ->radius;
    auto dist = [&](const Vec2& p) { return norm(p - circ->center); };
    const double reach = r + 3.0 * c.target_h;
    std::map<Index, std::vector<std::size_t>> incident;
    std::map<std::pair<Index, Index>, int> edges;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      const auto& tri = tris[t];
      if (std::min({dist(nodes[tri[0]]), dist(nodes[tri[1]]), dist(nodes[tri[2]])}) > reach) continue;
      for (int k = 0; k < 3; ++k) {
        incident[tri[k]].push_back(t);
        edges[edge_key(tri[k], tri[(k + 1) % 3])] = 1;
      }
    }
    std::vector<std::pair<double, Index>> candidates;
    for (const auto& [e, unused] : edges) {
      const double da = dist(nodes[e.first]), db = dist(nodes[e.second]);
      if ((da < r) == (db < r)) continue;
      candidates.emplace_back(std::abs(da - r), e.first);
      candidates.emplace_back(std::abs(db - r), e.second);
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    auto area2 = [&](const Triangle& t) { return orient2d(nodes[t[0]], nodes[t[1]], nodes[t[2]]); };
    std::map<std::size_t, double> original_area;
    for (const auto& [v, ts] : incident) {
      for (std::size_t t : ts) original_area.emplace(t, area2(tris[t]));
    }
    std::vector<unsigned char> snapped(nodes.size(), 0);
    for (const auto& [move, v] : candidates) {
      if (snapped[v]) continue;
      const Vec2 old = nodes[v];
      const Vec2 rel = old - circ->center;
      nodes[v] = circ->center + rel * (r / norm(rel));
      bool ok = true;
      for (std::size_t t : incident[v]) ok = ok && area2(tris[t]) > 0.1 * original_area[t];
      if (ok) {
        snapped[v] = 1;
      } else {
        nodes[v] = old;
      }
    }
    const double on_tol = 1e-12 * scale;
    auto carve = [&] {
      std::vector<Triangle> kept;
      std::vector<int> kept_region;
      for (std::size_t t = 0; t < tris.size(); ++t) {
        const Vec2 cen = (nodes[tris[t][0]] + nodes[tris[t][1]] + nodes[tris[t][2]]) / 3.0;
        if (dist(cen) > r + on_tol) {
          kept.push_back(tris[t]);
          kept_region.push_back(tri_region[t]);
        }
      }
      const bool changed = kept.size() != tris.size();
      tris.swap(kept);
      tri_region.swap(kept_region);
      return changed;
    };
    if (!carve()) throw GeometryError("circle obstacle is not resolved by the mesh; reduce target_h");

    // Nodes whose first move was refused may survive inside the disc; with
    // the inner triangles gone, retry them against the remaining ones only,
    // accepting thinner (but never inverted) triangles.
    for (int pass = 0; pass < 4; ++pass) {
      std::map<Index, std::vector<std::size_t>> around;
      for (std::size_t t = 0; t < tris.size(); ++t) {
        for (Index v : tris[t]) {
          if (dist(nodes[v]) < r - on_tol) around[v].push_back(t);
        }
      }
      if (around.empty()) break;
      std::vector<std::pair<double, Index>> inside;
      for (const auto& [v, ts] : around) inside.emplace_back(r - dist(nodes[v]), v);
      std::sort(inside.begin(), inside.end());
      bool moved = false;
      for (const auto& [depth, v] : inside) {
        const Vec2 old = nodes[v];
        std::vector<double> before;
        for (std::size_t t : around[v]) before.push_back(area2(tris[t]));
        const Vec2 rel = old - circ->center;
        nodes[v] = circ->center + rel * (r / norm(rel));
        bool ok = true;
        for (std::size_t k = 0; k < before.size(); ++k) ok = ok && area2(tris[around[v][k]]) > 0.02 * before[k];
        if (ok) {
          moved = true;
        } else {
          nodes[v] = old;
        }
      }
      if (!carve() && !moved) break;
    }
    // What is left are slivers spiking into the disc (their snap would land
    // on an existing boundary node): remove them.
    {
      std::vector<Triangle> kept;
      std::vector<int> kept_region;
      for (std::size_t t = 0; t < tris.size(); ++t) {
        bool spike = false;
        for (Index v : tris[t]) spike = spike || dist(nodes[v]) < r - on_tol;
        if (!spike) {
          kept.push_back(tris[t]);
          kept_region.push_back(tri_region[t]);
        }
      }
      tris.swap(kept);
      tri_region.swap(kept_region);
    }
    // Boundary chords on the circle longer than the local spacing: split at
    // the arc midpoint, which lies inside the adjacent triangle.
    const double max_chord = c.target_h / std::max(1.0, c.refine_factor) * (1.0 + 1e-9);
    auto on_circle = [&](Index v) { return std::abs(dist(nodes[v]) - r) < 1e-9 * scale; };
    for (bool split = true; split;) {
      split = false;
      std::map<std::pair<Index, Index>, int> uses;
      for (const auto& t : tris) {
        for (int k = 0; k < 3; ++k) ++uses[edge_key(t[k], t[(k + 1) % 3])];
      }
      const std::size_t count = tris.size();
      for (std::size_t t = 0; t < count; ++t) {
        for (int k = 0; k < 3; ++k) {
          const Index a = tris[t][k], b = tris[t][(k + 1) % 3], o = tris[t][(k + 2) % 3];
          if (uses[edge_key(a, b)] != 1 || !on_circle(a) || !on_circle(b)) continue;
          if (norm(nodes[b] - nodes[a]) <= max_chord) continue;
          const Vec2 rel = 0.5 * (nodes[a] + nodes[b]) - circ->center;
          const Vec2 m = circ->center + rel * (r / norm(rel));
          if (!(orient2d(nodes[a], m, nodes[o]) > 0.0 && orient2d(m, nodes[b], nodes[o]) > 0.0)) continue;
          const Index mi = static_cast<Index>(nodes.size());
          nodes.push_back(m);
          tris[t] = {a, mi, o};
          tris.push_back({mi, b, o});
          tri_region.push_back(tri_region[t]);
          split = true;
          break;
        }
      }
    }
  }

  // Compact unused nodes.
  std::vector<Index> remap(nodes.size(), std::numeric_limits<Index>::max());
  Mesh mesh;
  for (auto& t : tris) {
    for (Index& v : t) {
      if (remap[v] == std::numeric_limits<Index>::max()) {
        remap[v] = mesh.nodes.size();
        mesh.nodes.push_back(nodes[v]);
      }
      v = remap[v];
    }
  }
  mesh.triangles = std::move(tris);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (!(signed_area(mesh, mesh.triangles[t]) > 0.0)) {
      throw GeometryError("obstacle carving produced an inverted triangle; adjust target_h");
    }
  }

  for (const auto& e : topological_boundary(mesh)) {
    const Vec2 m = 0.5 * (mesh.nodes[e[0]] + mesh.nodes[e[1]]);
    BoundaryTag tag = BoundaryTag::Wall;
    for (const auto& b : boxes) {
      const bool vertical = detail::is_vertical(b.side);
      const double across = vertical ? m.x : m.y;
      if (std::abs(across - b.far) < tol && b.box.contains(m, tol)) tag = BoundaryTag::Outflow;
    }
    if (boxes.empty()) {
      for (const auto& ex : g.exits) {
        const bool vertical = detail::is_vertical(ex.side);
        const double across = vertical ? m.x : m.y;
        const double along = vertical ? m.y : m.x;
        if (std::abs(across - detail::side_coord(room, ex.side)) < tol &&
            std::abs(along - ex.center) < 0.5 * ex.width + tol) {
          tag = BoundaryTag::Outflow;
        }
      }
    }
    mesh.boundary_edges.push_back({e, tag});
  }
  validate(mesh);
  return mesh;
}

}  // namespace crowdflow
