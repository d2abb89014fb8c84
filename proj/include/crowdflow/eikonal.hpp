#pragma once

// Density-dependent eikonal problem |grad phi| = c(rho), phi = 0 on the
// outflow boundary, solved with local Hopf-Lax updates on triangles driven
// by an active-list Gauss-Seidel iteration; nodal P1 Galerkin gradient and
// the desired-direction field mu = -grad phi / |grad phi|.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crowdflow/dual.hpp"
#include "crowdflow/errors.hpp"
#include "crowdflow/mesh.hpp"
#include "crowdflow/physics.hpp"

namespace crowdflow {

inline constexpr double kUnset = std::numeric_limits<double>::infinity();

/// Below this gradient norm the direction field is set to zero.
inline constexpr double kGradEpsilon = 1e-12;

/// Running cost per node: 1 / V(rho), or the constant 1 / v_max.
inline std::vector<double> running_cost(std::span<const double> rho, const ModelParams& p) {
  std::vector<double> c(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    c[i] = p.cost == CostKind::Simple ? 1.0 / p.v_max : 1.0 / speed(rho[i], p);
  }
  return c;
}

/// Geometry of an apex seen from its opposite edge (x1, x2), in the frame
/// of the edge: `along` and `off` locate the apex relative to x2.
struct UpdateStencil {
  double d1 = 0.0;     // |apex - x1|
  double d2 = 0.0;     // |apex - x2|
  double len = 0.0;    // |x1 - x2|
  double along = 0.0;  // (apex - x2) . (x1 - x2) / len
  double off = 0.0;    // distance of the apex from the edge line

  static UpdateStencil make(const Vec2& x1, const Vec2& x2, const Vec2& apex) {
    const Vec2 a = x1 - x2;
    const Vec2 b = apex - x2;
    const double len = norm(a);
    return {norm(apex - x1), norm(b), len, dot(b, a) / len, std::abs(cross(a, b)) / len};
  }
};

/// Hopf-Lax update of the apex value from the opposite edge:
///   min over lambda in [0, 1] of lambda phi1 + (1 - lambda) phi2
///                               + c |apex - (lambda x1 + (1 - lambda) x2)|.
/// The interior stationary point has lambda len = along - off k / sqrt(1 - k^2)
/// with k = (phi1 - phi2) / (c len). An unset (infinite) endpoint reduces this
/// to the edge update of the other.
inline double local_update(double phi1, double phi2, const UpdateStencil& g, double c) {
  double best = std::min(phi1 + c * g.d1, phi2 + c * g.d2);
  if (!std::isfinite(phi1) || !std::isfinite(phi2) || !(c > 0.0)) return best;
  const double k = (phi1 - phi2) / (c * g.len);
  if (std::abs(k) < 1.0 && g.off > 0.0) {
    const double lam = (g.along - k * g.off / std::sqrt(1.0 - k * k)) / g.len;
    if (lam > 0.0 && lam < 1.0) {
      const double r = g.along - lam * g.len;
      best = std::min(best, lam * phi1 + (1.0 - lam) * phi2 + c * std::sqrt(r * r + g.off * g.off));
    }
  }
  return best;
}

inline double local_update(double phi1, double phi2, const Vec2& x1, const Vec2& x2, const Vec2& apex,
                           double c) {
  return local_update(phi1, phi2, UpdateStencil::make(x1, x2, apex), c);
}

struct EikonalOptions {
  // Absolute acceptance threshold; <= 0 accepts any decrease larger than
  // 1e-12 of the node's current value. A global threshold tied to the largest
  // cost freezes the first value in moderate cells once a jam drives
  // 1/V(rho) to huge values.
  double tolerance = -1.0;
  std::size_t max_updates_per_node = 100;
};

struct EikonalResult {
  std::vector<double> phi;
  std::size_t unreachable = 0;
  std::size_t updates = 0;
};

/// Reusable solver bound to one mesh. Node values only decrease from +inf,
/// so the iteration converges monotonically.
class EikonalSolver {
 public:
  explicit EikonalSolver(const Mesh& mesh) : nodes_(mesh.nodes) {
    const std::size_t n = mesh.num_nodes();
    if (n == 0) throw ConfigError("eikonal solver needs a non-empty mesh");
    fixed_.assign(n, 0);
    for (const auto& e : mesh.boundary_edges) {
      if (e.tag == BoundaryTag::Outflow) fixed_[e.nodes[0]] = fixed_[e.nodes[1]] = 1;
    }
    for (Index i = 0; i < n; ++i) {
      if (fixed_[i]) outflow_.push_back(i);
    }
    if (outflow_.empty()) throw ConfigError("eikonal problem needs at least one outflow node");

    opp_offsets_.assign(n + 1, 0);
    for (const auto& t : mesh.triangles) {
      for (Index v : t) ++opp_offsets_[v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) opp_offsets_[i + 1] += opp_offsets_[i];
    opposite_.resize(opp_offsets_.back());
    stencil_.resize(opp_offsets_.back());
    std::vector<std::size_t> fill(opp_offsets_.begin(), opp_offsets_.end() - 1);
    for (const auto& t : mesh.triangles) {
      for (int k = 0; k < 3; ++k) {
        const Index a = t[(k + 1) % 3], b = t[(k + 2) % 3];
        stencil_[fill[t[k]]] = UpdateStencil::make(nodes_[a], nodes_[b], nodes_[t[k]]);
        opposite_[fill[t[k]]++] = {a, b};
      }
    }
    topo_ = build_topology(mesh);
  }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::span<const Index> outflow_nodes() const { return outflow_; }

  EikonalResult solve(std::span<const double> cost, const EikonalOptions& opt = {}) const {
    const std::size_t n = nodes_.size();
    if (cost.size() != n) throw ConfigError("cost field size does not match the mesh");
    for (double c : cost) {
      if (!(c > 0.0) || !std::isfinite(c)) throw NumericalError("running cost must be positive and finite");
    }
    const bool absolute = opt.tolerance > 0.0;
    constexpr double kRelTol = 1e-12;

    EikonalResult res;
    res.phi.assign(n, kUnset);
    std::vector<unsigned char> queued(n, 0);
    std::vector<Index> ring(n);
    std::size_t head = 0, count = 0;
    // Active list with the "smallest label first" rule: a node whose value
    // is below that of the current front jumps the queue.
    auto push = [&](Index v) {
      if (fixed_[v] || queued[v]) return;
      queued[v] = 1;
      if (count > 0 && res.phi[v] < res.phi[ring[head]]) {
        head = (head + n - 1) % n;
        ring[head] = v;
      } else {
        ring[(head + count) % n] = v;
      }
      ++count;
    };

    for (Index i : outflow_) res.phi[i] = 0.0;
    for (Index i : outflow_) {
      const auto [b, e] = topo_.neighbors_of(i);
      for (auto it = b; it != e; ++it) push(*it);
    }

    const std::size_t max_updates = opt.max_updates_per_node * n;
    while (count > 0) {
      const Index i = ring[head];
      head = (head + 1) % n;
      --count;
      queued[i] = 0;
      const double old = res.phi[i];
      const double updated = candidate(i, res.phi, cost[i], old);
      const double tol = absolute ? opt.tolerance : std::isfinite(old) ? kRelTol * old : 0.0;
      if (!(updated < old - tol)) continue;
      res.phi[i] = updated;
      if (++res.updates > max_updates) {
        throw NumericalError("eikonal iteration did not converge", std::isfinite(old) ? std::abs(updated - old) : kUnset);
      }
      const auto [b, e] = topo_.neighbors_of(i);
      for (auto it = b; it != e; ++it) push(*it);
    }
    for (double v : res.phi) res.unreachable += std::isfinite(v) ? 0 : 1;
    return res;
  }

 private:
  // Smallest update below `best`; a triangle whose two values both exceed
  // `best` cannot improve on it.
  double candidate(Index i, const std::vector<double>& phi, double c, double best) const {
    for (std::size_t k = opp_offsets_[i]; k < opp_offsets_[i + 1]; ++k) {
      const auto [a, b] = opposite_[k];
      if (!(std::min(phi[a], phi[b]) < best)) continue;
      best = std::min(best, local_update(phi[a], phi[b], stencil_[k], c));
    }
    return best;
  }

  std::vector<Vec2> nodes_;
  std::vector<unsigned char> fixed_;
  std::vector<Index> outflow_;
  std::vector<std::size_t> opp_offsets_;
  std::vector<std::pair<Index, Index>> opposite_;
  std::vector<UpdateStencil> stencil_;
  Topology topo_;
};

/// One-shot solve. Throws NumericalError if any node is unreachable.
inline std::vector<double> solve_eikonal(const Mesh& mesh, std::span<const double> cost,
                                         const EikonalOptions& opt = {}) {
  auto res = EikonalSolver(mesh).solve(cost, opt);
  if (res.unreachable > 0) {
    throw NumericalError(std::to_string(res.unreachable) + " nodes unreachable from the outflow boundary");
  }
  return std::move(res.phi);
}

/// Nodal P1 Galerkin gradient: area-weighted average of the constant
/// triangle gradients over the triangles sharing the node.
inline std::vector<Vec2> p1_gradient(const Mesh& mesh, const DualGeometry& dual,
                                     std::span<const TriangleGradients> tri_grad,
                                     std::span<const double> phi) {
  std::vector<Vec2> g(mesh.num_nodes());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const auto& tg = tri_grad[t];
    const Vec2 gt = phi[tri[0]] * tg.grad[0] + phi[tri[1]] * tg.grad[1] + phi[tri[2]] * tg.grad[2];
    const Vec2 w = (tg.area / 3.0) * gt;
    for (Index v : tri) g[v] += w;
  }
  for (std::size_t i = 0; i < g.size(); ++i) g[i] /= dual.cell_area[i];
  return g;
}

inline std::vector<Vec2> p1_gradient(const Mesh& mesh, const DualGeometry& dual, std::span<const double> phi) {
  const auto tg = basis_gradients(mesh);
  return p1_gradient(mesh, dual, tg, phi);
}

inline Vec2 direction(const Vec2& grad) {
  const double len = norm(grad);
  return len >= kGradEpsilon ? -grad / len : Vec2{};
}

inline std::vector<Vec2> direction_field(std::span<const Vec2> grad) {
  std::vector<Vec2> mu(grad.size());
  std::transform(grad.begin(), grad.end(), mu.begin(), [](const Vec2& g) { return direction(g); });
  return mu;
}

struct PotentialField {
  std::vector<double> phi;
  std::vector<Vec2> grad;
  std::vector<Vec2> mu;
};

}  // namespace crowdflow
