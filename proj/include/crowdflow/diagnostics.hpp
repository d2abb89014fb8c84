#pragma once

// Evacuation functionals, cross-mesh L1 errors and least-squares order fits.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "crowdflow/dual.hpp"
#include "crowdflow/errors.hpp"
#include "crowdflow/mesh.hpp"
#include "crowdflow/solver.hpp"
#include "crowdflow/text.hpp"

namespace crowdflow {

using MassSeries = std::vector<MassSample>;

/// Sum of rho_i * w_i, where w_i is the part of cell i inside the evacuation region.
inline double total_mass(std::span<const double> rho, std::span<const double> evac_area) {
  return weighted_mass(rho, evac_area);
}

/// Left rectangle rule: sum of M(t_k) (t_{k+1} - t_k).
inline double evac_time(std::span<const MassSample> series) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < series.size(); ++k) acc += series[k].mass * (series[k + 1].t - series[k].t);
  return acc;
}

/// Bucket grid over triangles for point location with P1 interpolation.
class TriangleLocator {
 public:
  explicit TriangleLocator(const Mesh& mesh) : mesh_(&mesh) {
    if (mesh.triangles.empty()) throw ConfigError("point location needs triangles");
    lo_ = hi_ = mesh.nodes[mesh.triangles.front()[0]];
    for (const auto& p : mesh.nodes) {
      lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
      hi_ = {std::max(hi_.x, p.x), std::max(hi_.y, p.y)};
    }
    const double side = std::sqrt(static_cast<double>(mesh.triangles.size()));
    const double w = std::max(hi_.x - lo_.x, 1e-300), h = std::max(hi_.y - lo_.y, 1e-300);
    const double cell = std::sqrt(w * h) / std::max(side, 1.0);
    nx_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(w / cell)));
    ny_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(h / cell)));
    dx_ = w / static_cast<double>(nx_);
    dy_ = h / static_cast<double>(ny_);
    buckets_.resize(nx_ * ny_);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& tri = mesh.triangles[t];
      Vec2 a = mesh.nodes[tri[0]], b = a;
      for (Index v : tri) {
        a = {std::min(a.x, mesh.nodes[v].x), std::min(a.y, mesh.nodes[v].y)};
        b = {std::max(b.x, mesh.nodes[v].x), std::max(b.y, mesh.nodes[v].y)};
      }
      const auto [i0, j0] = bucket(a);
      const auto [i1, j1] = bucket(b);
      for (std::size_t j = j0; j <= j1; ++j) {
        for (std::size_t i = i0; i <= i1; ++i) buckets_[j * nx_ + i].push_back(t);
      }
    }
  }

  struct Hit {
    std::size_t triangle = 0;
    std::array<double, 3> bary{};
    bool inside = false;
  };

  /// Containing triangle, or the nearest one (barycentric coordinates then
  /// extrapolate linearly).
  Hit locate(const Vec2& x) const {
    const double tol = 1e-12;
    const auto [bi, bj] = bucket(x);
    for (std::size_t t : buckets_[bj * nx_ + bi]) {
      const auto b = barycentric(t, x);
      if (b[0] >= -tol && b[1] >= -tol && b[2] >= -tol) return {t, b, true};
    }
    Hit best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < mesh_->triangles.size(); ++t) {
      const double d = distance_to(t, x);
      if (d < best_d) {
        best_d = d;
        best = {t, barycentric(t, x), false};
      }
    }
    return best;
  }

  /// P1 value at x in the triangle located for `probe` (default: x itself).
  double interpolate(std::span<const double> field, const Vec2& x, bool* inside = nullptr,
                     const Vec2* probe = nullptr) const {
    const Hit h = locate(probe ? *probe : x);
    if (inside) *inside = h.inside;
    const auto& tri = mesh_->triangles[h.triangle];
    const auto b = probe ? barycentric(h.triangle, x) : h.bary;
    return b[0] * field[tri[0]] + b[1] * field[tri[1]] + b[2] * field[tri[2]];
  }

 private:
  std::pair<std::size_t, std::size_t> bucket(const Vec2& p) const {
    auto clampi = [](double v, std::size_t n) {
      if (!(v > 0.0)) return std::size_t{0};
      return std::min(n - 1, static_cast<std::size_t>(v));
    };
    return {clampi((p.x - lo_.x) / dx_, nx_), clampi((p.y - lo_.y) / dy_, ny_)};
  }

  std::array<double, 3> barycentric(std::size_t t, const Vec2& x) const {
    const auto& tri = mesh_->triangles[t];
    const Vec2 a = mesh_->nodes[tri[0]], b = mesh_->nodes[tri[1]], c = mesh_->nodes[tri[2]];
    const double area = orient2d(a, b, c);
    const double l0 = orient2d(x, b, c) / area;
    const double l1 = orient2d(a, x, c) / area;
    return {l0, l1, 1.0 - l0 - l1};
  }

  double distance_to(std::size_t t, const Vec2& x) const {
    const auto b = barycentric(t, x);
    if (b[0] >= 0.0 && b[1] >= 0.0 && b[2] >= 0.0) return 0.0;
    const auto& tri = mesh_->triangles[t];
    double d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      const Vec2 p = mesh_->nodes[tri[k]], q = mesh_->nodes[tri[(k + 1) % 3]];
      const Vec2 e = q - p;
      const double s = std::clamp(dot(x - p, e) / norm2(e), 0.0, 1.0);
      d = std::min(d, norm(x - (p + s * e)));
    }
    return d;
  }

  const Mesh* mesh_;
  Vec2 lo_, hi_;
  std::size_t nx_ = 1, ny_ = 1;
  double dx_ = 1.0, dy_ = 1.0;
  std::vector<std::vector<std::size_t>> buckets_;
};

struct L1Result {
  double error = 0.0;
  std::size_t extrapolated = 0;  // coarse nodes found outside every reference triangle
};

/// Location probes for coarse nodes: nudged a hair into an incident triangle
/// so that nodes on a zero-thickness wall pick a triangle on the right side.
inline std::vector<Vec2> probe_points(const Mesh& mesh) {
  std::vector<Vec2> pts(mesh.nodes);
  std::vector<unsigned char> done(mesh.num_nodes(), 0);
  for (const auto& t : mesh.triangles) {
    const Vec2 g = centroid(mesh, t);
    for (Index v : t) {
      if (done[v]) continue;
      done[v] = 1;
      pts[v] = mesh.nodes[v] + 1e-9 * (g - mesh.nodes[v]);
    }
  }
  return pts;
}

/// E = sum_i |u_h(x_i) - u_ref(x_i)| |C_i| with the reference interpolated
/// linearly on its own mesh.
inline L1Result l1_error(std::span<const double> coarse, const Mesh& coarse_mesh, std::span<const double> cell_area,
                         std::span<const double> reference, const Mesh& ref_mesh) {
  if (coarse.size() != coarse_mesh.num_nodes() || reference.size() != ref_mesh.num_nodes() ||
      cell_area.size() != coarse.size()) {
    throw ConfigError("field sizes do not match their meshes");
  }
  const TriangleLocator loc(ref_mesh);
  const auto pts = probe_points(coarse_mesh);
  L1Result r;
  for (Index i = 0; i < coarse.size(); ++i) {
    bool inside = true;
    const double u = loc.interpolate(reference, coarse_mesh.nodes[i], &inside, &pts[i]);
    if (!inside) ++r.extrapolated;
    r.error += std::abs(coarse[i] - u) * cell_area[i];
  }
  return r;
}

/// Same error against an exact solution.
inline double l1_error(std::span<const double> coarse, const Mesh& coarse_mesh, std::span<const double> cell_area,
                       const std::function<double(const Vec2&)>& exact) {
  double e = 0.0;
  for (Index i = 0; i < coarse.size(); ++i) e += std::abs(coarse[i] - exact(coarse_mesh.nodes[i])) * cell_area[i];
  return e;
}

struct ConvergenceLevel {
  std::size_t cells = 0;
  double h = 0.0;
  double error = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceLevel> levels;
  double p = 0.0;
  double C = 0.0;
  std::vector<std::string> warnings;
};

/// h_k = sqrt(scale / N_k), with scale = N_ref or the domain area.
inline double grid_spacing(double scale, std::size_t cells) { return std::sqrt(scale / static_cast<double>(cells)); }

/// Ordinary least squares of log E against log h: log E = log C + p log h.
inline ConvergenceStudy estimate_order(std::vector<ConvergenceLevel> levels) {
  ConvergenceStudy st;
  st.levels = std::move(levels);
  if (st.levels.size() < 3) throw ConfigError("order estimate needs at least 3 levels");
  std::vector<double> x, y;
  for (const auto& l : st.levels) {
    if (!(l.h > 0.0)) throw ConfigError("grid spacing must be positive");
    if (l.error == 0.0) {
      st.warnings.push_back("level N=" + std::to_string(l.cells) + " has zero error; excluded from the fit");
      continue;
    }
    if (!(l.error > 0.0) || !std::isfinite(l.error)) throw NumericalError("error must be positive and finite");
    x.push_back(std::log(l.h));
    y.push_back(std::log(l.error));
  }
  if (x.size() < 2) throw NumericalError("fewer than two usable levels after excluding zero errors");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (!(sxx > 0.0)) throw NumericalError("grid spacings must not all coincide");
  st.p = sxy / sxx;
  st.C = std::exp(my - st.p * mx);
  return st;
}

inline std::string series_csv(std::span<const MassSample> series, std::size_t cadence = 1) {
  std::ostringstream os;
  os << "t,M\n";
  cadence = std::max<std::size_t>(cadence, 1);
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (k % cadence != 0 && k + 1 != series.size()) continue;
    os << text::format_double(series[k].t) << ',' << text::format_double(series[k].mass) << '\n';
  }
  return os.str();
}

inline std::string convergence_csv(const ConvergenceStudy& st) {
  std::ostringstream os;
  os << "N,h,E\n";
  for (const auto& l : st.levels) {
    os << l.cells << ',' << text::format_double(l.h) << ',' << text::format_double(l.error) << '\n';
  }
  os << "# p=" << text::format_double(st.p) << ",C=" << text::format_double(st.C) << '\n';
  return os.str();
}

/// Coefficient of determination of a straight-line fit y ~ a + b x.
inline double linear_r2(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return 1.0;
  return sxy * sxy / (sxx * syy);
}

}  // namespace crowdflow
