#pragma once

// Closure laws and face flux kernels for the first-order (Hughes) model and
// the second-order isentropic model with relaxation towards the desired
// velocity V(rho) mu.

#include <algorithm>
#include <cmath>
#include <string>

#include "crowdflow/errors.hpp"
#include "crowdflow/mesh.hpp"
#include "crowdflow/vec2.hpp"

namespace crowdflow {

enum class ModelKind { Hughes, SecondOrder };
enum class CostKind { Simple, DensityDriven };

/// Boundary flux on outflow facets for the first-order model.
/// Paper: the constant rho_max V(rho_max), never more than the cell can
/// supply. Free: upwind flux rho V(rho) max(mu.n, 0) of the interior state.
enum class HughesOutflow { Paper, Free };

/// Below this density velocity is taken as zero and momentum is discarded.
inline constexpr double kVacuumDensity = 1e-8;

struct ModelParams {
  double v_max = 2.0;    // m/s
  double tau = 0.61;     // s
  double rho_max = 7.0;  // ped/m^2
  double p0 = 0.005;
  double gamma = 2.0;
  double alpha = 7.5;
  double cfl = 0.9;
  ModelKind model = ModelKind::SecondOrder;
  CostKind cost = CostKind::DensityDriven;
  HughesOutflow hughes_outflow = HughesOutflow::Paper;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

inline void validate(const ModelParams& p) {
  auto fail = [](const std::string& what) { throw ConfigError("invalid parameter: " + what); };
  if (!(p.v_max > 0.0)) fail("v_max must be > 0");
  if (!(p.tau > 0.0)) fail("tau must be > 0");
  if (!(p.rho_max > 0.0)) fail("rho_max must be > 0");
  if (!(p.p0 >= 0.0)) fail("p0 must be >= 0");
  if (!(p.gamma > 1.0)) fail("gamma must be > 1");
  if (!(p.alpha >= 0.0)) fail("alpha must be >= 0");
  if (!(p.cfl > 0.0 && p.cfl <= 1.0)) fail("cfl must be in (0, 1]");
}

/// Cell state: density and momentum (momentum unused by the Hughes model).
struct Conserved {
  double rho = 0.0;
  Vec2 mom;
};

/// Normal flux through a face: mass and momentum components.
struct Flux {
  double mass = 0.0;
  Vec2 mom;

  Flux& operator+=(const Flux& o) { mass += o.mass; mom += o.mom; return *this; }
};

inline double speed(double rho, const ModelParams& p) {
  const double r = rho / p.rho_max;
  return p.v_max * std::exp(-p.alpha * r * r);
}

/// rho^e with shortcuts for the small integer exponents used in practice.
inline double power(double rho, double e) {
  if (e == 1.0) return rho;
  if (e == 2.0) return rho * rho;
  if (e == 3.0) return rho * rho * rho;
  if (e == 4.0) return (rho * rho) * (rho * rho);
  return std::pow(rho, e);
}

inline double pressure(double rho, const ModelParams& p) { return p.p0 * power(rho, p.gamma); }

inline double sound_speed(double rho, const ModelParams& p) {
  if (rho <= 0.0) return 0.0;
  return std::sqrt(p.gamma * p.p0 * power(rho, p.gamma - 1.0));
}

/// d(rho V(rho)) / d rho.
inline double flux_derivative(double rho, const ModelParams& p) {
  const double r = rho / p.rho_max;
  return speed(rho, p) * (1.0 - 2.0 * p.alpha * r * r);
}

/// Global wave-speed bound of the first-order model (|mu| = 1).
inline double hughes_wavespeed_bound(const ModelParams& p) { return p.v_max; }

inline double lf_viscosity(double rho_i, double rho_j, const ModelParams& p) {
  return std::max(std::abs(flux_derivative(rho_i, p)), std::abs(flux_derivative(rho_j, p)));
}

inline Vec2 velocity(const Conserved& u) {
  return u.rho > kVacuumDensity ? u.mom / u.rho : Vec2{};
}

struct WaveSpeeds {
  double left = 0.0;
  double right = 0.0;
};

/// Einfeldt bounds; the averaged sound speed is sqrt(P'(rho_bar)) with
/// rho_bar the arithmetic mean density.
inline WaveSpeeds einfeldt_speeds(const Conserved& ul, const Conserved& ur, const Vec2& n,
                                  const ModelParams& p) {
  const bool vac_l = ul.rho <= kVacuumDensity;
  const bool vac_r = ur.rho <= kVacuumDensity;
  if (vac_l && vac_r) return {0.0, 0.0};
  const double vnl = dot(velocity(ul), n);
  const double vnr = dot(velocity(ur), n);
  const double sl = sound_speed(ul.rho, p);
  const double sr = sound_speed(ur.rho, p);
  const double wl = std::sqrt(std::max(ul.rho, 0.0));
  const double wr = std::sqrt(std::max(ur.rho, 0.0));
  const double v_roe = (wl * vnl + wr * vnr) / (wl + wr);
  const double s_bar = sound_speed(0.5 * (ul.rho + ur.rho), p);
  return {std::min(vnl - sl, v_roe - s_bar), std::max(v_roe + s_bar, vnr + sr)};
}

namespace detail {

struct FrameState {
  double rho, mn, mt;
};

inline void check_finite(const Conserved& u) {
  if (!std::isfinite(u.rho) || !std::isfinite(u.mom.x) || !std::isfinite(u.mom.y)) {
    throw NumericalError("non-finite state passed to flux kernel");
  }
}

}  // namespace detail

/// Two-wave HLL flux of the isentropic system across a face with unit normal n.
/// The tangential momentum is carried as a third component of the same
/// two-wave combination.
/// `speeds`, when given, must equal einfeldt_speeds(ul, ur, n, p).
inline Flux hll_flux(const Conserved& ul, const Conserved& ur, const Vec2& n, const ModelParams& p,
                     const WaveSpeeds* speeds = nullptr) {
  detail::check_finite(ul);
  detail::check_finite(ur);
  const WaveSpeeds ws = speeds ? *speeds : einfeldt_speeds(ul, ur, n, p);
  if (ws.left == 0.0 && ws.right == 0.0 && ul.rho <= kVacuumDensity && ur.rho <= kVacuumDensity) {
    return {};
  }
  const Vec2 t = perp(n);
  auto frame = [&](const Conserved& u) {
    const Vec2 m = u.rho > kVacuumDensity ? u.mom : Vec2{};
    return detail::FrameState{u.rho, dot(m, n), dot(m, t)};
  };
  auto phys = [&](const detail::FrameState& u) {
    const double vn = u.rho > kVacuumDensity ? u.mn / u.rho : 0.0;
    return detail::FrameState{u.mn, u.mn * vn + pressure(u.rho, p), u.mt * vn};
  };
  const auto l = frame(ul), r = frame(ur);
  const auto fl = phys(l), fr = phys(r);
  const double sl = ws.left, sr = ws.right;

  detail::FrameState f;
  if (sl > 0.0) {
    f = fl;
  } else if (sr < 0.0) {
    f = fr;
  } else if (sr - sl <= 0.0) {
    f = {0.5 * (fl.rho + fr.rho), 0.5 * (fl.mn + fr.mn), 0.5 * (fl.mt + fr.mt)};
  } else {
    const double inv = 1.0 / (sr - sl);
    const double ss = sl * sr;
    f.rho = (sr * fl.rho - sl * fr.rho + ss * (r.rho - l.rho)) * inv;
    f.mn = (sr * fl.mn - sl * fr.mn + ss * (r.mn - l.mn)) * inv;
    f.mt = (sr * fl.mt - sl * fr.mt + ss * (r.mt - l.mt)) * inv;
  }
  return {f.rho, n * f.mn + t * f.mt};
}

/// Physical normal flux F(U).n of the isentropic system.
inline Flux physical_flux(const Conserved& u, const Vec2& n, const ModelParams& p) {
  const Vec2 v = velocity(u);
  const double vn = dot(v, n);
  const Vec2 m = u.rho > kVacuumDensity ? u.mom : Vec2{};
  return {u.rho * vn, m * vn + n * pressure(u.rho, p)};
}

/// Lax-Friedrichs mass flux for F(rho) = rho V(rho) mu.
inline double lax_friedrichs_flux(double rho_l, double rho_r, const Vec2& mu_l, const Vec2& mu_r,
                                  const Vec2& n, const ModelParams& p) {
  const double fl = rho_l * speed(rho_l, p) * dot(mu_l, n);
  const double fr = rho_r * speed(rho_r, p) * dot(mu_r, n);
  const double xi = lf_viscosity(rho_l, rho_r, p);
  return 0.5 * (fl + fr - xi * (rho_r - rho_l));
}

/// Prescribed first-order boundary flux (outward positive).
inline double hughes_boundary_flux(double rho, const Vec2& mu, const Vec2& n, BoundaryTag tag,
                                   const ModelParams& p) {
  if (tag == BoundaryTag::Wall) return 0.0;
  const double demand = rho * speed(rho, p);
  if (p.hughes_outflow == HughesOutflow::Free) return demand * std::max(dot(mu, n), 0.0);
  return std::min(p.rho_max * speed(p.rho_max, p), demand);
}

/// Relaxation source (0, (rho V(rho) mu - rho v) / tau).
inline Flux source(const Conserved& u, const Vec2& mu, const ModelParams& p) {
  if (u.rho <= kVacuumDensity) return {};
  return {0.0, (u.rho * speed(u.rho, p) * mu - u.mom) / p.tau};
}

/// Exterior state for a boundary facet with outward unit normal n.
inline Conserved ghost_state(const Conserved& ui, const Vec2& n, BoundaryTag tag, const ModelParams& p) {
  if (tag == BoundaryTag::Wall) {
    const Vec2 v = velocity(ui);
    const Vec2 vg = v - 2.0 * dot(v, n) * n;
    return {ui.rho, ui.rho * vg};
  }
  const double rho_g = 0.1 * p.rho_max;
  return {rho_g, rho_g * p.v_max * n};
}

}  // namespace crowdflow
