#pragma once

// Mesh-refinement studies (strip eikonal benchmark with exact solution,
// five-column room eikonal and full second-order scheme against a fine
// reference) and one-parameter sweeps of the evacuation functional.

#include <array>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "crowdflow/diagnostics.hpp"
#include "crowdflow/eikonal.hpp"
#include "crowdflow/scenario.hpp"
#include "crowdflow/solver.hpp"
#include "crowdflow/text.hpp"

namespace crowdflow {

struct StudyField {
  std::string name;
  ConvergenceStudy study;
};

struct StudyResult {
  std::vector<StudyField> fields;
  std::size_t reference_cells = 0;  // 0 when an exact solution is used
  std::size_t extrapolated = 0;     // coarse nodes located outside the reference mesh
};

inline std::string study_csv(const StudyResult& r) {
  std::ostringstream os;
  for (const auto& f : r.fields) os << "# field=" << f.name << '\n' << convergence_csv(f.study);
  return os.str();
}

/// Target spacing giving roughly `cells` dual cells on `area`.
inline double spacing_for(double area, std::size_t cells) { return std::sqrt(area / static_cast<double>(cells)); }

/// Exact travel cost along the strip, phi(x) = int_0^x 1 / V(rho(s)) ds,
/// by composite 5-point Gauss-Legendre on the smooth pieces of rho.
class StripSolution {
 public:
  explicit StripSolution(const ModelParams& p) : p_(p) {
    for (std::size_t k = 1; k < breaks_.size(); ++k) base_[k] = base_[k - 1] + integrate(breaks_[k - 1], breaks_[k]);
  }

  double phi(double x) const {
    std::size_t k = 0;
    while (k + 1 < breaks_.size() - 1 && x >= breaks_[k + 1]) ++k;
    return base_[k] + integrate(breaks_[k], x);
  }

  double dphi_dx(double x) const { return cost(x); }

 private:
  double cost(double x) const { return 1.0 / speed(strip_density(x), p_); }

  double integrate(double a, double b) const {
    static constexpr std::array<double, 5> node{0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                                0.9061798459386640};
    static constexpr std::array<double, 5> weight{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                                  0.2369268850561891, 0.2369268850561891};
    if (b <= a) return 0.0;
    const int parts = 8;
    const double w = (b - a) / parts;
    double sum = 0.0;
    for (int s = 0; s < parts; ++s) {
      const double mid = a + (s + 0.5) * w;
      // Sample strictly inside the piece so the left-continuous jumps are not hit.
      for (int q = 0; q < 5; ++q) sum += weight[q] * 0.5 * w * cost(mid + 0.5 * w * node[q]);
    }
    return sum;
  }

  ModelParams p_;
  std::array<double, 5> breaks_{0.0, 0.5, 1.0, 1.5, 2.0};
  std::array<double, 5> base_{};
};

/// Potential and its nodal gradient for a scenario's initial density.
struct EikonalSample {
  std::shared_ptr<const Discretization> disc;
  std::vector<double> phi;
  std::vector<Vec2> grad;
};

inline EikonalSample eikonal_sample(const Scenario& sc) {
  EikonalSample s;
  s.disc = discretize(sc);
  const auto st = initial_state(sc, s.disc->mesh, s.disc->dual);
  s.phi = solve_eikonal(s.disc->mesh, running_cost(st.rho, sc.params));
  s.grad = p1_gradient(s.disc->mesh, s.disc->dual, s.disc->tri_grad, s.phi);
  return s;
}

inline std::vector<double> component(const std::vector<Vec2>& v, int axis) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = axis == 0 ? v[i].x : v[i].y;
  return out;
}

/// Strip benchmark: eikonal solution and d(phi)/dx against the exact
/// solution; h_k = sqrt(|Omega| / N_k) with N_k the generated node count.
inline StudyResult strip_eikonal_study(const std::vector<std::size_t>& cells) {
  Scenario sc = builtin_scenario("strip_test1");
  const double area = sc.geometry.width * sc.geometry.height;
  const StripSolution exact(sc.params);
  std::vector<ConvergenceLevel> lphi, lgx;
  for (std::size_t n : cells) {
    // Whole number of cells per 0.5 m so the density break points lie on mesh lines.
    sc.mesh.target_h = 0.5 / std::max(1.0, std::round(0.5 / spacing_for(area, n)));
    const auto s = eikonal_sample(sc);
    const auto& mesh = s.disc->mesh;
    const auto& area_i = s.disc->dual.cell_area;
    const double x0 = sc.geometry.origin.x;
    const std::size_t N = mesh.num_nodes();
    const double h = grid_spacing(area, N);
    lphi.push_back({N, h, l1_error(s.phi, mesh, area_i, [&](const Vec2& x) { return exact.phi(x.x - x0); })});
    lgx.push_back({N, h, l1_error(component(s.grad, 0), mesh, area_i,
                                  [&](const Vec2& x) { return exact.dphi_dx(x.x - x0); })});
  }
  return {{{"phi", estimate_order(lphi)}, {"dphi_dx", estimate_order(lgx)}}, 0, 0};
}

/// Room used by the refinement studies: the five-column room with the
/// outflow on the door itself.
inline Scenario study_room() {
  Scenario sc = builtin_scenario("room_five_columns");
  sc.geometry.exterior_depth = 0.0;
  sc.mesh.refine_factor = 1.0;
  return sc;
}

/// Five-column room, rho = 0: phi and both gradient components against the
/// finest mesh; h_k = sqrt(N_ref / N_k).
inline StudyResult room_eikonal_study(const std::vector<std::size_t>& cells, std::size_t ref_cells) {
  Scenario sc = study_room();
  sc.initial.rho0 = 0.0;
  const double area = sc.geometry.width * sc.geometry.height;
  sc.mesh.target_h = spacing_for(area, ref_cells);
  const auto ref = eikonal_sample(sc);
  const auto ref_gx = component(ref.grad, 0), ref_gy = component(ref.grad, 1);
  const std::size_t Nref = ref.disc->mesh.num_nodes();
  StudyResult out;
  out.reference_cells = Nref;
  std::vector<ConvergenceLevel> lphi, lgx, lgy;
  for (std::size_t n : cells) {
    sc.mesh.target_h = spacing_for(area, n);
    const auto s = eikonal_sample(sc);
    const auto& m = s.disc->mesh;
    const auto& a = s.disc->dual.cell_area;
    const std::size_t N = m.num_nodes();
    const double h = grid_spacing(static_cast<double>(Nref), N);
    const auto e0 = l1_error(s.phi, m, a, ref.phi, ref.disc->mesh);
    const auto e1 = l1_error(component(s.grad, 0), m, a, ref_gx, ref.disc->mesh);
    const auto e2 = l1_error(component(s.grad, 1), m, a, ref_gy, ref.disc->mesh);
    out.extrapolated += e0.extrapolated;
    lphi.push_back({N, h, e0.error});
    lgx.push_back({N, h, e1.error});
    lgy.push_back({N, h, e2.error});
  }
  out.fields = {{"phi", estimate_order(lphi)}, {"dphi_dx", estimate_order(lgx)}, {"dphi_dy", estimate_order(lgy)}};
  return out;
}

struct FieldSnapshot {
  std::shared_ptr<const Discretization> disc;
  std::vector<double> rho, vx, vy;
};

inline FieldSnapshot run_to(const Scenario& sc, double t_end) {
  Problem prob = make_problem(sc);
  RunOptions opt = make_run_options(sc);
  opt.stop = {0.0, t_end};
  opt.snapshot_times.clear();
  const RunReport rep = run(prob, opt);
  FieldSnapshot f{prob.disc, rep.final_state.rho, {}, {}};
  f.vx.resize(f.rho.size());
  f.vy.resize(f.rho.size());
  for (Index i = 0; i < f.rho.size(); ++i) {
    const Vec2 v = velocity(rep.final_state.at(i));
    f.vx[i] = v.x;
    f.vy[i] = v.y;
  }
  return f;
}

/// Full second-order scheme in the study room, rho0 = 1 on [1,5]^2, errors of
/// density and velocity at t_end against the finest mesh.
inline StudyResult full_scheme_study(const std::vector<std::size_t>& cells, std::size_t ref_cells, double t_end = 5.0,
                                     const ModelParams& params = {}) {
  Scenario sc = study_room();
  sc.params = params;
  sc.params.model = ModelKind::SecondOrder;
  const double area = sc.geometry.width * sc.geometry.height;
  sc.mesh.target_h = spacing_for(area, ref_cells);
  const auto ref = run_to(sc, t_end);
  const std::size_t Nref = ref.disc->mesh.num_nodes();
  StudyResult out;
  out.reference_cells = Nref;
  std::vector<ConvergenceLevel> lr, lx, ly;
  for (std::size_t n : cells) {
    sc.mesh.target_h = spacing_for(area, n);
    const auto f = run_to(sc, t_end);
    const auto& m = f.disc->mesh;
    const auto& a = f.disc->dual.cell_area;
    const std::size_t N = m.num_nodes();
    const double h = grid_spacing(static_cast<double>(Nref), N);
    const auto er = l1_error(f.rho, m, a, ref.rho, ref.disc->mesh);
    const auto ex = l1_error(f.vx, m, a, ref.vx, ref.disc->mesh);
    const auto ey = l1_error(f.vy, m, a, ref.vy, ref.disc->mesh);
    out.extrapolated += er.extrapolated;
    lr.push_back({N, h, er.error});
    lx.push_back({N, h, ex.error});
    ly.push_back({N, h, ey.error});
  }
  out.fields = {{"density", estimate_order(lr)}, {"velocity_x", estimate_order(lx)}, {"velocity_y", estimate_order(ly)}};
  return out;
}

enum class SweepParam { P0, Gamma, VMax };

inline std::string sweep_param_name(SweepParam p) {
  switch (p) {
    case SweepParam::P0: return "p0";
    case SweepParam::Gamma: return "gamma";
    case SweepParam::VMax: return "v_max";
  }
  return "p0";
}

inline SweepParam parse_sweep_param(std::string_view s) {
  if (s == "p0") return SweepParam::P0;
  if (s == "gamma") return SweepParam::Gamma;
  if (s == "v_max") return SweepParam::VMax;
  throw ConfigError("unknown sweep parameter '" + std::string(s) + "' (expected p0, gamma or v_max)");
}

struct SweepPoint {
  double value = 0.0;
  RunReport report;
};

/// One run per value on a shared mesh.
inline std::vector<SweepPoint> sweep(const Scenario& base, SweepParam param, const std::vector<double>& values,
                                     std::shared_ptr<const Discretization> disc = nullptr) {
  if (!disc) disc = discretize(base);
  std::vector<SweepPoint> out;
  for (double v : values) {
    Scenario sc = base;
    (param == SweepParam::P0 ? sc.params.p0 : param == SweepParam::Gamma ? sc.params.gamma : sc.params.v_max) = v;
    RunOptions opt = make_run_options(sc);
    opt.snapshot_times.clear();
    out.push_back({v, run(make_problem(sc, disc), opt)});
  }
  return out;
}

inline std::string sweep_csv(SweepParam param, const std::vector<SweepPoint>& pts) {
  std::ostringstream os;
  os << sweep_param_name(param) << ",T_evac,stop_clock_time,stop_reason\n";
  for (const auto& p : pts) {
    os << text::format_double(p.value) << ',' << text::format_double(p.report.t_evac) << ','
       << text::format_double(p.report.stop_time) << ',' << p.report.stop_reason << '\n';
  }
  return os.str();
}

}  // namespace crowdflow
