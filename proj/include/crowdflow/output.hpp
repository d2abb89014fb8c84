#pragma once

// Legacy-VTK snapshots and the on-disk products of a scenario run.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "crowdflow/config.hpp"
#include "crowdflow/diagnostics.hpp"
#include "crowdflow/errors.hpp"
#include "crowdflow/scenario.hpp"
#include "crowdflow/solver.hpp"
#include "crowdflow/text.hpp"

namespace crowdflow {

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

/// ASCII legacy VTK unstructured grid of triangles (cell type 5) with nodal
/// `density`, `velocity` and, when given, `potential`.
inline std::string snapshot_vtk(const Mesh& mesh, const State& s, const std::vector<double>* potential = nullptr,
                                double t = 0.0) {
  using text::format_double;
  std::ostringstream os;
  os << "# vtk DataFile Version 3.0\n";
  os << "crowdflow t=" << format_double(t) << '\n';
  os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.num_nodes() << " double\n";
  for (const auto& p : mesh.nodes) os << format_double(p.x) << ' ' << format_double(p.y) << " 0\n";
  os << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& t3 : mesh.triangles) os << "3 " << t3[0] << ' ' << t3[1] << ' ' << t3[2] << '\n';
  os << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (std::size_t k = 0; k < mesh.num_triangles(); ++k) os << "5\n";
  os << "POINT_DATA " << mesh.num_nodes() << '\n';
  os << "SCALARS density double 1\nLOOKUP_TABLE default\n";
  for (double r : s.rho) os << format_double(r) << '\n';
  os << "VECTORS velocity double\n";
  for (Index i = 0; i < s.size(); ++i) {
    const Vec2 v = velocity(s.at(i));
    os << format_double(v.x) << ' ' << format_double(v.y) << " 0\n";
  }
  if (potential && potential->size() == mesh.num_nodes()) {
    os << "SCALARS potential double 1\nLOOKUP_TABLE default\n";
    for (double v : *potential) os << format_double(v) << '\n';
  }
  return os.str();
}

inline void write_snapshot(const std::filesystem::path& path, const Mesh& mesh, const State& s,
                           const std::vector<double>* potential = nullptr, double t = 0.0) {
  write_text_file(path, snapshot_vtk(mesh, s, potential, t));
}

inline nlohmann::json report_json(const Scenario& sc, const Discretization& d, const RunReport& rep) {
  nlohmann::json j;
  j["scenario"] = sc.name;
  j["mesh"] = {{"nodes", d.mesh.num_nodes()}, {"triangles", d.mesh.num_triangles()}};
  j["initial_mass"] = rep.series.empty() ? 0.0 : rep.series.front().mass;
  j["final_mass"] = rep.series.empty() ? 0.0 : rep.series.back().mass;
  j["T_evac"] = rep.t_evac;
  j["stop_reason"] = rep.stop_reason;
  // Clock time at which the stop rule fired; T_evac above is the mass integral.
  j["stop_clock_time"] = rep.stop_time;
  j["clamped_roundoff_cells"] = rep.clamped;
  j["min_density"] = rep.min_density;
  j["dt"] = {{"steps", rep.dt.steps}, {"min", rep.dt.min}, {"max", rep.dt.max}, {"mean", rep.dt.mean}};
  j["snapshots"] = rep.snapshots;
  return j;
}

/// Runs `sc` and writes scenario.cfg, series.csv, report.json and
/// snapshot_<k>.vtk files into `outdir`. On a solver failure the partial
/// report (with an "error" entry) is still written before rethrowing.
inline RunReport run_scenario(const Scenario& sc, const std::filesystem::path& outdir) {
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) throw IoError("cannot create '" + outdir.string() + "': " + ec.message());
  write_text_file(outdir / "scenario.cfg", serialize(sc));

  Problem prob = make_problem(sc);
  RunOptions opt = make_run_options(sc);
  std::size_t count = 0;
  opt.on_snapshot = [&](const SnapshotRequest& r) {
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%04zu.vtk", count++);
    write_snapshot(outdir / name, prob.disc->mesh, *r.state, r.potential ? &r.potential->phi : nullptr, r.t);
    return std::string(name);
  };
  auto finish = [&](const RunReport& rep, const std::string* error) {
    write_text_file(outdir / "series.csv", series_csv(rep.series, sc.output.series_every));
    auto j = report_json(sc, *prob.disc, rep);
    if (error) j["error"] = *error;
    write_text_file(outdir / "report.json", j.dump(2) + "\n");
  };
  try {
    RunReport rep = run(prob, opt);
    finish(rep, nullptr);
    return rep;
  } catch (const RunAborted& e) {
    const std::string msg = e.what();
    finish(e.partial(), &msg);
    throw;
  }
}

}  // namespace crowdflow
