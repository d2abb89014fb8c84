// crowdflow: batch driver for evacuation runs, refinement studies and
// parameter sweeps.
//
//   crowdflow run -c room.cfg -o out/
//   crowdflow convergence --case test1 --levels 500,2000,8000,32000
//   crowdflow sweep --param p0 --values 0.005,0.05,0.5,5 -c room.cfg
//   crowdflow scenario room_five_columns > five.cfg

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "crowdflow/config.hpp"
#include "crowdflow/mesh_io.hpp"
#include "crowdflow/output.hpp"
#include "crowdflow/studies.hpp"

namespace {

using namespace crowdflow;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    write_text_file(path, content);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Macroscopic pedestrian evacuation on triangular meshes"};
  app.require_subcommand(1);

  std::string config, outdir, csv_out;
  auto* run_cmd = app.add_subcommand("run", "run one scenario and write report, series and snapshots");
  run_cmd->add_option("-c,--config", config, "scenario config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("-o,--out", outdir, "output directory")->required();

  std::string study_case;
  std::vector<std::size_t> levels;
  std::size_t reference = 0;
  double t_end = 5.0;
  auto* conv_cmd = app.add_subcommand("convergence", "mesh-refinement study with least-squares order fit");
  conv_cmd->add_option("--case", study_case, "test1 | test2 | full")
      ->required()
      ->check(CLI::IsMember({"test1", "test2", "full"}));
  conv_cmd->add_option("--levels", levels, "approximate cell counts, comma separated")
      ->required()
      ->delimiter(',')
      ->expected(3, 1000);
  conv_cmd->add_option("--reference", reference, "reference cell count (test2: 136507, full: 70772)");
  conv_cmd->add_option("--t-end", t_end, "comparison time of the full-scheme study (s)");
  conv_cmd->add_option("-o,--out", csv_out, "CSV output file (default: stdout)");

  std::string param;
  std::vector<double> values;
  auto* sweep_cmd = app.add_subcommand("sweep", "evacuation functional versus one parameter");
  sweep_cmd->add_option("--param", param, "p0 | gamma | v_max")->required()->check(CLI::IsMember({"p0", "gamma", "v_max"}));
  sweep_cmd->add_option("--values", values, "parameter values, comma separated")->required()->delimiter(',');
  sweep_cmd->add_option("-c,--config", config, "base scenario config file")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("-o,--out", csv_out, "CSV output file (default: stdout)");

  std::string builtin;
  auto* scen_cmd = app.add_subcommand("scenario", "print a built-in scenario as a config file");
  scen_cmd->add_option("name", builtin, "built-in scenario name")->required();

  std::string mesh_out;
  auto* mesh_cmd = app.add_subcommand("mesh", "generate the mesh of a scenario in the ASCII mesh format");
  mesh_cmd->add_option("-c,--config", config, "scenario config file")->required()->check(CLI::ExistingFile);
  mesh_cmd->add_option("-o,--out", mesh_out, "mesh output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const Scenario sc = parse_config(read_file(config));
      const RunReport rep = run_scenario(sc, outdir);
      std::printf("%s: M(0)=%.6g T_evac=%.6g ped*s stop=%s at t=%.6g s after %zu steps\n", sc.name.c_str(),
                  rep.series.front().mass, rep.t_evac, rep.stop_reason.c_str(), rep.stop_time, rep.dt.steps);
    } else if (*conv_cmd) {
      StudyResult r;
      if (study_case == "test1") {
        r = strip_eikonal_study(levels);
      } else if (study_case == "test2") {
        r = room_eikonal_study(levels, reference ? reference : 136507);
      } else {
        r = full_scheme_study(levels, reference ? reference : 70772, t_end);
      }
      emit(csv_out, study_csv(r));
      for (const auto& f : r.fields) {
        for (const auto& w : f.study.warnings) std::cerr << "warning: " << f.name << ": " << w << '\n';
        std::cerr << f.name << ": p=" << f.study.p << '\n';
      }
      if (r.extrapolated) std::cerr << "note: " << r.extrapolated << " nodes extrapolated from the reference mesh\n";
    } else if (*sweep_cmd) {
      const Scenario sc = parse_config(read_file(config));
      const SweepParam p = parse_sweep_param(param);
      emit(csv_out, sweep_csv(p, sweep(sc, p, values)));
    } else if (*scen_cmd) {
      std::cout << serialize(builtin_scenario(builtin));
    } else if (*mesh_cmd) {
      const Scenario sc = parse_config(read_file(config));
      emit(mesh_out, save_mesh(generate_mesh(sc.geometry, sc.mesh)));
    }
  } catch (const RunAborted& e) {
    std::cerr << "error: run aborted at t=" << e.partial().stop_time << " s: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
