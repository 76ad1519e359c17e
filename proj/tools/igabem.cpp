#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "igabem/study.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace igabem;

namespace {
void apply_thread_env() {
#ifdef _OPENMP
  if (const char* env = std::getenv("IGABEM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

int cmd_run_study(const std::string& config_path, const std::string& output_override) {
  StudyConfig config = load_config(config_path);
  if (!output_override.empty()) config.output_dir = output_override;
  const StudyResult result = run_study(config);
  write_study_outputs(config, result);
  write_study_csv(result.rows, std::cout);
  std::cout << emit_rate_table(result.rows, config.excitation == "plane-wave");
  bool ok = result.all_converged;
  for (const RunRow& row : result.rows)
    if (!row.failure.empty()) {
      std::cerr << "run (p=" << row.p << ", m=" << row.m << ") failed: " << row.failure << "\n";
      ok = false;
    }
  return ok ? 0 : 1;
}

int cmd_check_geometry(const std::string& source, const std::string& export_path) {
  const MultipatchGeometry geometry =
      (source == "sphere") ? unit_sphere() : load_geometry(source);
  std::cout << "patches: " << geometry.num_patches() << "\n";
  std::cout << "interfaces: " << geometry.interfaces().size() << "\n";
  std::cout << "closed surface: " << (geometry.closed() ? "yes" : "no") << "\n";
  double conformity = 0.0;
  for (const auto& itf : geometry.interfaces())
    for (int k = 0; k <= 32; ++k) {
      const double t = k / 32.0;
      const double tb = itf.reversed ? 1.0 - t : t;
      conformity = std::max(
          conformity,
          (geometry.patch(itf.patch_a).position(edge_point(itf.edge_a, t)) -
           geometry.patch(itf.patch_b).position(edge_point(itf.edge_b, tb)))
              .norm());
    }
  std::cout << "worst interface mismatch: " << conformity << "\n";
  double tau_min = 1e300;
  for (int ip = 0; ip < geometry.num_patches(); ++ip)
    for (int a = 0; a < 32; ++a)
      for (int b = 0; b < 32; ++b)
        tau_min = std::min(tau_min, geometry.patch(ip)
                                        .eval(Vec2((a + 0.5) / 32, (b + 0.5) / 32))
                                        .surface_measure);
  std::cout << "min surface measure on 32x32 grids: " << tau_min << "\n";
  if (!export_path.empty()) {
    write_geometry(geometry, export_path);
    std::cout << "written to " << export_path << "\n";
  }
  return 0;
}
}  // namespace

int main(int argc, char** argv) {
  apply_thread_env();
  CLI::App app{"isogeometric boundary element solver for electromagnetic scattering"};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  CLI::App* run = app.add_subcommand("run-study", "run a (p, m) refinement study");
  run->add_option("config", config_path, "study configuration file")->required();
  run->add_option("--output", output_dir, "override the output directory");

  std::string geo_source, export_path;
  CLI::App* check = app.add_subcommand("check-geometry", "validate a multipatch geometry");
  check->add_option("geometry", geo_source, "geometry file or 'sphere'")->required();
  check->add_option("--export", export_path, "write the parsed geometry to a file");

  CLI::App* tmpl = app.add_subcommand("print-config-template", "print a template configuration");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run_study(config_path, output_dir);
    if (check->parsed()) return cmd_check_geometry(geo_source, export_path);
    if (tmpl->parsed()) {
      write_config(StudyConfig{}, std::cout);
      return 0;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
