#include "igabem/study.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace igabem {

void StudyConfig::validate() const {
  IGABEM_REQUIRE(kappa > 0.0, "config: kappa must be positive");
  IGABEM_REQUIRE(!degrees.empty(), "config: degree list must not be empty");
  IGABEM_REQUIRE(!levels.empty(), "config: level list must not be empty");
  for (int p : degrees) IGABEM_REQUIRE(p >= 1, "config: degrees must be >= 1");
  for (int m : levels) IGABEM_REQUIRE(m >= 0, "config: levels must be >= 0");
  IGABEM_REQUIRE(eta > 0.0, "config: eta must be positive");
  IGABEM_REQUIRE(q >= 0, "config: q must be non-negative");
  IGABEM_REQUIRE(excitation == "dipole" || excitation == "plane-wave",
                 "config: excitation must be 'dipole' or 'plane-wave'");
  IGABEM_REQUIRE(eval_points >= 1, "config: eval_points must be positive");
  IGABEM_REQUIRE(eval_radius > 0.0, "config: eval_radius must be positive");
  if (excitation == "plane-wave") {
    IGABEM_REQUIRE(std::abs(wave_direction.norm() - 1.0) < 1e-10,
                   "config: wave direction must be unit");
    IGABEM_REQUIRE(std::abs(wave_polarization.norm() - 1.0) < 1e-10,
                   "config: wave polarization must be unit");
    IGABEM_REQUIRE(std::abs(wave_direction.dot(wave_polarization)) < 1e-10,
                   "config: polarization must be orthogonal to the direction");
  }
  if (geometry != "sphere")
    IGABEM_REQUIRE(std::filesystem::exists(geometry),
                   "config: geometry file does not exist: " + geometry);
}

namespace {
using KeyMap = std::map<std::string, std::string>;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

Vec3 parse_vec3(const std::string& value, const std::string& key) {
  std::istringstream in(value);
  Vec3 v;
  if (!(in >> v[0] >> v[1] >> v[2]))
    throw ConfigError("config: expected three numbers for " + key);
  return v;
}

std::vector<int> parse_ints(const std::string& value) {
  std::istringstream in(value);
  std::vector<int> out;
  int v;
  while (in >> v) out.push_back(v);
  return out;
}
}  // namespace

StudyConfig parse_config(std::istream& in) {
  std::map<std::string, KeyMap> sections;
  std::string line, section = "study";
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected 'key = value', got '" + line + "'");
    sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  StudyConfig config;
  const auto get = [&sections](const std::string& sec, const std::string& key,
                               auto&& setter) {
    auto s = sections.find(sec);
    if (s == sections.end()) return;
    auto it = s->second.find(key);
    if (it != s->second.end()) setter(it->second);
  };
  get("study", "geometry", [&](const std::string& v) { config.geometry = v; });
  get("study", "kappa", [&](const std::string& v) { config.kappa = std::stod(v); });
  get("study", "degrees", [&](const std::string& v) { config.degrees = parse_ints(v); });
  get("study", "levels", [&](const std::string& v) { config.levels = parse_ints(v); });
  get("study", "eta", [&](const std::string& v) { config.eta = std::stod(v); });
  get("study", "q", [&](const std::string& v) { config.q = std::stoi(v); });
  get("study", "sigma", [&](const std::string& v) { config.sigma = std::stod(v); });
  get("study", "q_c", [&](const std::string& v) { config.q_c = std::stod(v); });
  get("study", "q0", [&](const std::string& v) { config.q0 = std::stoi(v); });
  get("study", "seed", [&](const std::string& v) { config.seed = std::stoul(v); });
  get("study", "output_dir", [&](const std::string& v) { config.output_dir = v; });
  get("study", "eval_points", [&](const std::string& v) { config.eval_points = std::stoi(v); });
  get("study", "eval_radius", [&](const std::string& v) { config.eval_radius = std::stod(v); });
  get("excitation", "kind", [&](const std::string& v) { config.excitation = v; });
  get("excitation", "location",
      [&](const std::string& v) { config.dipole_location = parse_vec3(v, "location"); });
  get("excitation", "moment",
      [&](const std::string& v) { config.dipole_moment = parse_vec3(v, "moment"); });
  get("excitation", "direction",
      [&](const std::string& v) { config.wave_direction = parse_vec3(v, "direction"); });
  get("excitation", "polarization",
      [&](const std::string& v) { config.wave_polarization = parse_vec3(v, "polarization"); });
  get("solver", "restart", [&](const std::string& v) { config.solver.restart = std::stoi(v); });
  get("solver", "tolerance",
      [&](const std::string& v) { config.solver.tolerance = std::stod(v); });
  get("solver", "relative",
      [&](const std::string& v) { config.solver.relative = (v == "true" || v == "1"); });
  get("solver", "max_iterations",
      [&](const std::string& v) { config.solver.max_iterations = std::stoi(v); });
  get("fmm", "cache_budget_mb",
      [&](const std::string& v) { config.cache_budget_mb = std::stod(v); });
  config.validate();
  return config;
}

StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

void write_config(const StudyConfig& config, std::ostream& out) {
  out.precision(17);
  out << "[study]\n";
  out << "geometry = " << config.geometry << "\n";
  out << "kappa = " << config.kappa << "\n";
  out << "degrees =";
  for (int p : config.degrees) out << " " << p;
  out << "\nlevels =";
  for (int m : config.levels) out << " " << m;
  out << "\neta = " << config.eta << "\n";
  out << "q = " << config.q << "\n";
  out << "sigma = " << config.sigma << "\n";
  out << "q_c = " << config.q_c << "\n";
  out << "q0 = " << config.q0 << "\n";
  out << "seed = " << config.seed << "\n";
  out << "output_dir = " << config.output_dir << "\n";
  out << "eval_points = " << config.eval_points << "\n";
  out << "eval_radius = " << config.eval_radius << "\n";
  out << "\n[excitation]\n";
  out << "kind = " << config.excitation << "\n";
  out << "location = " << config.dipole_location.transpose() << "\n";
  out << "moment = " << config.dipole_moment.transpose() << "\n";
  out << "direction = " << config.wave_direction.transpose() << "\n";
  out << "polarization = " << config.wave_polarization.transpose() << "\n";
  out << "\n[solver]\n";
  out << "restart = " << config.solver.restart << "\n";
  out << "tolerance = " << config.solver.tolerance << "\n";
  out << "relative = " << (config.solver.relative ? "true" : "false") << "\n";
  out << "max_iterations = " << config.solver.max_iterations << "\n";
  out << "\n[fmm]\n";
  out << "cache_budget_mb = " << config.cache_budget_mb << "\n";
}

const char* kStudyCsvHeader =
    "p,m,h_ref,dofs_real,t_assembly_s,t_solve_s,gmres_iters,dp_error,mie_l2_error,"
    "near_blocks,far_blocks,far_storage_mb";

namespace {
std::string format_optional(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream out;
  out.precision(12);
  out << *v;
  return out.str();
}
}  // namespace

void write_study_csv(const std::vector<RunRow>& rows, std::ostream& out) {
  out << kStudyCsvHeader << "\n";
  out.precision(12);
  for (const RunRow& r : rows) {
    out << r.p << "," << r.m << "," << r.h_ref << "," << r.dofs_real << "," << r.t_assembly_s
        << "," << r.t_solve_s << "," << r.gmres_iters << "," << format_optional(r.dp_error) << ","
        << format_optional(r.mie_l2_error) << "," << r.near_blocks << "," << r.far_blocks << ","
        << r.far_storage_mb << "\n";
  }
}

StudyResult run_study(const StudyConfig& config) {
  config.validate();
  const MultipatchGeometry geometry =
      (config.geometry == "sphere") ? unit_sphere() : load_geometry(config.geometry);
  IGABEM_REQUIRE(geometry.closed(), "scattering study requires a closed surface");
  const WaveContext wave(config.kappa);
  const bool is_sphere_mie = (config.geometry == "sphere" && config.excitation == "plane-wave");

  const Excitation excitation =
      config.excitation == "dipole"
          ? Excitation::dipole(config.dipole_location, config.dipole_moment)
          : Excitation::plane_wave(config.wave_direction, config.wave_polarization);

  std::optional<MieSeries> mie;
  if (is_sphere_mie)
    mie.emplace(config.kappa, config.wave_direction, config.wave_polarization);

  StudyResult result;
  result.all_converged = true;
  for (int p : config.degrees)
    for (int m : config.levels) {
      RunRow row;
      row.p = p;
      row.m = m;
      row.h_ref = std::ldexp(1.0, -m);
      try {
        const auto t0 = std::chrono::steady_clock::now();
        DivConformingSpace space(geometry, p, m);
        H2Options opts;
        opts.q = config.q > 0 ? config.q : choose_q(config.sigma, m, config.q_c, config.q0);
        opts.eta = config.eta;
        opts.cache_budget_mb = config.cache_budget_mb;
        H2Operator op(wave, space, opts);
        const VectorXcd rhs = assemble_rhs(space, excitation, config.kappa);
        row.t_assembly_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        row.dofs_real = space.dim_real();
        row.near_blocks = op.stats().near_blocks;
        row.far_blocks = op.stats().far_blocks;
        row.far_storage_mb = op.stats().far_storage_formula_mb;

        const SolveReport report = solve_scattering(op, rhs, config.solver);
        row.t_solve_s = report.solve_seconds;
        row.gmres_iters = report.iterations;
        row.converged = report.converged;
        result.all_converged = result.all_converged && report.converged;

        // superspace coefficients of the solution
        const SparseMatrixD& T = space.transform();
        VectorXcd super = VectorXcd::Zero(T.rows());
        for (int k = 0; k < T.outerSize(); ++k)
          for (SparseMatrixD::InnerIterator it(T, k); it; ++it)
            super[it.row()] += it.value() * report.solution[it.col()];

        if (config.excitation == "dipole") {
          const EvaluationGrid grid(fibonacci_sphere(config.eval_points, config.eval_radius),
                                    geometry);
          double err = 0.0;
          for (const Vec3& x : grid.points) {
            const CVec3 numeric = eval_potential(space, super, config.kappa, x).value;
            const CVec3 reference =
                -dipole_field(config.dipole_location, config.dipole_moment, config.kappa, x);
            err = std::max(err, (numeric - reference).norm());
          }
          row.dp_error = err;
        }
        if (mie) {
          row.mie_l2_error = density_l2_error(
              space, super, [&](const Vec3& x) { return mie->surface_current(x); });
        }
      } catch (const std::exception& err) {
        row.failure = err.what();
        result.all_converged = false;
      }
      result.rows.push_back(row);
    }
  return result;
}

void write_study_outputs(const StudyConfig& config, const StudyResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  {
    std::ofstream out(fs::path(config.output_dir) / "study.csv");
    write_study_csv(result.rows, out);
  }
  {
    std::ofstream out(fs::path(config.output_dir) / "rates.txt");
    out << emit_rate_table(result.rows, config.excitation == "plane-wave");
  }
  // plot-ready (h, error) curves per degree
  for (int p : config.degrees) {
    std::ofstream out(fs::path(config.output_dir) /
                      ("curve_p" + std::to_string(p) + ".csv"));
    out << "h_ref,error\n";
    out.precision(12);
    for (const RunRow& r : result.rows) {
      if (r.p != p || !r.failure.empty()) continue;
      const std::optional<double>& e = r.dp_error ? r.dp_error : r.mie_l2_error;
      if (e) out << r.h_ref << "," << *e << "\n";
    }
  }
  {
    std::ofstream out(fs::path(config.output_dir) / "config_used.cfg");
    write_config(config, out);
  }
}

std::string emit_rate_table(const std::vector<RunRow>& rows, bool use_mie) {
  std::ostringstream out;
  out.precision(4);
  std::map<int, std::vector<const RunRow*>> by_degree;
  for (const RunRow& r : rows)
    if (r.failure.empty()) by_degree[r.p].push_back(&r);
  out << "observed orders (log2 of consecutive error ratios)\n";
  for (auto& [p, list] : by_degree) {
    std::sort(list.begin(), list.end(),
              [](const RunRow* a, const RunRow* b) { return a->m < b->m; });
    out << "p = " << p << ":";
    double last = std::numeric_limits<double>::quiet_NaN();
    for (size_t i = 0; i + 1 < list.size(); ++i) {
      const auto& e0 = use_mie ? list[i]->mie_l2_error : list[i]->dp_error;
      const auto& e1 = use_mie ? list[i + 1]->mie_l2_error : list[i + 1]->dp_error;
      if (!e0 || !e1 || *e0 <= 0.0 || *e1 <= 0.0) {
        out << "  nan(no positive errors)";
        continue;
      }
      last = std::log2(*e0 / *e1);
      out << "  " << last;
    }
    out << "   final order: " << last << "\n";
  }
  return out.str();
}

}  // namespace igabem
