#ifndef IGABEM_STUDY_HPP_
#define IGABEM_STUDY_HPP_

#include <iosfwd>
#include <optional>

#include "igabem/fields.hpp"
#include "igabem/mie.hpp"
#include "igabem/solver.hpp"

namespace igabem {

/// Configuration of a refinement study over a (p, m) grid.
struct StudyConfig {
  std::string geometry = "sphere";  // builtin name or file path
  double kappa = 1.0;
  std::string excitation = "dipole";  // "dipole" or "plane-wave"
  Vec3 dipole_location = Vec3(0, 0, 0);
  Vec3 dipole_moment = Vec3(0, 0.1, 0.1);
  Vec3 wave_direction = Vec3(0, 0, 1);
  Vec3 wave_polarization = Vec3(1, 0, 0);
  std::vector<int> degrees = {1};
  std::vector<int> levels = {1};
  double eta = 1.6;
  int q = 10;              // direct interpolation degree; 0 enables the rule
  double sigma = 1.0;      // choose_q parameters when q == 0
  double q_c = 1.0;
  int q0 = 4;
  SolverConfig solver;
  double cache_budget_mb = 1800.0;
  unsigned seed = 0;
  std::string output_dir = ".";
  int eval_points = 100;
  double eval_radius = 3.0;

  void validate() const;
};

StudyConfig parse_config(std::istream& in);
StudyConfig load_config(const std::string& path);
void write_config(const StudyConfig& config, std::ostream& out);

struct RunRow {
  int p = 0;
  int m = 0;
  double h_ref = 0.0;
  int dofs_real = 0;
  double t_assembly_s = 0.0;
  double t_solve_s = 0.0;
  int gmres_iters = 0;
  std::optional<double> dp_error;
  std::optional<double> mie_l2_error;
  long near_blocks = 0;
  long far_blocks = 0;
  double far_storage_mb = 0.0;
  bool converged = false;
  std::string failure;  // non-empty when the run aborted
};

struct StudyResult {
  std::vector<RunRow> rows;
  bool all_converged = false;
};

StudyResult run_study(const StudyConfig& config);

extern const char* kStudyCsvHeader;
void write_study_csv(const std::vector<RunRow>& rows, std::ostream& out);
void write_study_outputs(const StudyConfig& config, const StudyResult& result);

/// Observed orders log2(e_m / e_{m+1}) between consecutive refinements for
/// each degree, plus a per-degree summary line.
std::string emit_rate_table(const std::vector<RunRow>& rows, bool use_mie);

}  // namespace igabem

#endif  // IGABEM_STUDY_HPP_
