#ifndef IGABEM_SOLVER_HPP_
#define IGABEM_SOLVER_HPP_

#include <functional>

#include "igabem/h2.hpp"

namespace igabem {

struct SolverConfig {
  int restart = 1500;
  double tolerance = 1e-8;
  bool relative = false;  // absolute ||r||_2 criterion by default
  int max_iterations = 100000;
};

struct SolveReport {
  VectorXcd solution;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  // ||r||_2 estimate per iteration
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;
};

using LinearOperator = std::function<VectorXcd(const VectorXcd&)>;

/// Restarted GMRES over the complex field with the Hermitian inner product
/// and modified Gram-Schmidt. An optional right preconditioner may be given;
/// the default is the identity.
SolveReport gmres(const LinearOperator& apply, const VectorXcd& rhs, const SolverConfig& config,
                  const LinearOperator& preconditioner = {});

/// Solve the compressed system T' V* T w = rhs and record the solve time.
SolveReport solve_scattering(const H2Operator& op, const VectorXcd& rhs,
                             const SolverConfig& config);

void write_residual_history(const SolveReport& report, const std::string& path);

}  // namespace igabem

#endif  // IGABEM_SOLVER_HPP_
