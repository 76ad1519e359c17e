#include "igabem/solver.hpp"

#include <chrono>
#include <fstream>

namespace igabem {

SolveReport gmres(const LinearOperator& apply, const VectorXcd& rhs, const SolverConfig& config,
                  const LinearOperator& preconditioner) {
  IGABEM_REQUIRE(config.restart >= 1, "restart length must be positive");
  IGABEM_REQUIRE(config.tolerance > 0.0, "solver tolerance must be positive");
  const int n = static_cast<int>(rhs.size());
  const double target =
      config.relative ? config.tolerance * rhs.norm() : config.tolerance;

  SolveReport report;
  report.solution = VectorXcd::Zero(n);
  if (rhs.norm() <= target) {
    report.converged = true;
    return report;
  }

  const auto precond = [&](const VectorXcd& v) { return preconditioner ? preconditioner(v) : v; };

  while (report.iterations < config.max_iterations) {
    // restart cycle
    const VectorXcd r = rhs - apply(report.solution);
    const double beta = r.norm();
    if (beta <= target) {
      report.converged = true;
      return report;
    }
    const int men = std::min(config.restart, config.max_iterations - report.iterations);
    MatrixXcd V(n, men + 1);
    MatrixXcd H = MatrixXcd::Zero(men + 1, men);
    VectorXcd g = VectorXcd::Zero(men + 1);
    std::vector<double> cs(men);
    std::vector<Complex> sn(men);
    V.col(0) = r / beta;
    g[0] = beta;

    int j = 0;
    bool cycle_done = false;
    for (; j < men && !cycle_done; ++j) {
      VectorXcd w = apply(precond(V.col(j)));
      for (int i = 0; i <= j; ++i) {
        const Complex h = V.col(i).dot(w);  // conjugated inner product
        H(i, j) = h;
        w -= h * V.col(i);
      }
      H(j + 1, j) = w.norm();
      if (std::abs(H(j + 1, j)) > 0.0) V.col(j + 1) = w / H(j + 1, j);

      // apply the stored Givens rotations, then annihilate H(j+1, j)
      for (int i = 0; i < j; ++i) {
        const Complex t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -std::conj(sn[i]) * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const Complex a = H(j, j);
      const Complex b = H(j + 1, j);
      const double rho = std::sqrt(std::norm(a) + std::norm(b));
      if (rho == 0.0) {
        cs[j] = 1.0;
        sn[j] = 0.0;
      } else if (std::abs(a) == 0.0) {
        cs[j] = 0.0;
        sn[j] = 1.0;
      } else {
        cs[j] = std::abs(a) / rho;
        sn[j] = (a / std::abs(a)) * std::conj(b) / rho;
      }
      H(j, j) = cs[j] * a + sn[j] * b;
      H(j + 1, j) = 0.0;
      const Complex gj = g[j];
      g[j] = cs[j] * gj;
      g[j + 1] = -std::conj(sn[j]) * gj;

      ++report.iterations;
      const double res = std::abs(g[j + 1]);
      report.residual_history.push_back(res);
      if (res <= target || report.iterations >= config.max_iterations) cycle_done = true;
    }

    // back substitution and update
    VectorXcd y = VectorXcd::Zero(j);
    for (int i = j - 1; i >= 0; --i) {
      Complex s = g[i];
      for (int k = i + 1; k < j; ++k) s -= H(i, k) * y[k];
      y[i] = s / H(i, i);
    }
    report.solution += precond(V.leftCols(j) * y);

    if (!report.residual_history.empty() && report.residual_history.back() <= target) {
      report.converged = true;
      return report;
    }
  }
  report.converged = false;  // max iterations exhausted
  return report;
}

SolveReport solve_scattering(const H2Operator& op, const VectorXcd& rhs,
                             const SolverConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport report =
      gmres([&op](const VectorXcd& x) { return op.apply(x); }, rhs, config);
  report.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

void write_residual_history(const SolveReport& report, const std::string& path) {
  std::ofstream out(path);
  IGABEM_REQUIRE(static_cast<bool>(out), "cannot open residual history file");
  out << "iteration,residual\n";
  out.precision(16);
  for (size_t i = 0; i < report.residual_history.size(); ++i)
    out << i + 1 << "," << report.residual_history[i] << "\n";
}

}  // namespace igabem
