#ifndef IGABEM_ASSEMBLY_HPP_
#define IGABEM_ASSEMBLY_HPP_

#include <array>
#include <functional>

#include "igabem/spaces.hpp"

namespace igabem {

/// Time-harmonic context; kappa = omega sqrt(eps0 mu0) > 0. Resonant interior
/// wavenumbers are the caller's responsibility.
struct WaveContext {
  double kappa = 1.0;
  explicit WaveContext(double k) : kappa(k) {
    IGABEM_REQUIRE(kappa > 0.0, "wavenumber must be positive");
  }
};

/// Helmholtz fundamental solution e^{i kappa r} / (4 pi r).
Complex helmholtz_kernel(double kappa, const Vec3& x, const Vec3& y);

/// Gradient in x of the fundamental solution, in closed form.
CVec3 helmholtz_kernel_gradient(double kappa, const Vec3& x, const Vec3& y);

/// Kernel localized to a cluster pair: G(F_a(s) - F_b(t)).
Complex localized_kernel(double kappa, const MultipatchGeometry& geometry,
                         const ElementIndex& a, const ElementIndex& b, const Vec2& s,
                         const Vec2& t);

struct AssemblyOptions {
  int separated_order = 0;  // Gauss points per direction; 0 means degree + 2
  int singular_order = 0;   // 0 means degree + 4
  // test hook: replaces the Helmholtz kernel in the double integrals
  std::function<Complex(const Vec3&, const Vec3&)> kernel_override;

  int resolve_separated(int degree) const {
    return separated_order > 0 ? separated_order : degree + 2;
  }
  int resolve_singular(int degree) const {
    return singular_order > 0 ? singular_order : degree + 4;
  }
};

/// Galerkin block of one ordered element pair (rows: test functions on a,
/// columns: trial functions on b) for all four component pairs.
struct DenseBlock {
  std::array<std::array<MatrixXcd, 2>, 2> comp;

  const MatrixXcd& operator()(int alpha, int beta) const { return comp[alpha][beta]; }
};

DenseBlock assemble_near_block(const WaveContext& wave, const MultipatchGeometry& geometry,
                               int degree, const ElementIndex& a, const ElementIndex& b,
                               const AssemblyOptions& options = {});

/// Dense superspace operator V*; reference path for desk-scale problems and
/// the oracle for the compressed operator. Dimension guard at ~10^4.
MatrixXcd assemble_dense(const WaveContext& wave, const DivConformingSpace& space,
                         const AssemblyOptions& options = {});

}  // namespace igabem

#endif  // IGABEM_ASSEMBLY_HPP_
