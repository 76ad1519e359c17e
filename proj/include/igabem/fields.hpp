#ifndef IGABEM_FIELDS_HPP_
#define IGABEM_FIELDS_HPP_

#include "igabem/h2.hpp"

namespace igabem {

/// Hertz dipole field at x for a source at x0 with moment p0.
CVec3 dipole_field(const Vec3& x0, const Vec3& p0, double kappa, const Vec3& x);

/// Plane wave p e^{i kappa d.x}; direction and polarization must be unit and
/// orthogonal.
CVec3 plane_wave_field(const Vec3& direction, const Vec3& polarization, double kappa,
                       const Vec3& x);

/// Incident excitation: plane wave or Hertz dipole.
class Excitation {
 public:
  static Excitation plane_wave(const Vec3& direction, const Vec3& polarization);
  static Excitation dipole(const Vec3& location, const Vec3& moment);

  CVec3 operator()(double kappa, const Vec3& x) const;
  bool is_plane_wave() const { return kind_ == Kind::kPlaneWave; }
  const Vec3& direction() const { return a_; }
  const Vec3& polarization() const { return b_; }
  const Vec3& location() const { return a_; }
  const Vec3& moment() const { return b_; }

 private:
  enum class Kind { kPlaneWave, kDipole };
  Kind kind_ = Kind::kPlaneWave;
  Vec3 a_ = Vec3::UnitZ();
  Vec3 b_ = Vec3::UnitX();
};

/// Superspace load vector f* with entries int e_i(F(s)) . dF(s) B(s) ds.
VectorXcd assemble_excitation(const DivConformingSpace& space, const Excitation& excitation,
                              double kappa, int quadrature_order = 0 /*0: p+4*/);

/// Right-hand side of the glued system: -T' f*.
VectorXcd assemble_rhs(const DivConformingSpace& space, const Excitation& excitation,
                       double kappa, int quadrature_order = 0);

struct PotentialResult {
  CVec3 value = CVec3::Zero();
  bool accuracy_warning = false;  // x closer to the surface than one element
};

/// Electric single layer potential of a superspace density at an exterior
/// point; the kernel gradient is applied analytically.
PotentialResult eval_potential(const DivConformingSpace& space, const VectorXcd& super_coeffs,
                               double kappa, const Vec3& x, int quadrature_order = 0 /*0: p+6*/);

/// Quasi-uniform points on a sphere (deterministic Fibonacci lattice).
std::vector<Vec3> fibonacci_sphere(int count, double radius);

/// Exterior evaluation grid; construction validates positive surface distance.
struct EvaluationGrid {
  std::vector<Vec3> points;
  EvaluationGrid(std::vector<Vec3> pts, const MultipatchGeometry& geometry);
};

/// Max over points of the Euclidean norm of the complex field difference.
double field_error(const std::vector<CVec3>& numeric, const std::vector<CVec3>& reference);

void write_field_csv(const std::vector<Vec3>& points, const std::vector<CVec3>& values,
                     const std::string& path);

}  // namespace igabem

#endif  // IGABEM_FIELDS_HPP_
