#ifndef IGABEM_MIE_HPP_
#define IGABEM_MIE_HPP_

#include "igabem/spaces.hpp"

namespace igabem {

/// Spherical Bessel functions j_0..j_nmax at x, by the downward Miller
/// recurrence with renormalization (stable for n > x).
Eigen::VectorXd spherical_bessel_j(int nmax, double x);
/// y_0..y_nmax by the (stable) upward recurrence.
Eigen::VectorXd spherical_bessel_y(int nmax, double x);

/// Series solution for the surface current density on the perfectly
/// conducting unit sphere under a unit plane wave, in the normalization of
/// the electric single layer ansatz: w = i kappa (n x H_total).
class MieSeries {
 public:
  MieSeries(double kappa, const Vec3& direction = Vec3::UnitZ(),
            const Vec3& polarization = Vec3::UnitX());

  int order() const { return order_; }
  double kappa() const { return kappa_; }

  /// EFIE density at a point of the unit sphere (tangential complex field).
  CVec3 surface_current(const Vec3& point) const;

  /// Scattered electric field at an exterior point (|x| > 1).
  CVec3 scattered_field(const Vec3& x) const;

  /// Total tangential electric field just outside the sphere; vanishes on a
  /// perfect conductor (used as a self-check).
  CVec3 total_tangential_field(const Vec3& point) const;

 private:
  double kappa_;
  int order_;
  Eigen::Matrix3d rot_;       // physical frame -> canonical (+z, +x) frame
  Eigen::VectorXcd a_, b_;    // PEC Mie coefficients, index 1..order
  Eigen::VectorXd psi_, dpsi_;
  Eigen::VectorXcd xi_, dxi_;

  CVec3 current_canonical(const Vec3& point) const;
  CVec3 scattered_canonical(const Vec3& x) const;
};

/// Patchwise L2(Gamma) distance between a superspace density and a reference
/// surface field.
double density_l2_error(const DivConformingSpace& space, const VectorXcd& super_coeffs,
                        const std::function<CVec3(const Vec3&)>& reference,
                        int quadrature_order = 0 /*0: p+4*/);

}  // namespace igabem

#endif  // IGABEM_MIE_HPP_
