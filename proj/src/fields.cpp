#include "igabem/fields.hpp"

#include <fstream>

namespace igabem {

CVec3 dipole_field(const Vec3& x0, const Vec3& p0, double kappa, const Vec3& x) {
  const Vec3 d = x - x0;
  const double r = d.norm();
  if (r < 1e-300) throw std::domain_error("dipole field evaluated at its source");
  const Vec3 n = d / r;
  const Vec3 transverse = n.cross(p0).cross(n);
  const Vec3 radialish = 3.0 * n * n.dot(p0) - p0;
  const Complex phase = std::polar(1.0, kappa * r);
  return phase * (kappa * kappa / r * transverse.cast<Complex>() +
                  Complex(1.0 / (r * r * r), -kappa / (r * r)) * radialish.cast<Complex>());
}

CVec3 plane_wave_field(const Vec3& direction, const Vec3& polarization, double kappa,
                       const Vec3& x) {
  IGABEM_REQUIRE(std::abs(direction.norm() - 1.0) < 1e-12, "plane wave direction must be unit");
  IGABEM_REQUIRE(std::abs(polarization.norm() - 1.0) < 1e-12,
                 "plane wave polarization must be unit");
  IGABEM_REQUIRE(std::abs(direction.dot(polarization)) < 1e-12,
                 "polarization must be orthogonal to the direction");
  return std::polar(1.0, kappa * direction.dot(x)) * polarization.cast<Complex>();
}

Excitation Excitation::plane_wave(const Vec3& direction, const Vec3& polarization) {
  Excitation e;
  e.kind_ = Kind::kPlaneWave;
  e.a_ = direction;
  e.b_ = polarization;
  plane_wave_field(direction, polarization, 1.0, Vec3::Zero());  // validate
  return e;
}

Excitation Excitation::dipole(const Vec3& location, const Vec3& moment) {
  Excitation e;
  e.kind_ = Kind::kDipole;
  e.a_ = location;
  e.b_ = moment;
  return e;
}

CVec3 Excitation::operator()(double kappa, const Vec3& x) const {
  return kind_ == Kind::kPlaneWave ? plane_wave_field(a_, b_, kappa, x)
                                   : dipole_field(a_, b_, kappa, x);
}

VectorXcd assemble_excitation(const DivConformingSpace& space, const Excitation& excitation,
                              double kappa, int quadrature_order) {
  const SuperSpaceLayout& layout = space.superspace();
  const MultipatchGeometry& geometry = space.geometry();
  const int p = layout.degree;
  const int n = quadrature_order > 0 ? quadrature_order : p + 4;
  const QuadratureRule2D rule = gauss_square(n);
  VectorXcd f = VectorXcd::Zero(layout.dim());
  Eigen::VectorXd bx, by;
  for (int ip = 0; ip < layout.num_patches; ++ip)
    for (int k = 0; k < layout.elems_per_patch(); ++k) {
      const ElementIndex lambda{ip, layout.level, k};
      for (size_t g = 0; g < rule.points.size(); ++g) {
        const PatchSample geo = geometry.eval(lambda, rule.points[g]);
        const CVec3 e = excitation(kappa, geo.position);
        // unconjugated pairing: dot() conjugates its first (real) factor
        const Complex e_du = geo.jacobian.col(0).cast<Complex>().dot(e);
        const Complex e_dv = geo.jacobian.col(1).cast<Complex>().dot(e);
        bernstein_values(p, rule.points[g][0], bx);
        bernstein_values(p, rule.points[g][1], by);
        for (int lx = 0; lx <= p; ++lx)
          for (int ly = 0; ly <= p; ++ly) {
            const double w = rule.weights[g] * bx[lx] * by[ly];
            f[layout.index(0, ip, k, lx, ly)] += w * e_du;
            f[layout.index(1, ip, k, lx, ly)] += w * e_dv;
          }
      }
    }
  return f;
}

VectorXcd assemble_rhs(const DivConformingSpace& space, const Excitation& excitation, double kappa,
                       int quadrature_order) {
  const VectorXcd f = assemble_excitation(space, excitation, kappa, quadrature_order);
  const SparseMatrixD& T = space.transform();
  VectorXcd rhs = VectorXcd::Zero(space.dim());
  for (int k = 0; k < T.outerSize(); ++k)
    for (SparseMatrixD::InnerIterator it(T, k); it; ++it)
      rhs[it.col()] -= it.value() * f[it.row()];
  return rhs;
}

PotentialResult eval_potential(const DivConformingSpace& space, const VectorXcd& super_coeffs,
                               double kappa, const Vec3& x, int quadrature_order) {
  const SuperSpaceLayout& layout = space.superspace();
  IGABEM_REQUIRE(super_coeffs.size() == layout.dim(), "superspace coefficient size mismatch");
  const MultipatchGeometry& geometry = space.geometry();
  const int p = layout.degree;
  const int n = quadrature_order > 0 ? quadrature_order : p + 6;
  const QuadratureRule2D rule = gauss_square(n);
  const double inv_kappa2 = 1.0 / (kappa * kappa);

  PotentialResult result;
  Eigen::VectorXd bx, by, dbx, dby;
  for (int ip = 0; ip < layout.num_patches; ++ip)
    for (int k = 0; k < layout.elems_per_patch(); ++k) {
      const ElementIndex lambda{ip, layout.level, k};
      // proximity check against a sampled element bound
      const auto corners = geometry.element_corners(lambda);
      const Vec3 center = 0.25 * (corners[0] + corners[1] + corners[2] + corners[3]);
      double diam = 0.0;
      for (const auto& c : corners) diam = std::max(diam, 2.0 * (c - center).norm());
      if ((x - center).norm() < 1.5 * diam) result.accuracy_warning = true;

      for (size_t g = 0; g < rule.points.size(); ++g) {
        const PatchSample geo = geometry.eval(lambda, rule.points[g]);
        const Complex G = helmholtz_kernel(kappa, x, geo.position);
        const CVec3 gradG = helmholtz_kernel_gradient(kappa, x, geo.position);
        bernstein_values(p, rule.points[g][0], bx);
        bernstein_values(p, rule.points[g][1], by);
        bernstein_derivatives(p, rule.points[g][0], dbx);
        bernstein_derivatives(p, rule.points[g][1], dby);
        Eigen::Vector2cd coeff = Eigen::Vector2cd::Zero();
        Complex div = 0.0;
        for (int lx = 0; lx <= p; ++lx)
          for (int ly = 0; ly <= p; ++ly) {
            const Complex c0 = super_coeffs[layout.index(0, ip, k, lx, ly)];
            const Complex c1 = super_coeffs[layout.index(1, ip, k, lx, ly)];
            coeff[0] += c0 * bx[lx] * by[ly];
            coeff[1] += c1 * bx[lx] * by[ly];
            div += c0 * dbx[lx] * by[ly] + c1 * bx[lx] * dby[ly];
          }
        const CVec3 w_vec =
            geo.jacobian.col(0).cast<Complex>() * coeff[0] +
            geo.jacobian.col(1).cast<Complex>() * coeff[1];
        result.value += rule.weights[g] * (G * w_vec + inv_kappa2 * div * gradG);
      }
    }
  return result;
}

std::vector<Vec3> fibonacci_sphere(int count, double radius) {
  IGABEM_REQUIRE(count >= 1, "need at least one grid point");
  std::vector<Vec3> pts;
  pts.reserve(count);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / count;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    pts.emplace_back(radius * rho * std::cos(phi), radius * rho * std::sin(phi), radius * z);
  }
  return pts;
}

EvaluationGrid::EvaluationGrid(std::vector<Vec3> pts, const MultipatchGeometry& geometry)
    : points(std::move(pts)) {
  ClusterTree tree(geometry, 0);
  for (const Vec3& x : points) {
    bool exterior = true;
    for (int c = 0; c < tree.num_clusters(); ++c)
      if ((x - tree.center(c)).norm() <= tree.radius(c)) exterior = false;
    IGABEM_REQUIRE(exterior, "evaluation grid point too close to the surface");
  }
}

double field_error(const std::vector<CVec3>& numeric, const std::vector<CVec3>& reference) {
  IGABEM_REQUIRE(numeric.size() == reference.size(), "field grids must be aligned");
  double worst = 0.0;
  for (size_t i = 0; i < numeric.size(); ++i)
    worst = std::max(worst, (numeric[i] - reference[i]).norm());
  return worst;
}

void write_field_csv(const std::vector<Vec3>& points, const std::vector<CVec3>& values,
                     const std::string& path) {
  IGABEM_REQUIRE(points.size() == values.size(), "field grids must be aligned");
  std::ofstream out(path);
  IGABEM_REQUIRE(static_cast<bool>(out), "cannot open field output file");
  out << "x,y,z,re_ex,im_ex,re_ey,im_ey,re_ez,im_ez\n";
  out.precision(16);
  for (size_t i = 0; i < points.size(); ++i) {
    out << points[i][0] << "," << points[i][1] << "," << points[i][2];
    for (int d = 0; d < 3; ++d)
      out << "," << values[i][d].real() << "," << values[i][d].imag();
    out << "\n";
  }
}

}  // namespace igabem
