#include "igabem/mie.hpp"

#include <cmath>

namespace igabem {

Eigen::VectorXd spherical_bessel_j(int nmax, double x) {
  IGABEM_REQUIRE(x > 0.0, "spherical Bessel argument must be positive");
  Eigen::VectorXd j(nmax + 1);
  if (nmax == 0) {
    j[0] = std::sin(x) / x;
    return j;
  }
  // downward Miller recurrence from a safely high start order
  const int start = nmax + 16 + static_cast<int>(x);
  double jp1 = 0.0, jn = 1e-280;
  Eigen::VectorXd tmp(nmax + 1);
  for (int n = start; n >= 1; --n) {
    const double jm1 = (2.0 * n + 1.0) / x * jn - jp1;
    jp1 = jn;
    jn = jm1;
    if (n - 1 <= nmax) tmp[n - 1] = jn;
    // rescale to avoid overflow
    if (std::abs(jn) > 1e250) {
      jn *= 1e-250;
      jp1 *= 1e-250;
      for (int k = n - 1; k <= nmax; ++k)
        if (k >= 0) tmp[k] *= 1e-250;
    }
  }
  const double scale = (std::sin(x) / x) / tmp[0];
  for (int n = 0; n <= nmax; ++n) j[n] = tmp[n] * scale;
  return j;
}

Eigen::VectorXd spherical_bessel_y(int nmax, double x) {
  IGABEM_REQUIRE(x > 0.0, "spherical Bessel argument must be positive");
  Eigen::VectorXd y(nmax + 1);
  y[0] = -std::cos(x) / x;
  if (nmax >= 1) y[1] = -std::cos(x) / (x * x) - std::sin(x) / x;
  for (int n = 2; n <= nmax; ++n) y[n] = (2.0 * n - 1.0) / x * y[n - 1] - y[n - 2];
  return y;
}

namespace {
struct Angular {
  double pi_n, tau_n;
};

// pi_n = P_n^1 / sin(theta), tau_n = d P_n^1 / d theta by the usual recurrence
void angular_functions(int nmax, double mu, Eigen::VectorXd& pi, Eigen::VectorXd& tau) {
  pi.resize(nmax + 1);
  tau.resize(nmax + 1);
  pi[0] = 0.0;
  if (nmax >= 1) {
    pi[1] = 1.0;
    tau[1] = mu;
  }
  for (int n = 2; n <= nmax; ++n) {
    pi[n] = ((2.0 * n - 1.0) * mu * pi[n - 1] - n * pi[n - 2]) / (n - 1.0);
    tau[n] = n * mu * pi[n] - (n + 1.0) * pi[n - 1];
  }
  tau[0] = 0.0;
}
}  // namespace

MieSeries::MieSeries(double kappa, const Vec3& direction, const Vec3& polarization)
    : kappa_(kappa) {
  IGABEM_REQUIRE(kappa > 0.0, "wavenumber must be positive");
  IGABEM_REQUIRE(std::abs(direction.norm() - 1.0) < 1e-12, "direction must be unit");
  IGABEM_REQUIRE(std::abs(polarization.norm() - 1.0) < 1e-12, "polarization must be unit");
  IGABEM_REQUIRE(std::abs(direction.dot(polarization)) < 1e-12,
                 "polarization must be orthogonal to the direction");
  rot_.row(0) = polarization;
  rot_.row(1) = direction.cross(polarization);
  rot_.row(2) = direction;

  // truncation: super-exponential coefficient decay past n ~ kappa
  int L = static_cast<int>(std::ceil(kappa)) + 15;
  for (;; L += 5) {
    const Eigen::VectorXd j = spherical_bessel_j(L + 1, kappa);
    const Eigen::VectorXd y = spherical_bessel_y(L + 1, kappa);
    psi_.resize(L + 1);
    dpsi_.resize(L + 1);
    xi_.resize(L + 1);
    dxi_.resize(L + 1);
    a_.resize(L + 1);
    b_.resize(L + 1);
    for (int n = 1; n <= L; ++n) {
      const Complex h(j[n], y[n]);
      const double djn = j[n - 1] - (n + 1.0) / kappa * j[n];
      const Complex dhn = Complex(j[n - 1], y[n - 1]) - (n + 1.0) / kappa * h;
      psi_[n] = kappa * j[n];
      dpsi_[n] = j[n] + kappa * djn;
      xi_[n] = kappa * h;
      dxi_[n] = h + kappa * dhn;
      a_[n] = dpsi_[n] / dxi_[n];
      b_[n] = psi_[n] / xi_[n];
    }
    const double head = std::abs(a_[1]) + std::abs(b_[1]);
    if (std::abs(a_[L]) + std::abs(b_[L]) < 1e-14 * head || L > 220) break;
  }
  order_ = L;
}

CVec3 MieSeries::current_canonical(const Vec3& point) const {
  const double r = point.norm();
  IGABEM_REQUIRE(std::abs(r - 1.0) < 1e-10, "surface current needs a point on the unit sphere");
  Vec3 x = point / r;
  double mu = x[2];
  double sin_theta = std::sqrt(std::max(0.0, 1.0 - mu * mu));
  if (sin_theta < 1e-12) {
    // nudge away from the coordinate poles of the canonical frame
    x = (x + Vec3(1e-9, 0, 0)).normalized();
    mu = x[2];
    sin_theta = std::sqrt(std::max(0.0, 1.0 - mu * mu));
  }
  const double phi = std::atan2(x[1], x[0]);
  const double cphi = std::cos(phi), sphi = std::sin(phi);
  const Vec3 that(mu * cphi, mu * sphi, -sin_theta);
  const Vec3 phat(-sphi, cphi, 0.0);

  Eigen::VectorXd pi, tau;
  angular_functions(order_, mu, pi, tau);
  const double rho = kappa_;
  const Eigen::VectorXd j = spherical_bessel_j(order_, rho);
  const Eigen::VectorXd y = spherical_bessel_y(order_, rho);

  // scattered H = sum E_n (i b_n N3_o1n + a_n M3_e1n), k/(omega mu) = 1
  Complex h_theta = 0.0, h_phi = 0.0;
  Complex in_power(0.0, 1.0);  // i^n starting at n=1
  for (int n = 1; n <= order_; ++n) {
    const Complex en = in_power * (2.0 * n + 1.0) / (n * (n + 1.0));
    const Complex hn(j[n], y[n]);
    const Complex zn = hn;                 // h_n(rho)
    const Complex dzrho = dxi_[n] / rho;   // [rho z_n]' / rho
    // N_o1n tangential: (sin phi tau_n dzrho, cos phi pi_n dzrho)
    // M_e1n tangential: (-sin phi pi_n z_n, -cos phi tau_n z_n)
    h_theta += en * (Complex(0, 1) * b_[n] * sphi * tau[n] * dzrho -
                     a_[n] * sphi * pi[n] * zn);
    h_phi += en * (Complex(0, 1) * b_[n] * cphi * pi[n] * dzrho -
                   a_[n] * cphi * tau[n] * zn);
    in_power *= Complex(0.0, 1.0);
  }
  // incident H = y-hat e^{i kappa z}
  const Complex inc = std::polar(1.0, kappa_ * x[2]);
  const Complex hi_theta = inc * that[1];
  const Complex hi_phi = inc * phat[1];
  h_theta += hi_theta;
  h_phi += hi_phi;

  // J = r x H ; w = i kappa J
  const CVec3 J = h_theta * phat.cast<Complex>() - h_phi * that.cast<Complex>();
  return Complex(0.0, kappa_) * J;
}

CVec3 MieSeries::scattered_canonical(const Vec3& xin) const {
  const double r = xin.norm();
  IGABEM_REQUIRE(r > 1.0, "scattered field evaluated inside the sphere");
  Vec3 x = xin / r;
  double mu = x[2];
  double sin_theta = std::sqrt(std::max(0.0, 1.0 - mu * mu));
  if (sin_theta < 1e-12) {
    x = (x + Vec3(1e-9, 0, 0)).normalized();
    mu = x[2];
    sin_theta = std::sqrt(std::max(0.0, 1.0 - mu * mu));
  }
  const double phi = std::atan2(x[1], x[0]);
  const double cphi = std::cos(phi), sphi = std::sin(phi);
  const Vec3 rhat = x;
  const Vec3 that(mu * cphi, mu * sphi, -sin_theta);
  const Vec3 phat(-sphi, cphi, 0.0);

  const double rho = kappa_ * r;
  Eigen::VectorXd pi, tau;
  angular_functions(order_, mu, pi, tau);
  const Eigen::VectorXd j = spherical_bessel_j(order_ + 1, rho);
  const Eigen::VectorXd y = spherical_bessel_y(order_ + 1, rho);

  Complex e_r = 0.0, e_theta = 0.0, e_phi = 0.0;
  Complex in_power(0.0, 1.0);
  for (int n = 1; n <= order_; ++n) {
    const Complex en = in_power * (2.0 * n + 1.0) / (n * (n + 1.0));
    const Complex hn(j[n], y[n]);
    const Complex dh = Complex(j[n - 1], y[n - 1]) - (n + 1.0) / rho * hn;
    const Complex dzrho = (hn + rho * dh) / rho;  // [rho h_n]'(rho) / rho
    // E_s = sum E_n (i a_n N3_e1n - b_n M3_o1n)
    e_r += en * Complex(0, 1) * a_[n] * cphi * (n * (n + 1.0)) * sin_theta * pi[n] * hn / rho;
    e_theta += en * (Complex(0, 1) * a_[n] * cphi * tau[n] * dzrho -
                     b_[n] * cphi * pi[n] * hn);
    e_phi += en * (-Complex(0, 1) * a_[n] * sphi * pi[n] * dzrho +
                   b_[n] * sphi * tau[n] * hn);
    in_power *= Complex(0.0, 1.0);
  }
  return e_r * rhat.cast<Complex>() + e_theta * that.cast<Complex>() +
         e_phi * phat.cast<Complex>();
}

CVec3 MieSeries::surface_current(const Vec3& point) const {
  const Vec3 canonical = rot_ * point;
  return rot_.transpose() * current_canonical(canonical);
}

CVec3 MieSeries::scattered_field(const Vec3& x) const {
  const Vec3 canonical = rot_ * x;
  return rot_.transpose() * scattered_canonical(canonical);
}

CVec3 MieSeries::total_tangential_field(const Vec3& point) const {
  const Vec3 x = point / point.norm();
  const double eps = 1e-8;  // just outside the conductor
  const Vec3 xe = (1.0 + eps) * x;
  const CVec3 e_inc = std::polar(1.0, kappa_ * (rot_ * xe)[2]) *
                      rot_.transpose().col(0).cast<Complex>();
  const CVec3 e = e_inc + scattered_field(xe);
  return e - x.cast<Complex>() * (x.cast<Complex>().dot(e));
}

double density_l2_error(const DivConformingSpace& space, const VectorXcd& super_coeffs,
                        const std::function<CVec3(const Vec3&)>& reference,
                        int quadrature_order) {
  const SuperSpaceLayout& layout = space.superspace();
  const MultipatchGeometry& geometry = space.geometry();
  const int n = quadrature_order > 0 ? quadrature_order : layout.degree + 4;
  const QuadratureRule2D rule = gauss_square(n);
  double total = 0.0;
  for (int ip = 0; ip < layout.num_patches; ++ip)
    for (int k = 0; k < layout.elems_per_patch(); ++k) {
      const ElementIndex lambda{ip, layout.level, k};
      for (size_t g = 0; g < rule.points.size(); ++g) {
        const auto sample = space.eval_superspace(super_coeffs, lambda, rule.points[g]);
        const PatchSample geo = geometry.eval(lambda, rule.points[g]);
        const CVec3 diff = sample.field - reference(geo.position);
        total += rule.weights[g] * diff.squaredNorm() * geo.surface_measure;
      }
    }
  return std::sqrt(total);
}

}  // namespace igabem
