#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "igabem/fields.hpp"
#include "igabem/mie.hpp"

using namespace igabem;

namespace {
std::vector<Vec3> sphere_points(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<Vec3> pts;
  while (static_cast<int>(pts.size()) < n) {
    Vec3 x(gauss(rng), gauss(rng), gauss(rng));
    if (x.norm() > 0.1) pts.push_back(x.normalized());
  }
  return pts;
}

CVec3 fd_partial(const std::function<CVec3(const Vec3&)>& f, const Vec3& x, int d, double h) {
  Vec3 e = Vec3::Zero();
  e[d] = 1.0;
  return (-f(x + 2 * h * e) + 8.0 * f(x + h * e) - 8.0 * f(x - h * e) + f(x - 2 * h * e)) /
         (12.0 * h);
}

CVec3 fd_curl(const std::function<CVec3(const Vec3&)>& f, const Vec3& x, double h) {
  const CVec3 dx = fd_partial(f, x, 0, h);
  const CVec3 dy = fd_partial(f, x, 1, h);
  const CVec3 dz = fd_partial(f, x, 2, h);
  return CVec3(dy[2] - dz[1], dz[0] - dx[2], dx[1] - dy[0]);
}
}  // namespace

TEST_CASE("Bessel Wronskian identity") {
  for (double x : {0.5, 1.0, 3.7, 12.0, 22.0}) {
    const int L = 30;
    const Eigen::VectorXd j = spherical_bessel_j(L, x);
    const Eigen::VectorXd y = spherical_bessel_y(L, x);
    for (int n = 1; n <= L; ++n) {
      const double dj = j[n - 1] - (n + 1.0) / x * j[n];
      const double dy = y[n - 1] - (n + 1.0) / x * y[n];
      const double wronskian = j[n] * dy - dj * y[n];
      CHECK(std::abs(wronskian - 1.0 / (x * x)) < 1e-12 * std::max(1.0, 1.0 / (x * x)));
    }
  }
}

TEST_CASE("Bessel values against closed forms for n = 0, 1") {
  for (double x : {0.3, 1.0, 6.28}) {
    const Eigen::VectorXd j = spherical_bessel_j(3, x);
    CHECK(j[0] == doctest::Approx(std::sin(x) / x).epsilon(1e-13));
    CHECK(j[1] == doctest::Approx(std::sin(x) / (x * x) - std::cos(x) / x).epsilon(1e-12));
    const Eigen::VectorXd y = spherical_bessel_y(1, x);
    CHECK(y[0] == doctest::Approx(-std::cos(x) / x).epsilon(1e-13));
  }
}

TEST_CASE("surface current is tangential") {
  MieSeries mie(1.0);
  for (const Vec3& x : sphere_points(50, 3)) {
    const CVec3 w = mie.surface_current(x);
    CHECK(std::abs(x.cast<Complex>().dot(w)) < 1e-10 * w.norm());
  }
}

TEST_CASE("total tangential electric field vanishes on the conductor") {
  for (double kappa : {0.7, 1.0, 2.6}) {
    MieSeries mie(kappa);
    double worst = 0.0;
    for (const Vec3& x : sphere_points(60, 11)) {
      worst = std::max(worst, mie.total_tangential_field(x).norm());
    }
    CHECK(worst < 1e-7);  // boundary condition of the scattering solution
  }
}

TEST_CASE("scattered field satisfies Maxwell coupling: H from the curl of E") {
  MieSeries mie(1.0);
  const auto es = [&](const Vec3& x) { return mie.scattered_field(x); };
  // H_s = curl E_s / (i kappa); verify the scattered field solves the wave
  // equation through a double curl
  for (const Vec3& xhat : sphere_points(8, 21)) {
    const Vec3 x = 2.2 * xhat;
    const auto curl = [&](const Vec3& y) { return fd_curl(es, y, 1e-3); };
    const CVec3 curlcurl = fd_curl(curl, x, 1e-3);
    const CVec3 residual = curlcurl - mie.scattered_field(x);
    CHECK(residual.norm() < 1e-5 * mie.scattered_field(x).norm());
  }
}

TEST_CASE("series is self-converged in the truncation order") {
  MieSeries mie(1.0);
  CHECK(mie.order() >= 16);  // ceil(kappa) + 15
  // the high-order tail contributes nothing at sample points
  MieSeries longer(1.0 + 1e-15);
  for (const Vec3& x : sphere_points(50, 31)) {
    CHECK((mie.surface_current(x) - longer.surface_current(x)).norm() <
          1e-12 * mie.surface_current(x).norm() + 1e-13);
  }
}

TEST_CASE("rotational equivariance of the current") {
  Eigen::Matrix3d R;
  R = Eigen::AngleAxisd(0.83, Vec3(1, 2, -1).normalized());
  MieSeries canonical(1.3);
  MieSeries rotated(1.3, R * Vec3::UnitZ(), R * Vec3::UnitX());
  for (const Vec3& x : sphere_points(40, 41)) {
    const CVec3 w1 = rotated.surface_current(R * x);
    const CVec3 w2 = R * canonical.surface_current(x);
    CHECK((w1 - w2).norm() < 1e-11 * (w2.norm() + 1.0));
  }
}

TEST_CASE("current density solves the electric field integral equation") {
  // quadrature of the single layer ansatz over the exact sphere must
  // reproduce the series' scattered field at exterior points
  MieSeries mie(1.0);
  MultipatchGeometry sphere = unit_sphere();
  const QuadratureRule2D rule = gauss_square(22);
  const double kappa = 1.0;
  for (const Vec3& xhat : sphere_points(4, 51)) {
    const Vec3 x = 3.0 * xhat;
    CVec3 single = CVec3::Zero();
    CVec3 gradpart = CVec3::Zero();
    // int G w dsigma + (1/kappa^2) grad int G div w dsigma; the divergence
    // term is obtained from the tangential-gradient identity
    // grad_x int G div w = -grad_x int grad_{Gamma,y} G . w  -- instead use
    // the vector calculus free route: integrate G w and (grad_x G)(div w)
    // with div w computed by the surface divergence of the series through
    // central differences in the parametrization
    for (int ip = 0; ip < 6; ++ip) {
      for (size_t g = 0; g < rule.points.size(); ++g) {
        const PatchSample geo = sphere.patch(ip).eval(rule.points[g]);
        const CVec3 w = mie.surface_current(geo.position);
        single += rule.weights[g] * geo.surface_measure *
                  helmholtz_kernel(kappa, x, geo.position) * w;
        // surface divergence via the pullback: div_G w = (1/tau) div(iota_1 w)
        const double h = 1e-5;
        Complex div = 0.0;
        for (int d = 0; d < 2; ++d) {
          Vec2 sp = rule.points[g], sm = rule.points[g];
          sp[d] += h;
          sm[d] -= h;
          const PatchSample gp = sphere.patch(ip).eval(sp);
          const PatchSample gm = sphere.patch(ip).eval(sm);
          // iota_1 pullback component d: tau (dF^T dF)^{-1} dF^T w ... use
          // the equivalent flux form: component = (dF adjugate row) . w
          const auto comp = [&](const PatchSample& s, const CVec3& wv) {
            const Eigen::Matrix2d gram = s.jacobian.transpose() * s.jacobian;
            const Eigen::Vector2cd rhs = s.jacobian.transpose().cast<Complex>() * wv;
            const Eigen::Vector2cd pull = gram.inverse().cast<Complex>() * rhs;
            return s.surface_measure * pull[d];
          };
          div += (comp(gp, mie.surface_current(gp.position)) -
                  comp(gm, mie.surface_current(gm.position))) /
                 (2.0 * h);
        }
        div /= geo.surface_measure;
        gradpart += rule.weights[g] * geo.surface_measure * div *
                    helmholtz_kernel_gradient(kappa, x, geo.position);
      }
    }
    const CVec3 reconstructed = single + gradpart / (kappa * kappa);
    const CVec3 reference = mie.scattered_field(x);
    CHECK((reconstructed - reference).norm() < 1e-5 * reference.norm());
  }
}

TEST_CASE("density L2 error: trivial values") {
  MultipatchGeometry sphere = unit_sphere();
  DivConformingSpace space(sphere, 1, 1);
  std::mt19937 rng(61);
  std::normal_distribution<double> gauss;
  VectorXcd w(space.superspace().dim());
  for (int i = 0; i < w.size(); ++i) w[i] = Complex(gauss(rng), gauss(rng));
  CHECK(density_l2_error(space, w, [](const Vec3&) { return CVec3::Zero(); }) > 0.0);
  CHECK(density_l2_error(space, VectorXcd::Zero(w.size()),
                         [](const Vec3&) { return CVec3::Zero(); }) == 0.0);
  // constant mismatch c on a unit-area flat patch gives exactly |c|
  MultipatchGeometry flat({flat_patch(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0))});
  DivConformingSpace fspace(flat, 1, 0);
  const VectorXcd zero = VectorXcd::Zero(fspace.superspace().dim());
  const double cerr = density_l2_error(
      fspace, zero, [](const Vec3&) { return CVec3(Complex(0.3, 0.4), 0, 0); });
  CHECK(cerr == doctest::Approx(0.5).epsilon(1e-12));  // |c| = 0.5 on unit area
}

TEST_CASE("discrete density reproduces itself to machine precision") {
  MultipatchGeometry sphere = unit_sphere();
  DivConformingSpace space(sphere, 2, 1);
  std::mt19937 rng(71);
  std::normal_distribution<double> gauss;
  VectorXcd c(space.dim());
  for (int i = 0; i < c.size(); ++i) c[i] = Complex(gauss(rng), gauss(rng));
  const VectorXcd super = [&] {
    VectorXcd s = VectorXcd::Zero(space.superspace().dim());
    const SparseMatrixD& T = space.transform();
    for (int k = 0; k < T.outerSize(); ++k)
      for (SparseMatrixD::InnerIterator it(T, k); it; ++it)
        s[it.row()] += it.value() * c[it.col()];
    return s;
  }();
  // reference closure via the independent direct-spline evaluation path
  const double err = density_l2_error(space, super, [&](const Vec3& x) -> CVec3 {
    for (int ip = 0; ip < 6; ++ip) {
      // invert the patch map by local search only on the owning patch; the
      // quadrature points come in patch order, so find the parameter by
      // a fine grid + refinement
      const NurbsPatch& patch = sphere.patch(ip);
      Vec2 best(-1, -1);
      double bestd = 1e9;
      for (double u = 0.0125; u < 1; u += 0.025)
        for (double v = 0.0125; v < 1; v += 0.025) {
          const double d = (patch.position(Vec2(u, v)) - x).norm();
          if (d < bestd) {
            bestd = d;
            best = Vec2(u, v);
          }
        }
      if (bestd > 0.08) continue;
      // Newton refinement on the patch
      Vec2 s = best;
      for (int iter = 0; iter < 60; ++iter) {
        const PatchSample g = patch.eval(s);
        const Eigen::Vector2d r = g.jacobian.transpose() * (g.position - x);
        const Eigen::Matrix2d J = g.jacobian.transpose() * g.jacobian;
        const Eigen::Vector2d step = J.ldlt().solve(r);
        s -= step;
        s[0] = std::clamp(s[0], 0.0, 1.0);
        s[1] = std::clamp(s[1], 0.0, 1.0);
        if (step.norm() < 1e-14) break;
      }
      if ((patch.position(s) - x).norm() < 1e-11)
        return space.eval_direct(c, ip, s).field;
    }
    return CVec3::Zero();
  });
  CHECK(err < 1e-10);
}
