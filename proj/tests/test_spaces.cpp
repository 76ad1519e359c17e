#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/SparseQR>
#include <random>

#include "igabem/spaces.hpp"

using namespace igabem;

namespace {
VectorXcd random_coeffs(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  VectorXcd c(n);
  for (int i = 0; i < n; ++i) c[i] = Complex(gauss(rng), gauss(rng));
  return c;
}

MultipatchGeometry two_flat_patches() {
  return MultipatchGeometry({flat_patch(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)),
                             flat_patch(Vec3(0, 1, 0), Vec3(1, 0, 0), Vec3(0, 1, 0))});
}
}  // namespace

TEST_CASE("component dimensions for p=1, m=1 on one patch") {
  MultipatchGeometry g({flat_patch(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0))});
  DivConformingSpace space(g, 1, 1);
  CHECK(space.component_space(0).dim() == 6);   // 3 * 2
  CHECK(space.component_space(1).dim() == 6);
  CHECK(space.superspace().scalar_dim() == 16); // 4 elements * 4 local
  CHECK(space.patchlocal_transform(0).rows() == 16);
  CHECK(space.patchlocal_transform(0).cols() == 6);
  // open single patch: nothing glued
  CHECK(space.dim() == 12);
}

TEST_CASE("patch-local transform reproduces spline values (m=0 and m=2)") {
  MultipatchGeometry g({flat_patch(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0))});
  std::mt19937 rng(7);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int p : {1, 2, 3}) {
    for (int m : {0, 2}) {
      DivConformingSpace space(g, p, m);
      for (int comp = 0; comp < 2; ++comp) {
        const SparseMatrixD& pl = space.patchlocal_transform(comp);
        const TensorSplineSpace& sp = space.component_space(comp);
        Eigen::VectorXd c(sp.dim());
        for (int i = 0; i < c.size(); ++i) c[i] = gauss(rng);
        const Eigen::VectorXd local = pl * c;  // element Bernstein coefficients (x 2^-m)
        for (int trial = 0; trial < 60; ++trial) {
          const Vec2 sp_pt(unif(rng), unif(rng));
          const double direct = sp.eval(c, sp_pt[0], sp_pt[1]);
          // locate element and evaluate the local polynomial
          const int e1 = sp.knots_x().find_element(sp_pt[0]);
          const int e2 = sp.knots_y().find_element(sp_pt[1]);
          const int ne = 1 << m;
          const double lx = sp_pt[0] * ne - e1, ly = sp_pt[1] * ne - e2;
          Eigen::VectorXd bx, by;
          bernstein_values(p, lx, bx);
          bernstein_values(p, ly, by);
          int elem = 0;
          for (int b = 0; b < m; ++b) {
            elem |= ((e1 >> b) & 1) << (2 * b);
            elem |= ((e2 >> b) & 1) << (2 * b + 1);
          }
          double via_local = 0.0;
          for (int i = 0; i <= p; ++i)
            for (int j = 0; j <= p; ++j)
              via_local += local[elem * (p + 1) * (p + 1) + i * (p + 1) + j] * bx[i] * by[j];
          via_local *= std::ldexp(1.0, m);  // undo the element-level scaling
          CHECK(std::abs(direct - via_local) < 1e-12 * std::max(1.0, std::abs(direct)));
        }
      }
    }
  }
}

TEST_CASE("constant-in-x spline has repeating local coefficients across x-neighbors") {
  MultipatchGeometry g({flat_patch(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0))});
  DivConformingSpace space(g, 2, 1);
  const TensorSplineSpace& sp = space.component_space(0);
  Eigen::VectorXd c(sp.dim());
  std::mt19937 rng(3);
  std::normal_distribution<double> gauss;
  // coefficients depending only on the y index give a field constant in x
  std::vector<double> cy(sp.knots_y().dim());
  for (auto& v : cy) v = gauss(rng);
  for (int ix = 0; ix < sp.knots_x().dim(); ++ix)
    for (int iy = 0; iy < sp.knots_y().dim(); ++iy) c[sp.index(ix, iy)] = cy[iy];
  const Eigen::VectorXd local = space.patchlocal_transform(0) * c;
  const int loc = 9;
  // Morton cells 0:(0,0) and 1:(1,0) are horizontal neighbors
  for (int l = 0; l < loc; ++l)
    CHECK(local[0 * loc + l] == doctest::Approx(local[1 * loc + l]).epsilon(1e-13));
}

TEST_CASE("sphere DOF counts match the reference tables") {
  MultipatchGeometry sphere = unit_sphere();
  CHECK(DivConformingSpace(sphere, 1, 1).dim_real() == 96);
  CHECK(DivConformingSpace(sphere, 2, 1).dim_real() == 216);
  CHECK(DivConformingSpace(sphere, 1, 2).dim_real() == 384);
}

TEST_CASE("two glued flat patches: dimension drops by the shared normal trace") {
  MultipatchGeometry g = two_flat_patches();
  for (int p : {1, 2}) {
    for (int m : {0, 1}) {
      DivConformingSpace space(g, p, m);
      const int per_patch = 2 * ((1 << m) + p) * ((1 << m) + p - 1);
      const int trace = (1 << m) + p - 1;
      CHECK(space.dim() == 2 * per_patch - trace);
    }
  }
}

TEST_CASE("dual evaluation: superspace route equals direct spline route") {
  MultipatchGeometry sphere = unit_sphere();
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> unif(0.01, 0.99);
  std::uniform_int_distribution<int> pidx(0, 5);
  for (int p : {1, 2}) {
    DivConformingSpace space(sphere, p, 1);
    const VectorXcd c = random_coeffs(space.dim(), 100 + p);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const int patch = pidx(rng);
      const Vec2 s(unif(rng), unif(rng));
      // element containing s at level 1
      const int e1 = s[0] < 0.5 ? 0 : 1, e2 = s[1] < 0.5 ? 0 : 1;
      const ElementIndex lambda{patch, 1, e1 + 2 * e2};
      const Vec2 local(2.0 * s[0] - e1, 2.0 * s[1] - e2);
      const auto via_super = space.eval(c, lambda, local);
      const auto direct = space.eval_direct(c, patch, s);
      worst = std::max(worst, (via_super.field - direct.field).norm());
      worst = std::max(worst, std::abs(via_super.divergence - direct.divergence));
    }
    CHECK(worst < 1e-11 * c.norm());
  }
}

TEST_CASE("normal component is continuous across every interface") {
  MultipatchGeometry sphere = unit_sphere();
  for (int p : {1, 2}) {
    DivConformingSpace space(sphere, p, 1);
    // sample a handful of global basis functions plus a random combination
    std::vector<VectorXcd> funcs;
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> didx(0, space.dim() - 1);
    for (int k = 0; k < 12; ++k) {
      VectorXcd e = VectorXcd::Zero(space.dim());
      e[didx(rng)] = 1.0;
      funcs.push_back(e);
    }
    funcs.push_back(random_coeffs(space.dim(), 51));

    for (const auto& itf : sphere.interfaces()) {
      for (int k = 0; k < 100; ++k) {
        // generic points: the normal trace is only L2 along the edge, so stay
        // clear of the knot lines where one-sided limits may differ
        const double t = (k + 0.38196601125) / 100.0;
        const double tb = itf.reversed ? 1.0 - t : t;
        const Vec2 sa = edge_point(itf.edge_a, t);
        const Vec2 sb = edge_point(itf.edge_b, tb);
        // physical edge tangent and conormal from side a
        const PatchSample ga = sphere.patch(itf.patch_a).eval(sa);
        const Vec2 dir_a = edge_point(itf.edge_a, 1.0) - edge_point(itf.edge_a, 0.0);
        const Vec3 tangent = ga.jacobian * dir_a;
        const Vec3 conormal = ga.normal.cross(tangent).normalized();
        for (const auto& f : funcs) {
          const auto va = space.eval_direct(f, itf.patch_a, sa);
          const auto vb = space.eval_direct(f, itf.patch_b, sb);
          const double jump = std::abs(((va.field - vb.field).dot(conormal.cast<Complex>())));
          CHECK(jump < 1e-11 * std::max(1.0, std::sqrt(static_cast<double>(f.size()))));
        }
      }
    }
  }
}

TEST_CASE("closed surface: total divergence of every basis function vanishes") {
  MultipatchGeometry sphere = unit_sphere();
  DivConformingSpace space(sphere, 1, 1);
  const QuadratureRule2D rule = gauss_square(4);
  for (int d = 0; d < space.dim(); ++d) {
    VectorXcd e = VectorXcd::Zero(space.dim());
    e[d] = 1.0;
    const VectorXcd super = space.transform() * e;
    Complex total = 0.0;
    for (int ip = 0; ip < 6; ++ip)
      for (int k = 0; k < 4; ++k) {
        const ElementIndex lambda{ip, 1, k};
        for (size_t q = 0; q < rule.points.size(); ++q) {
          const auto v = space.eval_superspace(super, lambda, rule.points[q]);
          const PatchSample geo = sphere.eval(lambda, rule.points[q]);
          total += rule.weights[q] * v.divergence * geo.surface_measure;
        }
      }
    CHECK(std::abs(total) < 1e-10);
  }
}

TEST_CASE("transformation matrix has full column rank") {
  MultipatchGeometry sphere = unit_sphere();
  for (int p : {1, 2}) {
    DivConformingSpace space(sphere, p, 1);
    Eigen::SparseQR<SparseMatrixD, Eigen::COLAMDOrdering<int>> qr;
    SparseMatrixD T = space.transform();
    T.makeCompressed();
    qr.compute(T);
    CHECK(qr.rank() == space.dim());
  }
}

TEST_CASE("divergence of the discrete space lies in the patchwise S2 space") {
  MultipatchGeometry sphere = unit_sphere();
  const int p = 2, m = 1;
  DivConformingSpace space(sphere, p, m);
  const TensorSplineSpace s2(KnotVector::uniform_open(p - 1, 1 << m),
                             KnotVector::uniform_open(p - 1, 1 << m));
  // sample points per patch
  const QuadratureRule2D rule = gauss_square(p + 2);
  std::vector<Vec2> pts;
  for (int e1 = 0; e1 < (1 << m); ++e1)
    for (int e2 = 0; e2 < (1 << m); ++e2)
      for (const auto& q : rule.points)
        pts.emplace_back((e1 + q[0]) / (1 << m), (e2 + q[1]) / (1 << m));
  Eigen::MatrixXd basis(pts.size(), s2.dim());
  for (size_t r = 0; r < pts.size(); ++r)
    for (int j = 0; j < s2.dim(); ++j) {
      Eigen::VectorXd ej = Eigen::VectorXd::Zero(s2.dim());
      ej[j] = 1.0;
      basis(r, j) = s2.eval(ej, pts[r][0], pts[r][1]);
    }
  const auto solver = basis.colPivHouseholderQr();

  std::mt19937 rng(77);
  std::uniform_int_distribution<int> didx(0, space.dim() - 1);
  for (int trial = 0; trial < 10; ++trial) {
    VectorXcd e = VectorXcd::Zero(space.dim());
    e[didx(rng)] = 1.0;
    for (int ip = 0; ip < 6; ++ip) {
      Eigen::VectorXd vals(pts.size());
      for (size_t r = 0; r < pts.size(); ++r) {
        // divergence times tau is the reference-domain divergence (iota_2 rule)
        const auto v = space.eval_direct(e, ip, pts[r]);
        const PatchSample geo = sphere.patch(ip).eval(pts[r]);
        vals[r] = v.divergence.real() * geo.surface_measure;
      }
      const Eigen::VectorXd fit = solver.solve(vals);
      const double resid = (basis * fit - vals).norm();
      CHECK(resid < 1e-10 * std::max(1.0, vals.norm()));
    }
  }
}

TEST_CASE("transform triplet export") {
  MultipatchGeometry g = two_flat_patches();
  DivConformingSpace space(g, 1, 0);
  space.write_transform_triplets("T_triplets.txt");
  std::ifstream in("T_triplets.txt");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == space.transform().nonZeros());
  std::remove("T_triplets.txt");
}
