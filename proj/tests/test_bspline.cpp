#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "igabem/bspline.hpp"

using namespace igabem;

namespace {
Eigen::VectorXd dense_basis(const KnotVector& kv, double x) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kv.dim());
  const BasisValues b = eval_basis(kv, x);
  for (int k = 0; k < b.values.size(); ++k) v[b.first + k] = b.values[k];
  return v;
}
}  // namespace

TEST_CASE("hat functions on one element") {
  KnotVector kv(1, {0, 0, 1, 1});
  const BasisValues b = eval_basis(kv, 0.25);
  CHECK(b.first == 0);
  CHECK(b.values[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(b.values[1] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("degree zero basis is the characteristic function of its span") {
  KnotVector kv = KnotVector::uniform_open(0, 4);
  for (double x : {0.05, 0.3, 0.55, 0.9}) {
    const Eigen::VectorXd v = dense_basis(kv, x);
    for (int j = 0; j < kv.dim(); ++j) {
      const bool inside = kv.knots()[j] <= x && x < kv.knots()[j + 1];
      CHECK(v[j] == (inside ? 1.0 : 0.0));
    }
  }
  // closed-interval convention at x = 1
  const Eigen::VectorXd v1 = dense_basis(kv, 1.0);
  CHECK(v1[kv.dim() - 1] == 1.0);
}

TEST_CASE("rightmost basis function is one at x = 1") {
  for (int p : {1, 2, 3}) {
    KnotVector kv = KnotVector::uniform_open(p, 4);
    const BasisValues b = eval_basis(kv, 1.0);
    CHECK(b.first + b.values.size() == kv.dim());
    CHECK(b.values[b.values.size() - 1] == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("partition of unity and non-negativity") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int p : {0, 1, 2, 3, 4}) {
    for (int m : {1, 2, 8}) {
      KnotVector kv = KnotVector::uniform_open(p, m);
      for (int trial = 0; trial < 200; ++trial) {
        const double x = (trial == 0) ? 0.37 : unif(rng);
        const BasisValues b = eval_basis(kv, x);
        CHECK(b.values.sum() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(b.values.minCoeff() >= -1e-15);
      }
    }
  }
}

TEST_CASE("local support") {
  KnotVector kv = KnotVector::uniform_open(2, 8);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const double x = unif(rng);
    const Eigen::VectorXd v = dense_basis(kv, x);
    for (int j = 0; j < kv.dim(); ++j) {
      const bool in_support = kv.knots()[j] <= x && x <= kv.knots()[j + kv.degree() + 1];
      if (!in_support) CHECK(v[j] == 0.0);
    }
  }
}

TEST_CASE("first derivative of hats") {
  KnotVector kv(1, {0, 0, 1, 1});
  for (double x : {0.0, 0.2, 0.77, 1.0}) {
    const BasisValues d = eval_basis_derivative(kv, x, 1);
    CHECK(d.values[0] == doctest::Approx(-1.0));
    CHECK(d.values[1] == doctest::Approx(1.0));
  }
}

TEST_CASE("derivatives of the partition of unity sum to zero") {
  KnotVector kv = KnotVector::uniform_open(2, 4);
  const BasisValues d = eval_basis_derivative(kv, 0.3, 1);
  CHECK(std::abs(d.values.sum()) < 1e-13);
}

TEST_CASE("derivative order beyond the degree yields zeros, not an error") {
  KnotVector kv = KnotVector::uniform_open(2, 4);
  const BasisValues d = eval_basis_derivative(kv, 0.41, 3);
  CHECK(d.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("point outside the unit interval is a domain error") {
  KnotVector kv = KnotVector::uniform_open(2, 4);
  CHECK_THROWS_AS(eval_basis(kv, -0.01), std::domain_error);
  CHECK_THROWS_AS(eval_basis(kv, 1.01), std::domain_error);
}

TEST_CASE("analytic derivative matches central differences") {
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  const double h = 1e-6;
  for (int p : {1, 2, 3}) {
    KnotVector kv = KnotVector::uniform_open(p, 4);
    for (int trial = 0; trial < 40; ++trial) {
      double x = unif(rng);
      // stay away from knots where the derivative may jump
      for (double brk : kv.breaks())
        if (std::abs(x - brk) < 1e-3) x += 2e-3;
      const double x0 = (trial == 0 && p == 3) ? 0.2 : x;
      const Eigen::VectorXd fd =
          (dense_basis(kv, x0 + h) - dense_basis(kv, x0 - h)) / (2.0 * h);
      const BasisValues d = eval_basis_derivative(kv, x0, 1);
      for (int k = 0; k < d.values.size(); ++k)
        CHECK(d.values[k] == doctest::Approx(fd[d.first + k]).epsilon(0).scale(1).epsilon(1e-6));
    }
  }
}

TEST_CASE("second derivative consistency for cubics") {
  KnotVector kv = KnotVector::uniform_open(3, 4);
  const double h = 1e-5, x = 0.33;
  const Eigen::VectorXd fd =
      (dense_basis(kv, x + h) - 2.0 * dense_basis(kv, x) + dense_basis(kv, x - h)) / (h * h);
  const BasisValues d = eval_basis_derivative(kv, x, 2);
  for (int k = 0; k < d.values.size(); ++k)
    CHECK(std::abs(d.values[k] - fd[d.first + k]) < 1e-4 * std::max(1.0, fd.cwiseAbs().maxCoeff()));
}

TEST_CASE("extraction on a single element is the identity change of basis") {
  for (int p : {1, 2, 3}) {
    KnotVector kv = KnotVector::uniform_open(p, 1);
    const auto ex = bezier_extract_1d(kv);
    CHECK((ex.ops[0] - Eigen::MatrixXd::Identity(p + 1, p + 1)).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("extraction of hats restricted to the first of two elements") {
  KnotVector kv = KnotVector::uniform_open(1, 2);
  const auto ex = bezier_extract_1d(kv);
  REQUIRE(ex.ops.size() == 2);
  CHECK(ex.first[0] == 0);
  // on [0, 0.5]: b0 = 1-2x = 1-t, b1 = 2x = t in the local Bernstein basis
  Eigen::MatrixXd expected(2, 2);
  expected << 1, 0, 0, 1;
  CHECK((ex.ops[0] - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("extracted evaluation equals the recursion") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss;
  for (int p : {1, 2, 3}) {
    KnotVector kv = KnotVector::uniform_open(p, 4);
    const auto ex = bezier_extract_1d(kv);
    Eigen::VectorXd coeffs(kv.dim());
    for (int i = 0; i < coeffs.size(); ++i) coeffs[i] = gauss(rng);
    for (int trial = 0; trial < 1000; ++trial) {
      const double x = unif(rng);
      const double direct = eval_spline(kv, coeffs, x);
      const double fast = eval_via_extraction(kv, ex, coeffs, x);
      CHECK(std::abs(direct - fast) < 1e-13 * std::max(1.0, std::abs(direct)));
    }
  }
}

TEST_CASE("extraction to an elevated target degree") {
  KnotVector kv = KnotVector::uniform_open(2, 2);
  const auto ex = bezier_extract_1d(kv, 3);
  std::mt19937 rng(17);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd coeffs(kv.dim());
  for (int i = 0; i < coeffs.size(); ++i) coeffs[i] = gauss(rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = unif(rng);
    CHECK(std::abs(eval_spline(kv, coeffs, x) - eval_via_extraction(kv, ex, coeffs, x)) < 1e-13);
  }
}

TEST_CASE("interpolating a constant gives unit coefficients") {
  KnotVector kv = KnotVector::uniform_open(3, 4);
  const Eigen::VectorXd c = interpolate_1d(kv, Eigen::VectorXd::Ones(kv.dim()));
  CHECK((c - Eigen::VectorXd::Ones(kv.dim())).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("interpolating x on the linear single-element space") {
  KnotVector kv(1, {0, 0, 1, 1});
  const auto g = kv.greville();
  Eigen::VectorXd samples(2);
  samples << g[0], g[1];
  const Eigen::VectorXd c = interpolate_1d(kv, samples);
  CHECK(c[0] == doctest::Approx(0.0));
  CHECK(c[1] == doctest::Approx(1.0));
}

TEST_CASE("interpolation round-trips a random spline") {
  std::mt19937 rng(101);
  std::normal_distribution<double> gauss;
  for (int p : {1, 2, 4}) {
    KnotVector kv = KnotVector::uniform_open(p, 8);
    Eigen::VectorXd coeffs(kv.dim());
    for (int i = 0; i < coeffs.size(); ++i) coeffs[i] = gauss(rng);
    const auto g = kv.greville();
    Eigen::VectorXd samples(kv.dim());
    for (int i = 0; i < kv.dim(); ++i) samples[i] = eval_spline(kv, coeffs, g[i]);
    const Eigen::VectorXd rec = interpolate_1d(kv, samples);
    CHECK((rec - coeffs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("knot vector validation") {
  CHECK_THROWS(KnotVector(1, {0, 0.5, 1}));             // not p-open
  CHECK_THROWS(KnotVector(1, {0, 0, 0.6, 0.4, 1, 1}));  // decreasing
  CHECK_THROWS(KnotVector(1, {0, 0, 0.5, 0.5, 0.5, 1, 1}));  // multiplicity 3 > p+1
  const KnotVector kv = KnotVector::uniform_open(2, 4);
  CHECK(kv.dim() == 6);
  CHECK(kv.num_elements() == 4);
}

TEST_CASE("tensor space dimensions and evaluation") {
  TensorSplineSpace sp(KnotVector::uniform_open(2, 2), KnotVector::uniform_open(1, 2));
  CHECK(sp.dim() == 4 * 3);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(sp.dim());
  c[sp.index(1, 1)] = 1.0;
  const double v = sp.eval(c, 0.3, 0.6);
  const Eigen::VectorXd bx = dense_basis(sp.knots_x(), 0.3);
  const Eigen::VectorXd by = dense_basis(sp.knots_y(), 0.6);
  CHECK(v == doctest::Approx(bx[1] * by[1]).epsilon(1e-14));
}
