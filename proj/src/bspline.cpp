#include "igabem/bspline.hpp"

#include <algorithm>
#include <cmath>

namespace igabem {

KnotVector::KnotVector(int degree, std::vector<double> knots)
    : degree_(degree), knots_(std::move(knots)) {
  IGABEM_REQUIRE(degree_ >= 0, "knot vector: degree must be non-negative");
  const int n = static_cast<int>(knots_.size());
  IGABEM_REQUIRE(n >= 2 * (degree_ + 1), "knot vector: too few knots for degree");
  for (int i = 0; i + 1 < n; ++i)
    IGABEM_REQUIRE(knots_[i] <= knots_[i + 1], "knot vector: knots must be non-decreasing");
  for (int i = 0; i <= degree_; ++i) {
    IGABEM_REQUIRE(knots_[i] == 0.0, "knot vector: not p-open at 0");
    IGABEM_REQUIRE(knots_[n - 1 - i] == 1.0, "knot vector: not p-open at 1");
  }
  // interior multiplicities <= p+1
  int run = 1;
  for (int i = degree_ + 1; i < n - degree_ - 1; ++i) {
    run = (knots_[i] == knots_[i - 1]) ? run + 1 : 1;
    IGABEM_REQUIRE(run <= degree_ + 1, "knot vector: interior multiplicity exceeds p+1");
  }
  breaks_.push_back(knots_.front());
  for (double k : knots_)
    if (k > breaks_.back()) breaks_.push_back(k);
}

KnotVector KnotVector::uniform_open(int degree, int num_elements, int interior_multiplicity) {
  IGABEM_REQUIRE(num_elements >= 1, "uniform knot vector: need at least one element");
  IGABEM_REQUIRE(interior_multiplicity >= 1 && interior_multiplicity <= degree + 1,
                 "uniform knot vector: invalid interior multiplicity");
  std::vector<double> k(degree + 1, 0.0);
  for (int i = 1; i < num_elements; ++i)
    for (int r = 0; r < interior_multiplicity; ++r)
      k.push_back(static_cast<double>(i) / num_elements);
  for (int i = 0; i <= degree; ++i) k.push_back(1.0);
  return KnotVector(degree, std::move(k));
}

int KnotVector::find_span(double x) const {
  if (x < 0.0 || x > 1.0) throw std::domain_error("knot vector: point outside [0,1]");
  const int n = dim();
  if (x >= 1.0) {
    int i = n - 1;
    while (knots_[i + 1] <= knots_[i]) --i;
    return i;
  }
  // binary search: largest i with knots[i] <= x
  int lo = degree_, hi = n;
  while (lo + 1 < hi) {
    const int mid = (lo + hi) / 2;
    if (knots_[mid] <= x)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

int KnotVector::find_element(double x) const {
  const int span = find_span(x);
  const double left = knots_[span];
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), left);
  return static_cast<int>(it - breaks_.begin()) - 1;
}

std::vector<double> KnotVector::greville() const {
  std::vector<double> g(dim());
  for (int j = 0; j < dim(); ++j) {
    if (degree_ == 0) {
      g[j] = 0.5 * (knots_[j] + knots_[j + 1]);
    } else {
      double s = 0.0;
      for (int r = 1; r <= degree_; ++r) s += knots_[j + r];
      g[j] = s / degree_;
    }
  }
  return g;
}

KnotVector KnotVector::derivative_knots() const {
  IGABEM_REQUIRE(degree_ >= 1, "derivative space requires degree >= 1");
  std::vector<double> k(knots_.begin() + 1, knots_.end() - 1);
  return KnotVector(degree_ - 1, std::move(k));
}

BasisValues eval_basis(const KnotVector& kv, double x) {
  const int p = kv.degree();
  const int span = kv.find_span(x);
  const auto& U = kv.knots();
  BasisValues out;
  out.first = span - p;
  out.values.resize(p + 1);
  out.values[0] = 1.0;
  Eigen::VectorXd left(p + 1), right(p + 1);
  for (int j = 1; j <= p; ++j) {
    left[j] = x - U[span + 1 - j];
    right[j] = U[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double tmp = out.values[r] / (right[r + 1] + left[j - r]);
      out.values[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    out.values[j] = saved;
  }
  return out;
}

BasisValues eval_basis_derivative(const KnotVector& kv, double x, int order) {
  IGABEM_REQUIRE(order >= 1, "derivative order must be positive");
  const int p = kv.degree();
  const int span = kv.find_span(x);
  BasisValues out;
  out.first = span - p;
  out.values = Eigen::VectorXd::Zero(p + 1);
  if (order > p) return out;  // polynomial degree exhausted

  const auto& U = kv.knots();
  // Piegl-Tiller style derivative computation via the inverted triangle.
  Eigen::MatrixXd ndu(p + 1, p + 1);
  Eigen::VectorXd left(p + 1), right(p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - U[span + 1 - j];
    right[j] = U[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[r + 1] + left[j - r];
      const double tmp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    ndu(j, j) = saved;
  }
  Eigen::MatrixXd a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a(0, 0) = 1.0;
    double d = 0.0;
    for (int k = 1; k <= order; ++k) {
      d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        d += a(s2, k) * ndu(r, pk);
      }
      std::swap(s1, s2);
    }
    out.values[r] = d;
  }
  double factor = p;
  for (int k = 1; k < order; ++k) factor *= (p - k);
  out.values *= factor;
  return out;
}

double eval_spline(const KnotVector& kv, const Eigen::VectorXd& coeffs, double x, int order) {
  IGABEM_REQUIRE(coeffs.size() == kv.dim(), "spline coefficient size mismatch");
  const BasisValues b = (order == 0) ? eval_basis(kv, x) : eval_basis_derivative(kv, x, order);
  double s = 0.0;
  for (int k = 0; k < b.values.size(); ++k) s += coeffs[b.first + k] * b.values[k];
  return s;
}

void bernstein_values(int degree, double t, Eigen::VectorXd& values) {
  values.resize(degree + 1);
  values[0] = 1.0;
  const double u = 1.0 - t;
  for (int j = 1; j <= degree; ++j) {
    double saved = 0.0;
    for (int k = 0; k < j; ++k) {
      const double tmp = values[k];
      values[k] = saved + u * tmp;
      saved = t * tmp;
    }
    values[j] = saved;
  }
}

void bernstein_derivatives(int degree, double t, Eigen::VectorXd& derivs) {
  derivs.resize(degree + 1);
  if (degree == 0) {
    derivs[0] = 0.0;
    return;
  }
  Eigen::VectorXd lower;
  bernstein_values(degree - 1, t, lower);
  for (int k = 0; k <= degree; ++k) {
    double d = 0.0;
    if (k >= 1) d += lower[k - 1];
    if (k <= degree - 1) d -= lower[k];
    derivs[k] = degree * d;
  }
}

BezierExtraction1D bezier_extract_1d(const KnotVector& kv, int target_degree) {
  const int p = kv.degree();
  const int P = (target_degree < 0) ? p : target_degree;
  IGABEM_REQUIRE(P >= p, "extraction target degree below spline degree");
  BezierExtraction1D ex;
  ex.source_degree = p;
  ex.target_degree = P;
  const auto& breaks = kv.breaks();
  const int ne = kv.num_elements();
  ex.first.resize(ne);
  ex.ops.resize(ne);

  // Interpolation points per element: Chebyshev points of the 2nd kind on [0,1].
  Eigen::VectorXd t(P + 1);
  for (int k = 0; k <= P; ++k) t[k] = 0.5 * (1.0 - std::cos(kPi * k / P));
  if (P == 0) t[0] = 0.5;

  Eigen::MatrixXd B(P + 1, P + 1);
  Eigen::VectorXd bv;
  for (int k = 0; k <= P; ++k) {
    bernstein_values(P, t[k], bv);
    B.row(k) = bv.transpose();
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);

  for (int e = 0; e < ne; ++e) {
    const double a = breaks[e], b = breaks[e + 1];
    Eigen::MatrixXd vals(P + 1, p + 1);
    int first = -1;
    for (int k = 0; k <= P; ++k) {
      double x = a + t[k] * (b - a);
      // keep evaluation inside the half-open element
      if (k == P && e + 1 < ne) x = std::nextafter(b, a);
      const BasisValues bx = eval_basis(kv, x);
      if (first < 0) first = bx.first;
      IGABEM_CHECK(bx.first == first, "active splines changed within an element");
      vals.row(k) = bx.values.transpose();
    }
    ex.first[e] = first;
    ex.ops[e] = lu.solve(vals);
  }
  return ex;
}

double eval_via_extraction(const KnotVector& kv, const BezierExtraction1D& ex,
                           const Eigen::VectorXd& coeffs, double x) {
  const int e = kv.find_element(x);
  const double a = kv.breaks()[e], b = kv.breaks()[e + 1];
  Eigen::VectorXd bv;
  bernstein_values(ex.target_degree, (x - a) / (b - a), bv);
  const Eigen::VectorXd local =
      coeffs.segment(ex.first[e], ex.source_degree + 1);
  return bv.dot(ex.ops[e] * local);
}

Eigen::VectorXd interpolate_1d(const KnotVector& kv, const Eigen::VectorXd& samples) {
  const int n = kv.dim();
  IGABEM_REQUIRE(samples.size() == n, "interpolation sample count must equal space dimension");
  const auto g = kv.greville();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const BasisValues b = eval_basis(kv, g[i]);
    for (int k = 0; k < b.values.size(); ++k) A(i, b.first + k) = b.values[k];
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const Eigen::VectorXd c = lu.solve(samples);
  IGABEM_CHECK((A * c - samples).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + samples.cwiseAbs().maxCoeff()),
               "Greville collocation system solved inaccurately");
  return c;
}

double TensorSplineSpace::eval(const Eigen::VectorXd& coeffs, double x, double y, int dx,
                               int dy) const {
  IGABEM_REQUIRE(coeffs.size() == dim(), "tensor spline coefficient size mismatch");
  const BasisValues bx = (dx == 0) ? eval_basis(kx_, x) : eval_basis_derivative(kx_, x, dx);
  const BasisValues by = (dy == 0) ? eval_basis(ky_, y) : eval_basis_derivative(ky_, y, dy);
  double s = 0.0;
  for (int i = 0; i < bx.values.size(); ++i)
    for (int j = 0; j < by.values.size(); ++j)
      s += coeffs[index(bx.first + i, by.first + j)] * bx.values[i] * by.values[j];
  return s;
}

}  // namespace igabem
