#ifndef IGABEM_BSPLINE_HPP_
#define IGABEM_BSPLINE_HPP_

#include <vector>

#include "igabem/common.hpp"

namespace igabem {

/// Open (clamped) knot vector on [0,1] with the B-spline basis defined by the
/// Cox-de Boor recursion. Basis functions live on half-open knot spans; the
/// right endpoint x = 1 is treated as belonging to the last nonempty span.
class KnotVector {
 public:
  KnotVector(int degree, std::vector<double> knots);

  /// Equidistant interior knots, 2^0..n elements, interior multiplicity mult.
  static KnotVector uniform_open(int degree, int num_elements, int interior_multiplicity = 1);

  int degree() const { return degree_; }
  int dim() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
  int num_elements() const { return static_cast<int>(breaks_.size()) - 1; }
  const std::vector<double>& knots() const { return knots_; }
  /// Unique knot values (element boundaries).
  const std::vector<double>& breaks() const { return breaks_; }

  /// Span index i with knots[i] <= x < knots[i+1] (closed at the right end).
  int find_span(double x) const;
  /// Element index (0-based among nonzero spans) containing x.
  int find_element(double x) const;

  /// Greville abscissae (means of p consecutive knots), one per basis function.
  std::vector<double> greville() const;

  /// Knot vector of the derivative space: first and last knot dropped, degree-1.
  KnotVector derivative_knots() const;

 private:
  int degree_;
  std::vector<double> knots_;
  std::vector<double> breaks_;
};

/// Nonzero basis values at x: values[k] = b_{first+k}(x), k = 0..p.
struct BasisValues {
  int first = 0;
  Eigen::VectorXd values;
};

BasisValues eval_basis(const KnotVector& kv, double x);

/// order-th derivative of the nonzero basis functions; all zeros if order > p.
BasisValues eval_basis_derivative(const KnotVector& kv, double x, int order);

/// Evaluate a spline with given coefficients (and optional derivative order).
double eval_spline(const KnotVector& kv, const Eigen::VectorXd& coeffs, double x, int order = 0);

/// Bernstein basis of degree p on [0,1]; values resized to p+1.
void bernstein_values(int degree, double t, Eigen::VectorXd& values);
void bernstein_derivatives(int degree, double t, Eigen::VectorXd& derivs);

/// Per-element change of basis from the spline space to local Bernstein
/// polynomials of degree target_degree (>= spline degree; default equal).
/// On element e with breakpoints [a,b] and active splines j = first[e]..first[e]+p:
///   b_j(x) = sum_k op[e](k, j - first[e]) * B_k((x-a)/(b-a)).
struct BezierExtraction1D {
  int source_degree = 0;
  int target_degree = 0;
  std::vector<int> first;            // first active spline index per element
  std::vector<Eigen::MatrixXd> ops;  // (target+1) x (source+1)
};

BezierExtraction1D bezier_extract_1d(const KnotVector& kv, int target_degree = -1);

/// Evaluate a spline through its extraction operator (used by fast paths).
double eval_via_extraction(const KnotVector& kv, const BezierExtraction1D& ex,
                           const Eigen::VectorXd& coeffs, double x);

/// Spline interpolation at the Greville abscissae; samples.size() == dim.
Eigen::VectorXd interpolate_1d(const KnotVector& kv, const Eigen::VectorXd& samples);

/// Tensor-product spline space on the unit square.
class TensorSplineSpace {
 public:
  TensorSplineSpace(KnotVector kx, KnotVector ky) : kx_(std::move(kx)), ky_(std::move(ky)) {}

  const KnotVector& knots_x() const { return kx_; }
  const KnotVector& knots_y() const { return ky_; }
  int dim() const { return kx_.dim() * ky_.dim(); }
  int num_elements() const { return kx_.num_elements() * ky_.num_elements(); }

  /// Flattened index, x-major: (ix, iy) -> ix * dim_y + iy.
  int index(int ix, int iy) const { return ix * ky_.dim() + iy; }

  /// Value of the tensor spline with given coefficients at (x, y),
  /// differentiated dx times in x and dy times in y.
  double eval(const Eigen::VectorXd& coeffs, double x, double y, int dx = 0, int dy = 0) const;

 private:
  KnotVector kx_, ky_;
};

}  // namespace igabem

#endif  // IGABEM_BSPLINE_HPP_
