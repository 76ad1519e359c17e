#ifndef IGABEM_QUADRATURE_HPP_
#define IGABEM_QUADRATURE_HPP_

#include <vector>

#include "igabem/geometry.hpp"

namespace igabem {

struct QuadratureRule1D {
  Eigen::VectorXd points;   // in [0,1]
  Eigen::VectorXd weights;  // sum to 1
};

/// Gauss-Legendre rule with n points on [0,1]; exact through degree 2n-1.
QuadratureRule1D gauss_legendre(int n);

struct QuadratureRule2D {
  std::vector<Vec2> points;
  Eigen::VectorXd weights;
};

/// Tensor Gauss rule with n points per direction on the unit square.
QuadratureRule2D gauss_square(int n);

enum class Adjacency { kIdentical, kCommonEdge, kCommonVertex, kSeparated };

/// One node of a regularized rule on the product of two reference squares.
struct PairPoint {
  Vec2 s;  // first element
  Vec2 t;  // second element
  double weight;
};

/// Quadrature on the product square for one adjacency class, n Gauss points
/// per coordinate. The three singular classes assume the canonical
/// configuration: shared edge at {y=0} traversed in the same direction, resp.
/// shared vertex at the parameter origin of both elements.
struct PairQuadratureRule {
  Adjacency adjacency = Adjacency::kSeparated;
  std::vector<PairPoint> points;
};

const PairQuadratureRule& pair_rule(Adjacency adjacency, int n);

/// Adjacency of two equal-level elements, cross-patch contacts included.
Adjacency classify_adjacency(const ElementIndex& a, const ElementIndex& b,
                             const MultipatchGeometry& geometry);

/// Affine symmetry of the unit square (dihedral group element).
struct SquareMap {
  Eigen::Matrix2d linear = Eigen::Matrix2d::Identity();
  Vec2 shift = Vec2::Zero();
  Vec2 operator()(const Vec2& s) const { return shift + linear * s; }
};

/// The dihedral element mapping the Morton corners 0 -> c0 and 1 -> c1
/// (c0, c1 must be adjacent corners of the square).
SquareMap square_map_for_corners(int c0, int c1);
/// The rotation mapping Morton corner 0 to corner c.
SquareMap rotation_to_corner(int c);

/// Parameter transforms placing a singular element pair into the canonical
/// configuration expected by pair_rule.
struct PairNormalization {
  SquareMap map_a;
  SquareMap map_b;
};

PairNormalization normalize_pair(const ElementIndex& a, const ElementIndex& b,
                                 Adjacency adjacency, const MultipatchGeometry& geometry);

}  // namespace igabem

#endif  // IGABEM_QUADRATURE_HPP_
