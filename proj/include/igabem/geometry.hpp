#ifndef IGABEM_GEOMETRY_HPP_
#define IGABEM_GEOMETRY_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "igabem/bspline.hpp"
#include "igabem/common.hpp"

namespace igabem {

/// Position, tangents and surface measure of a patch map at one parameter point.
struct PatchSample {
  Vec3 position;
  Mat32 jacobian;           // columns d1ated F, d2 F
  double surface_measure;   // || d1F x d2F ||
  Vec3 normal;              // d1F x d2F (not normalized)
};

/// Tensor-product NURBS patch F: [0,1]^2 -> R^3 with positive weights.
/// Evaluation runs through per-element homogeneous Bernstein tensors.
class NurbsPatch {
 public:
  NurbsPatch(TensorSplineSpace space, std::vector<Vec3> control_points,
             std::vector<double> weights);

  const TensorSplineSpace& space() const { return space_; }
  const std::vector<Vec3>& control_points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }

  PatchSample eval(const Vec2& s) const;
  Vec3 position(const Vec2& s) const { return eval(s).position; }

  /// Largest control-net coordinate magnitude, used for tolerance scaling.
  double scale() const { return scale_; }

 private:
  TensorSplineSpace space_;
  std::vector<Vec3> points_;
  std::vector<double> weights_;
  double scale_;
  // per control-space element: (Px+1)*(Py+1) x 4 homogeneous Bernstein coefficients
  int nex_ = 0, ney_ = 0;
  std::vector<Eigen::MatrixXd> element_coeffs_;
};

/// Patch edges in parameter space: 0: v=0, 1: u=1, 2: v=1, 3: u=0.
/// edge_point(e, t) walks the edge with increasing u resp. v.
Vec2 edge_point(int edge, double t);

struct Interface {
  int patch_a = 0;
  int edge_a = 0;
  int patch_b = 0;
  int edge_b = 0;
  bool reversed = false;  // true if the edge parameters run against each other
};

/// Quadtree element/cluster address (patch, level, Morton position).
struct ElementIndex {
  int patch = 0;
  int level = 0;
  int position = 0;

  ElementIndex child(int c) const { return {patch, level + 1, 4 * position + c}; }
  ElementIndex parent() const { return {patch, level - 1, position / 4}; }
};

/// Affine map of the unit square onto the dyadic subsquare addressed by
/// lambda: A(s) = offset + scale * s with scale = 2^-level.
struct AffineCellMap {
  Vec2 offset;
  double scale = 1.0;
  Vec2 operator()(const Vec2& s) const { return offset + scale * s; }
};

AffineCellMap element_map(const ElementIndex& lambda);

class MultipatchGeometry {
 public:
  explicit MultipatchGeometry(std::vector<NurbsPatch> patches);

  int num_patches() const { return static_cast<int>(patches_.size()); }
  const NurbsPatch& patch(int i) const { return patches_.at(i); }
  const std::vector<Interface>& interfaces() const { return interfaces_; }
  bool closed() const { return closed_; }
  double scale() const { return scale_; }

  /// Evaluate the element map F_lambda = F_patch(A_lambda(.)) at s in the unit
  /// square; jacobian columns carry the 2^-level factor of A_lambda.
  PatchSample eval(const ElementIndex& lambda, const Vec2& s) const;

  /// Physical corners of the element (s in {0,1}^2 in Morton corner order).
  std::array<Vec3, 4> element_corners(const ElementIndex& lambda) const;

 private:
  std::vector<NurbsPatch> patches_;
  std::vector<Interface> interfaces_;
  bool closed_ = false;
  double scale_ = 1.0;

  void detect_interfaces();
  void verify_regularity() const;
  void verify_orientation() const;
};

MultipatchGeometry load_geometry(const std::string& path);
MultipatchGeometry read_geometry(std::istream& in);
void write_geometry(const MultipatchGeometry& geometry, const std::string& path);

/// Exact rational unit sphere out of six biquartic patches (cube topology),
/// oriented with outward normals.
MultipatchGeometry unit_sphere();

/// Single flat patch spanned by origin and two edge vectors (bilinear, weight 1).
NurbsPatch flat_patch(const Vec3& origin, const Vec3& span_u, const Vec3& span_v);

}  // namespace igabem

#endif  // IGABEM_GEOMETRY_HPP_
