#ifndef IGABEM_SPACES_HPP_
#define IGABEM_SPACES_HPP_

#include "igabem/geometry.hpp"
#include "igabem/quadrature.hpp"

namespace igabem {

/// Index layout of the elementwise-discontinuous two-component superspace.
/// Coefficients refer to tensor Bernstein shape functions on each element,
/// pulled back through the element map (not the patch map): a coefficient
/// vector u represents the surface field
///   f|_elem = tau_elem^-1 dF_elem (u-polynomial on the element square).
struct SuperSpaceLayout {
  int degree = 1;
  int level = 0;
  int num_patches = 0;

  int local_dim() const { return (degree + 1) * (degree + 1); }
  int elems_per_patch() const { return 1 << (2 * level); }
  int scalar_dim() const { return num_patches * elems_per_patch() * local_dim(); }
  int dim() const { return 2 * scalar_dim(); }

  int index(int comp, int patch, int elem, int loc) const {
    return ((comp * num_patches + patch) * elems_per_patch() + elem) * local_dim() + loc;
  }
  int index(int comp, int patch, int elem, int lx, int ly) const {
    return index(comp, patch, elem, lx * (degree + 1) + ly);
  }
};

/// Globally div-conforming B-spline space on a multipatch surface, stored as
/// the sparse transformation T into the discontinuous superspace
/// (patch-local basis change composed with the inter-patch continuity glue).
class DivConformingSpace {
 public:
  DivConformingSpace(const MultipatchGeometry& geometry, int degree, int level);

  const MultipatchGeometry& geometry() const { return *geometry_; }
  int degree() const { return p_; }
  int level() const { return m_; }
  const SuperSpaceLayout& superspace() const { return super_; }

  /// Complex dimension of the glued space.
  int dim() const { return dim_; }
  /// Real-scalar count (2x complex), the convention of the result tables.
  int dim_real() const { return 2 * dim_; }

  /// Superspace coefficients of the global basis: (superspace dim) x dim().
  const SparseMatrixD& transform() const { return transform_; }
  /// Patch-local basis change for one component (identical on every patch).
  const SparseMatrixD& patchlocal_transform(int component) const {
    return patchlocal_[component];
  }
  /// Continuity glue: (unglued patchwise spline dim) x dim(), entries +-1.
  const SparseMatrixD& continuity_glue() const { return glue_; }

  /// Component spline spaces on a patch (component 0: S^p x S^{p-1}).
  const TensorSplineSpace& component_space(int component) const {
    return component_space_[component];
  }
  /// Offset of (patch, component) in the unglued coefficient vector.
  int unglued_offset(int patch, int component) const;
  int unglued_dim() const { return unglued_dim_; }

  struct FieldSample {
    CVec3 field = CVec3::Zero();
    Complex divergence = 0.0;
  };

  /// Field and surface divergence from superspace coefficients at a point of
  /// the level-m element lambda (local coordinates s in the unit square).
  FieldSample eval_superspace(const VectorXcd& super_coeffs, const ElementIndex& lambda,
                              const Vec2& s) const;

  /// Same through the global space: expands coeffs with T on the fly.
  FieldSample eval(const VectorXcd& coeffs, const ElementIndex& lambda, const Vec2& s) const;

  /// Reference evaluation through the patchwise spline spaces and the
  /// patch-map pullback; exercises an independent evaluation path.
  FieldSample eval_direct(const VectorXcd& coeffs, int patch, const Vec2& s_patch) const;

  /// Export T as triplet text (row col value per line) for debugging.
  void write_transform_triplets(const std::string& path) const;

 private:
  const MultipatchGeometry* geometry_;
  int p_, m_;
  SuperSpaceLayout super_;
  std::vector<TensorSplineSpace> component_space_;
  SparseMatrixD patchlocal_[2];
  SparseMatrixD glue_;
  SparseMatrixD transform_;
  int unglued_dim_ = 0;
  int dim_ = 0;

  void build_patchlocal();
  void build_glue();
};

}  // namespace igabem

#endif  // IGABEM_SPACES_HPP_
