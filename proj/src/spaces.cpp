#include "igabem/spaces.hpp"

#include <fstream>
#include <numeric>

namespace igabem {

namespace {

int morton_encode(int ex, int ey, int level) {
  int k = 0;
  for (int b = 0; b < level; ++b) {
    k |= ((ex >> b) & 1) << (2 * b);
    k |= ((ey >> b) & 1) << (2 * b + 1);
  }
  return k;
}

// Union-find with a relative sign on each link.
class SignedUnionFind {
 public:
  explicit SignedUnionFind(int n) : parent_(n), sign_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  std::pair<int, int> find(int i) {
    if (parent_[i] == i) return {i, 1};
    auto [root, s] = find(parent_[i]);
    parent_[i] = root;
    sign_[i] *= s;
    return {root, sign_[i]};
  }

  void unite(int a, int b, int rel_sign) {
    auto [ra, sa] = find(a);
    auto [rb, sb] = find(b);
    if (ra == rb) {
      IGABEM_CHECK(sa * sb == rel_sign, "inconsistent interface sign cycle");
      return;
    }
    // smaller index keeps its sign and becomes the root
    if (ra > rb) {
      std::swap(ra, rb);
      std::swap(sa, sb);
      rel_sign = rel_sign;  // relation is symmetric for +-1 links
    }
    parent_[rb] = ra;
    sign_[rb] = sa * sb * rel_sign;
  }

  int size() const { return static_cast<int>(parent_.size()); }

 private:
  std::vector<int> parent_;
  std::vector<int> sign_;
};

// Outward-conormal sign of the normal trace on each parameter edge.
int edge_normal_sign(int edge) { return (edge == 1 || edge == 2) ? 1 : -1; }

}  // namespace

DivConformingSpace::DivConformingSpace(const MultipatchGeometry& geometry, int degree, int level)
    : geometry_(&geometry), p_(degree), m_(level) {
  IGABEM_REQUIRE(p_ >= 1, "div-conforming space requires degree >= 1");
  IGABEM_REQUIRE(m_ >= 0, "refinement level must be non-negative");
  super_ = SuperSpaceLayout{p_, m_, geometry.num_patches()};

  const int ne = 1 << m_;
  component_space_.reserve(2);
  component_space_.emplace_back(KnotVector::uniform_open(p_, ne),
                                KnotVector::uniform_open(p_ - 1, ne));
  component_space_.emplace_back(KnotVector::uniform_open(p_ - 1, ne),
                                KnotVector::uniform_open(p_, ne));
  unglued_dim_ = geometry.num_patches() * (component_space_[0].dim() + component_space_[1].dim());

  build_patchlocal();
  build_glue();
  transform_ = [&] {
    // assemble block-diagonal patch-local map, then apply the glue
    const int N = geometry.num_patches();
    SparseMatrixD pl(super_.dim(), unglued_dim_);
    std::vector<Eigen::Triplet<double>> trip;
    for (int comp = 0; comp < 2; ++comp)
      for (int ip = 0; ip < N; ++ip) {
        const int row0 = super_.index(comp, ip, 0, 0);
        const int col0 = unglued_offset(ip, comp);
        for (int k = 0; k < patchlocal_[comp].outerSize(); ++k)
          for (SparseMatrixD::InnerIterator it(patchlocal_[comp], k); it; ++it)
            trip.emplace_back(row0 + static_cast<int>(it.row()), col0 + static_cast<int>(it.col()),
                              it.value());
      }
    pl.setFromTriplets(trip.begin(), trip.end());
    return SparseMatrixD((pl * glue_).pruned());
  }();
}

int DivConformingSpace::unglued_offset(int patch, int component) const {
  const int per_patch = component_space_[0].dim() + component_space_[1].dim();
  return patch * per_patch + (component == 0 ? 0 : component_space_[0].dim());
}

void DivConformingSpace::build_patchlocal() {
  // Tensorized 1-D extraction, black box: each factor interpolates the spline
  // basis in the local Bernstein basis of degree p on every element. The
  // 2^-m factor converts patch-level pullbacks to element-level ones.
  const double scale = std::ldexp(1.0, -m_);
  for (int comp = 0; comp < 2; ++comp) {
    const KnotVector& kx = component_space_[comp].knots_x();
    const KnotVector& ky = component_space_[comp].knots_y();
    const BezierExtraction1D ex = bezier_extract_1d(kx, p_);
    const BezierExtraction1D ey = bezier_extract_1d(ky, p_);
    std::vector<Eigen::Triplet<double>> trip;
    for (int e1 = 0; e1 < kx.num_elements(); ++e1)
      for (int e2 = 0; e2 < ky.num_elements(); ++e2) {
        const int elem = morton_encode(e1, e2, m_);
        for (int lx = 0; lx <= p_; ++lx)
          for (int ly = 0; ly <= p_; ++ly)
            for (int i = 0; i <= kx.degree(); ++i)
              for (int j = 0; j <= ky.degree(); ++j) {
                const double v = ex.ops[e1](lx, i) * ey.ops[e2](ly, j);
                if (v == 0.0) continue;
                const int row = (elem * super_.local_dim()) + lx * (p_ + 1) + ly;
                const int col = component_space_[comp].index(ex.first[e1] + i, ey.first[e2] + j);
                trip.emplace_back(row, col, scale * v);
              }
      }
    SparseMatrixD block(super_.elems_per_patch() * super_.local_dim(),
                        component_space_[comp].dim());
    block.setFromTriplets(trip.begin(), trip.end());
    patchlocal_[comp] = block.pruned(1.0, 1e-14);
  }
}

void DivConformingSpace::build_glue() {
  const int N = geometry_->num_patches();
  SignedUnionFind uf(unglued_dim_);

  // normal-trace coefficient of an edge at trace index j, as unglued index
  const auto edge_dof = [&](int patch, int edge, int j) {
    const int comp = (edge == 0 || edge == 2) ? 1 : 0;
    const TensorSplineSpace& sp = component_space_[comp];
    const int kx = sp.knots_x().dim(), ky = sp.knots_y().dim();
    int ix = 0, iy = 0;
    switch (edge) {
      case 0: ix = j; iy = 0; break;
      case 2: ix = j; iy = ky - 1; break;
      case 3: ix = 0; iy = j; break;
      case 1: ix = kx - 1; iy = j; break;
    }
    return unglued_offset(patch, comp) + sp.index(ix, iy);
  };

  const int trace_dim = (1 << m_) + p_ - 1;
  for (const Interface& itf : geometry_->interfaces()) {
    const int sign = -edge_normal_sign(itf.edge_a) * edge_normal_sign(itf.edge_b);
    for (int j = 0; j < trace_dim; ++j) {
      const int jb = itf.reversed ? trace_dim - 1 - j : j;
      uf.unite(edge_dof(itf.patch_a, itf.edge_a, j), edge_dof(itf.patch_b, itf.edge_b, jb), sign);
    }
  }

  // global numbering: roots in ascending unglued order
  std::vector<int> dof_of_root(unglued_dim_, -1);
  dim_ = 0;
  for (int i = 0; i < unglued_dim_; ++i)
    if (uf.find(i).first == i) dof_of_root[i] = dim_++;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(unglued_dim_);
  for (int i = 0; i < unglued_dim_; ++i) {
    const auto [root, sign] = uf.find(i);
    trip.emplace_back(i, dof_of_root[root], static_cast<double>(sign));
  }
  glue_.resize(unglued_dim_, dim_);
  glue_.setFromTriplets(trip.begin(), trip.end());
  (void)N;
}

DivConformingSpace::FieldSample DivConformingSpace::eval_superspace(
    const VectorXcd& super_coeffs, const ElementIndex& lambda, const Vec2& s) const {
  IGABEM_REQUIRE(super_coeffs.size() == super_.dim(), "superspace coefficient size mismatch");
  IGABEM_REQUIRE(lambda.level == m_, "evaluation expects leaf-level elements");
  Eigen::VectorXd bx, by, dbx, dby;
  bernstein_values(p_, s[0], bx);
  bernstein_values(p_, s[1], by);
  bernstein_derivatives(p_, s[0], dbx);
  bernstein_derivatives(p_, s[1], dby);

  Eigen::Vector2cd g = Eigen::Vector2cd::Zero();
  Complex div = 0.0;
  for (int lx = 0; lx <= p_; ++lx)
    for (int ly = 0; ly <= p_; ++ly) {
      const Complex c0 = super_coeffs[super_.index(0, lambda.patch, lambda.position, lx, ly)];
      const Complex c1 = super_coeffs[super_.index(1, lambda.patch, lambda.position, lx, ly)];
      g[0] += c0 * bx[lx] * by[ly];
      g[1] += c1 * bx[lx] * by[ly];
      div += c0 * dbx[lx] * by[ly] + c1 * bx[lx] * dby[ly];
    }

  const PatchSample geo = geometry_->eval(lambda, s);
  FieldSample out;
  out.field = (geo.jacobian * g) / geo.surface_measure;
  out.divergence = div / geo.surface_measure;
  return out;
}

DivConformingSpace::FieldSample DivConformingSpace::eval(const VectorXcd& coeffs,
                                                         const ElementIndex& lambda,
                                                         const Vec2& s) const {
  IGABEM_REQUIRE(coeffs.size() == dim_, "coefficient size mismatch");
  const VectorXcd super = transform_ * coeffs;
  return eval_superspace(super, lambda, s);
}

DivConformingSpace::FieldSample DivConformingSpace::eval_direct(const VectorXcd& coeffs,
                                                                int patch,
                                                                const Vec2& s_patch) const {
  IGABEM_REQUIRE(coeffs.size() == dim_, "coefficient size mismatch");
  const VectorXcd unglued = glue_ * coeffs;
  FieldSample out;
  Eigen::Vector2cd g;
  Complex div = 0.0;
  for (int comp = 0; comp < 2; ++comp) {
    const TensorSplineSpace& sp = component_space_[comp];
    Eigen::VectorXd re(sp.dim()), im(sp.dim());
    const int off = unglued_offset(patch, comp);
    for (int i = 0; i < sp.dim(); ++i) {
      re[i] = unglued[off + i].real();
      im[i] = unglued[off + i].imag();
    }
    g[comp] = Complex(sp.eval(re, s_patch[0], s_patch[1]), sp.eval(im, s_patch[0], s_patch[1]));
    const int dx = comp == 0 ? 1 : 0, dy = comp == 0 ? 0 : 1;
    div += Complex(sp.eval(re, s_patch[0], s_patch[1], dx, dy),
                   sp.eval(im, s_patch[0], s_patch[1], dx, dy));
  }
  const PatchSample geo = geometry_->patch(patch).eval(s_patch);
  out.field = (geo.jacobian * g) / geo.surface_measure;
  out.divergence = div / geo.surface_measure;
  return out;
}

void DivConformingSpace::write_transform_triplets(const std::string& path) const {
  std::ofstream out(path);
  IGABEM_REQUIRE(static_cast<bool>(out), "cannot open transform output file");
  out.precision(17);
  for (int k = 0; k < transform_.outerSize(); ++k)
    for (SparseMatrixD::InnerIterator it(transform_, k); it; ++it)
      out << it.row() << " " << it.col() << " " << it.value() << "\n";
}

}  // namespace igabem
