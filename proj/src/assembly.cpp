#include "igabem/assembly.hpp"

#include <cmath>

namespace igabem {

Complex helmholtz_kernel(double kappa, const Vec3& x, const Vec3& y) {
  const double r = (x - y).norm();
  if (r < 1e-300) throw std::domain_error("Helmholtz kernel evaluated at coincident points");
  return std::polar(1.0 / (4.0 * kPi * r), kappa * r);
}

CVec3 helmholtz_kernel_gradient(double kappa, const Vec3& x, const Vec3& y) {
  const Vec3 d = x - y;
  const double r = d.norm();
  if (r < 1e-300) throw std::domain_error("Helmholtz kernel evaluated at coincident points");
  const Complex factor =
      std::polar(1.0 / (4.0 * kPi * r * r * r), kappa * r) * Complex(-1.0, kappa * r);
  return factor * d;
}

Complex localized_kernel(double kappa, const MultipatchGeometry& geometry, const ElementIndex& a,
                         const ElementIndex& b, const Vec2& s, const Vec2& t) {
  return helmholtz_kernel(kappa, geometry.eval(a, s).position, geometry.eval(b, t).position);
}

namespace {

struct PointData {
  Vec3 position;
  Vec3 du, dv;
  Eigen::VectorXd b;    // tensor Bernstein values, size (p+1)^2
  Eigen::VectorXd b_du; // d/ds1
  Eigen::VectorXd b_dv; // d/ds2
};

void sample_point(const MultipatchGeometry& geometry, int degree, const ElementIndex& lambda,
                  const Vec2& s, PointData& out) {
  const PatchSample geo = geometry.eval(lambda, s);
  out.position = geo.position;
  out.du = geo.jacobian.col(0);
  out.dv = geo.jacobian.col(1);
  Eigen::VectorXd bx, by, dbx, dby;
  bernstein_values(degree, s[0], bx);
  bernstein_values(degree, s[1], by);
  bernstein_derivatives(degree, s[0], dbx);
  bernstein_derivatives(degree, s[1], dby);
  const int n = degree + 1;
  out.b.resize(n * n);
  out.b_du.resize(n * n);
  out.b_dv.resize(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      out.b[i * n + j] = bx[i] * by[j];
      out.b_du[i * n + j] = dbx[i] * by[j];
      out.b_dv[i * n + j] = bx[i] * dby[j];
    }
}

}  // namespace

DenseBlock assemble_near_block(const WaveContext& wave, const MultipatchGeometry& geometry,
                               int degree, const ElementIndex& a, const ElementIndex& b,
                               const AssemblyOptions& options) {
  IGABEM_REQUIRE(a.level == b.level, "near-field blocks pair equal-level elements");
  const Adjacency adjacency = classify_adjacency(a, b, geometry);
  const int n = (adjacency == Adjacency::kSeparated) ? options.resolve_separated(degree)
                                                     : options.resolve_singular(degree);
  const PairQuadratureRule& rule = pair_rule(adjacency, n);
  const PairNormalization norm = normalize_pair(a, b, adjacency, geometry);

  const int loc = (degree + 1) * (degree + 1);
  DenseBlock block;
  for (int alpha = 0; alpha < 2; ++alpha)
    for (int beta = 0; beta < 2; ++beta) block.comp[alpha][beta] = MatrixXcd::Zero(loc, loc);

  const double inv_kappa2 = 1.0 / (wave.kappa * wave.kappa);
  PointData pa, pb;
  MatrixXcd outer(loc, loc);
  for (const PairPoint& pt : rule.points) {
    sample_point(geometry, degree, a, norm.map_a(pt.s), pa);
    sample_point(geometry, degree, b, norm.map_b(pt.t), pb);
    const Complex g =
        pt.weight * (options.kernel_override
                         ? options.kernel_override(pa.position, pb.position)
                         : helmholtz_kernel(wave.kappa, pa.position, pb.position));
    outer.noalias() = pa.b * pb.b.transpose();
    const Eigen::VectorXd* da[2] = {&pa.b_du, &pa.b_dv};
    const Eigen::VectorXd* db[2] = {&pb.b_du, &pb.b_dv};
    const Vec3* ja[2] = {&pa.du, &pa.dv};
    const Vec3* jb[2] = {&pb.du, &pb.dv};
    for (int alpha = 0; alpha < 2; ++alpha)
      for (int beta = 0; beta < 2; ++beta) {
        const double metric = ja[alpha]->dot(*jb[beta]);
        block.comp[alpha][beta].noalias() += (g * metric) * outer;
        block.comp[alpha][beta].noalias() -=
            (g * inv_kappa2) * (da[alpha]->cast<Complex>() * db[beta]->transpose().cast<Complex>());
      }
  }
  return block;
}

MatrixXcd assemble_dense(const WaveContext& wave, const DivConformingSpace& space,
                         const AssemblyOptions& options) {
  const SuperSpaceLayout& layout = space.superspace();
  IGABEM_REQUIRE(layout.dim() <= 20000, "dense assembly capped at desk scale");
  const MultipatchGeometry& geometry = space.geometry();
  const int loc = layout.local_dim();

  std::vector<ElementIndex> leaves;
  for (int ip = 0; ip < layout.num_patches; ++ip)
    for (int k = 0; k < layout.elems_per_patch(); ++k)
      leaves.push_back({ip, layout.level, k});

  MatrixXcd V = MatrixXcd::Zero(layout.dim(), layout.dim());
  const auto scatter = [&](const ElementIndex& ea, const ElementIndex& eb,
                           const DenseBlock& block) {
    for (int alpha = 0; alpha < 2; ++alpha)
      for (int beta = 0; beta < 2; ++beta) {
        const int row0 = layout.index(alpha, ea.patch, ea.position, 0);
        const int col0 = layout.index(beta, eb.patch, eb.position, 0);
        V.block(row0, col0, loc, loc) = block.comp[alpha][beta];
      }
  };

  for (size_t ia = 0; ia < leaves.size(); ++ia)
    for (size_t ib = ia; ib < leaves.size(); ++ib) {
      const DenseBlock block =
          assemble_near_block(wave, geometry, layout.degree, leaves[ia], leaves[ib], options);
      scatter(leaves[ia], leaves[ib], block);
      if (ib != ia) {
        // kernel symmetry: the reversed block is the transpose with swapped
        // component indices
        DenseBlock mirrored;
        for (int alpha = 0; alpha < 2; ++alpha)
          for (int beta = 0; beta < 2; ++beta)
            mirrored.comp[alpha][beta] = block.comp[beta][alpha].transpose();
        scatter(leaves[ib], leaves[ia], mirrored);
      }
    }
  return V;
}

}  // namespace igabem
