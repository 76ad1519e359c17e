#include "igabem/h2.hpp"

#include <cmath>
#include <sstream>

namespace igabem {

namespace {
constexpr int kBoundSamples = 17;  // bounding-sphere sample grid per direction

double lagrange(const Eigen::VectorXd& nodes, int m, double x) {
  double v = 1.0;
  for (int k = 0; k < nodes.size(); ++k) {
    if (k == m) continue;
    v *= (x - nodes[k]) / (nodes[m] - nodes[k]);
  }
  return v;
}
}  // namespace

ClusterTree::ClusterTree(const MultipatchGeometry& geometry, int leaf_level)
    : leaf_level_(leaf_level), num_patches_(geometry.num_patches()) {
  IGABEM_REQUIRE(leaf_level >= 0, "cluster tree depth must be non-negative");
  level_offset_.resize(leaf_level_ + 2, 0);
  for (int j = 0; j <= leaf_level_; ++j)
    level_offset_[j + 1] = level_offset_[j] + clusters_at(j);
  const int total = level_offset_[leaf_level_ + 1];
  center_.resize(total);
  radius_.resize(total);

  for (int j = 0; j <= leaf_level_; ++j) {
    const int per_patch = 1 << (2 * j);
    for (int ip = 0; ip < num_patches_; ++ip)
      for (int k = 0; k < per_patch; ++k) {
        const ElementIndex lambda{ip, j, k};
        Vec3 lo = Vec3::Constant(1e300), hi = -lo;
        std::vector<Vec3> pts;
        pts.reserve(kBoundSamples * kBoundSamples);
        for (int a = 0; a < kBoundSamples; ++a)
          for (int b = 0; b < kBoundSamples; ++b) {
            const Vec2 s(a / (kBoundSamples - 1.0), b / (kBoundSamples - 1.0));
            const Vec3 x = geometry.eval(lambda, s).position;
            pts.push_back(x);
            lo = lo.cwiseMin(x);
            hi = hi.cwiseMax(x);
          }
        const int c = id(lambda);
        center_[c] = 0.5 * (lo + hi);
        double r = 0.0;
        for (const Vec3& x : pts) r = std::max(r, (x - center_[c]).norm());
        radius_[c] = r * (1.0 + 1e-12);
      }
  }
}

ElementIndex ClusterTree::element(int cluster) const {
  int level = 0;
  while (cluster >= level_offset_[level + 1]) ++level;
  const int rel = cluster - level_offset_[level];
  const int per_patch = 1 << (2 * level);
  return {rel / per_patch, level, rel % per_patch};
}

bool admissible(const ClusterTree& tree, int a, int b, double eta) {
  return std::max(tree.diam(a), tree.diam(b)) <= eta * tree.dist(a, b);
}

BlockClusterTree::BlockClusterTree(const ClusterTree& tree, double eta) : eta_(eta) {
  IGABEM_REQUIRE(eta > 0.0, "admissibility parameter must be positive");
  far_.resize(tree.leaf_level() + 1);
  std::vector<Pair> stack;
  const int np = tree.num_patches();
  for (int i = 0; i < np; ++i)
    for (int j = i; j < np; ++j)
      stack.push_back({tree.id({i, 0, 0}), tree.id({j, 0, 0})});

  while (!stack.empty()) {
    const Pair pair = stack.back();
    stack.pop_back();
    const ElementIndex ea = tree.element(pair.a);
    if (admissible(tree, pair.a, pair.b, eta_)) {
      far_[ea.level].push_back(pair);
    } else if (ea.level == tree.leaf_level()) {
      near_.push_back(pair);
    } else {
      const ElementIndex eb = tree.element(pair.b);
      for (int ca = 0; ca < 4; ++ca) {
        const int ia = tree.id(ea.child(ca));
        for (int cb = (pair.a == pair.b ? ca : 0); cb < 4; ++cb) {
          const int ib = tree.id(eb.child(cb));
          stack.push_back({std::min(ia, ib), std::max(ia, ib)});
        }
      }
    }
  }
}

long BlockClusterTree::ordered_far_count() const {
  long n = 0;
  for (const auto& lvl : far_)
    for (const auto& p : lvl) n += (p.a == p.b) ? 1 : 2;
  return n;
}

long BlockClusterTree::ordered_near_count() const {
  long n = 0;
  for (const auto& p : near_) n += (p.a == p.b) ? 1 : 2;
  return n;
}

int choose_q(double sigma, int m, double c, int q0) {
  IGABEM_REQUIRE(sigma >= 0.0 && m >= 0, "choose_q expects non-negative arguments");
  return std::max(q0, static_cast<int>(std::ceil(c * (sigma + 1.0) * m)));
}

InterpolationData make_interpolation(int q, int degree) {
  IGABEM_REQUIRE(q >= 0, "interpolation degree must be non-negative");
  InterpolationData data;
  data.q = q;
  data.nodes.resize(q + 1);
  if (q == 0)
    data.nodes[0] = 0.5;
  else
    for (int k = 0; k <= q; ++k) data.nodes[k] = 0.5 * (1.0 - std::cos(kPi * k / q));

  const QuadratureRule1D rule = gauss_legendre(q + degree + 2);
  data.moment = MatrixXd::Zero(q + 1, degree + 1);
  data.moment_derivative = MatrixXd::Zero(q + 1, degree + 1);
  Eigen::VectorXd b, db;
  for (int g = 0; g < rule.points.size(); ++g) {
    const double x = rule.points[g], w = rule.weights[g];
    bernstein_values(degree, x, b);
    bernstein_derivatives(degree, x, db);
    for (int m = 0; m <= q; ++m) {
      const double lm = lagrange(data.nodes, m, x) * w;
      for (int l = 0; l <= degree; ++l) {
        data.moment(m, l) += lm * b[l];
        data.moment_derivative(m, l) += lm * db[l];
      }
    }
  }
  for (int c = 0; c < 2; ++c) {
    data.transfer[c].resize(q + 1, q + 1);
    for (int m = 0; m <= q; ++m)
      for (int mp = 0; mp <= q; ++mp)
        data.transfer[c](m, mp) = 0.5 * lagrange(data.nodes, m, 0.5 * (data.nodes[mp] + c));
  }
  return data;
}

namespace {
MatrixXd kron(const MatrixXd& A, const MatrixXd& B) {
  MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}
}  // namespace

H2Operator::H2Operator(const WaveContext& wave, const DivConformingSpace& space,
                       const H2Options& options)
    : space_(&space),
      wave_(wave),
      options_(options),
      tree_(space.geometry(), space.level()),
      blocks_(tree_, options.eta),
      interp_(make_interpolation(options.q, space.degree())) {
  moment2d_ = kron(interp_.moment, interp_.moment);
  moment2d_dx_ = kron(interp_.moment_derivative, interp_.moment);
  moment2d_dy_ = kron(interp_.moment, interp_.moment_derivative);
  for (int child = 0; child < 4; ++child)
    transfer2d_[child] = kron(interp_.transfer[child & 1], interp_.transfer[(child >> 1) & 1]);

  build_geometry_samples();
  build_near_field();
  build_far_cache();

  const int nn = (options_.q + 1) * (options_.q + 1);
  const int nc = tree_.num_clusters();
  up0_.resize(nn, nc);
  up1_.resize(nn, nc);
  updiv_.resize(nn, nc);
  p0_.resize(nn, nc);
  p1_.resize(nn, nc);
  dloc_.resize(nn, nc);

  // bookkeeping
  stats_.near_blocks = blocks_.ordered_near_count();
  stats_.far_blocks = blocks_.ordered_far_count();
  stats_.far_by_level.assign(blocks_.num_levels(), 0);
  for (int j = 0; j < blocks_.num_levels(); ++j)
    for (const auto& p : blocks_.far(j)) stats_.far_by_level[j] += (p.a == p.b) ? 1 : 2;
  const double per_block = 2.0 * nn * nn * 16.0;
  stats_.far_storage_formula_mb = stats_.far_blocks * per_block / 1e6;
  const int loc = space.superspace().local_dim();
  stats_.near_storage_mb = stats_.near_blocks * 4.0 * loc * loc * 16.0 / 1e6;
  stats_.moment_storage_mb =
      (moment2d_.size() * 3 + transfer2d_[0].size() * 4) * 8.0 / 1e6 +
      tree_.num_clusters() * nn * 9.0 * 8.0 / 1e6;
}

void H2Operator::build_geometry_samples() {
  const int q = options_.q;
  const int nn = (q + 1) * (q + 1);
  const int nc = tree_.num_clusters();
  node_pos_.resize(nc);
  node_du_.resize(nc);
  node_dv_.resize(nc);
  const MultipatchGeometry& geometry = space_->geometry();
#pragma omp parallel for schedule(dynamic)
  for (int c = 0; c < nc; ++c) {
    const ElementIndex lambda = tree_.element(c);
    node_pos_[c].resize(3, nn);
    node_du_[c].resize(3, nn);
    node_dv_[c].resize(3, nn);
    for (int i = 0; i <= q; ++i)
      for (int j = 0; j <= q; ++j) {
        const PatchSample s = geometry.eval(lambda, Vec2(interp_.nodes[i], interp_.nodes[j]));
        const int n = i * (q + 1) + j;
        node_pos_[c].col(n) = s.position;
        node_du_[c].col(n) = s.jacobian.col(0);
        node_dv_[c].col(n) = s.jacobian.col(1);
      }
  }
}

void H2Operator::build_near_field() {
  const auto& pairs = blocks_.near_field();
  near_blocks_.resize(pairs.size());
  const MultipatchGeometry& geometry = space_->geometry();
  const int p = space_->degree();
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(pairs.size()); ++i) {
    near_blocks_[i] = assemble_near_block(wave_, geometry, p, tree_.element(pairs[i].a),
                                          tree_.element(pairs[i].b), options_.assembly);
  }
}

MatrixXcd H2Operator::block_kernel(int a, int b) const {
  const int nn = node_pos_[a].cols();
  MatrixXcd G(nn, nn);
  const auto& override_kernel = options_.assembly.kernel_override;
  for (int m = 0; m < nn; ++m)
    for (int mp = 0; mp < nn; ++mp)
      G(m, mp) = override_kernel
                     ? override_kernel(node_pos_[a].col(m), node_pos_[b].col(mp))
                     : helmholtz_kernel(wave_.kappa, node_pos_[a].col(m), node_pos_[b].col(mp));
  return G;
}

void H2Operator::build_far_cache() {
  long unordered = 0;
  for (int j = 0; j < blocks_.num_levels(); ++j) unordered += blocks_.far(j).size();
  const int nn = (options_.q + 1) * (options_.q + 1);
  const double bytes_double = static_cast<double>(unordered) * nn * nn * 16.0;
  const double budget = options_.cache_budget_mb * 1e6;

  if (options_.force_on_the_fly || bytes_double > 2.0 * budget) {
    stats_.cache_mode = "on-the-fly";
    stats_.far_cache_actual_mb = 0.0;
    return;
  }
  const bool use_double = bytes_double <= budget;
  stats_.cache_mode = use_double ? "double" : "float";
  stats_.far_cache_actual_mb = (use_double ? bytes_double : 0.5 * bytes_double) / 1e6;

  std::vector<std::pair<int, int>> flat;
  flat.reserve(unordered);
  for (int j = 0; j < blocks_.num_levels(); ++j)
    for (const auto& p : blocks_.far(j)) flat.emplace_back(p.a, p.b);
  if (use_double)
    cache_d_.resize(flat.size());
  else
    cache_f_.resize(flat.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(flat.size()); ++i) {
    const MatrixXcd G = block_kernel(flat[i].first, flat[i].second);
    if (use_double)
      cache_d_[i] = G;
    else
      cache_f_[i] = G.cast<std::complex<float>>();
  }
}

void H2Operator::far_matvec(const VectorXcd& x, VectorXcd& y) const {
  const SuperSpaceLayout& layout = space_->superspace();
  const int q = options_.q;
  const int nn = (q + 1) * (q + 1);
  const int loc = layout.local_dim();
  const int m = tree_.leaf_level();
  up0_.setZero();
  up1_.setZero();
  updiv_.setZero();
  p0_.setZero();
  p1_.setZero();
  dloc_.setZero();

  // leaf moments
  for (int ip = 0; ip < layout.num_patches; ++ip)
    for (int k = 0; k < layout.elems_per_patch(); ++k) {
      const int c = tree_.id({ip, m, k});
      const auto x0 = x.segment(layout.index(0, ip, k, 0), loc);
      const auto x1 = x.segment(layout.index(1, ip, k, 0), loc);
      up0_.col(c).noalias() = moment2d_ * x0;
      up1_.col(c).noalias() = moment2d_ * x1;
      updiv_.col(c).noalias() = moment2d_dx_ * x0;
      updiv_.col(c).noalias() += moment2d_dy_ * x1;
    }

  // upward transfers; the element-level shape functions make the plain
  // moments scale by 2 and the derivative moments by 4 per level
  for (int j = m - 1; j >= 0; --j)
    for (int ip = 0; ip < layout.num_patches; ++ip)
      for (int k = 0; k < (1 << (2 * j)); ++k) {
        const int parent = tree_.id({ip, j, k});
        for (int child = 0; child < 4; ++child) {
          const int cc = tree_.id({ip, j + 1, 4 * k + child});
          up0_.col(parent).noalias() += 2.0 * (transfer2d_[child] * up0_.col(cc));
          up1_.col(parent).noalias() += 2.0 * (transfer2d_[child] * up1_.col(cc));
          updiv_.col(parent).noalias() += 4.0 * (transfer2d_[child] * updiv_.col(cc));
        }
      }

  // source data per cluster: vector moment (3 components) and divergence
  MatrixXcd S(nn, 4 * tree_.num_clusters());
  for (int c = 0; c < tree_.num_clusters(); ++c) {
    for (int n = 0; n < nn; ++n) {
      const Complex a = up0_(n, c), b = up1_(n, c);
      S(n, 4 * c + 0) = node_du_[c](0, n) * a + node_dv_[c](0, n) * b;
      S(n, 4 * c + 1) = node_du_[c](1, n) * a + node_dv_[c](1, n) * b;
      S(n, 4 * c + 2) = node_du_[c](2, n) * a + node_dv_[c](2, n) * b;
      S(n, 4 * c + 3) = updiv_(n, c);
    }
  }
  Eigen::MatrixXcf Sf;
  const bool use_float = !cache_f_.empty();
  if (use_float) Sf = S.cast<std::complex<float>>();

  // block interactions; the alpha metric factors act at the block's level
  long idx = 0;
  MatrixXcd Y(nn, 4);
  Eigen::MatrixXcf Yf(nn, 4);
  const auto accumulate = [&](int target, const MatrixXcd& contrib) {
    for (int n = 0; n < nn; ++n) {
      const Complex wxn = contrib(n, 0), wyn = contrib(n, 1), wzn = contrib(n, 2);
      p0_(n, target) += node_du_[target](0, n) * wxn + node_du_[target](1, n) * wyn +
                        node_du_[target](2, n) * wzn;
      p1_(n, target) += node_dv_[target](0, n) * wxn + node_dv_[target](1, n) * wyn +
                        node_dv_[target](2, n) * wzn;
    }
    dloc_.col(target) += contrib.col(3);
  };
  for (int j = 0; j < blocks_.num_levels(); ++j)
    for (const auto& pair : blocks_.far(j)) {
      if (!cache_d_.empty()) {
        const MatrixXcd& G = cache_d_[idx];
        Y.noalias() = G * S.middleCols(4 * pair.b, 4);
        accumulate(pair.a, Y);
        if (pair.a != pair.b) {
          Y.noalias() = G.transpose() * S.middleCols(4 * pair.a, 4);
          accumulate(pair.b, Y);
        }
      } else if (use_float) {
        const Eigen::MatrixXcf& G = cache_f_[idx];
        Yf.noalias() = G * Sf.middleCols(4 * pair.b, 4);
        accumulate(pair.a, Yf.cast<Complex>());
        if (pair.a != pair.b) {
          Yf.noalias() = G.transpose() * Sf.middleCols(4 * pair.a, 4);
          accumulate(pair.b, Yf.cast<Complex>());
        }
      } else {
        const MatrixXcd G = block_kernel(pair.a, pair.b);
        Y.noalias() = G * S.middleCols(4 * pair.b, 4);
        accumulate(pair.a, Y);
        if (pair.a != pair.b) {
          Y.noalias() = G.transpose() * S.middleCols(4 * pair.a, 4);
          accumulate(pair.b, Y);
        }
      }
      ++idx;
    }

  // downward transfers
  for (int j = 0; j < m; ++j)
    for (int ip = 0; ip < layout.num_patches; ++ip)
      for (int k = 0; k < (1 << (2 * j)); ++k) {
        const int parent = tree_.id({ip, j, k});
        for (int child = 0; child < 4; ++child) {
          const int cc = tree_.id({ip, j + 1, 4 * k + child});
          p0_.col(cc).noalias() += 2.0 * (transfer2d_[child].transpose() * p0_.col(parent));
          p1_.col(cc).noalias() += 2.0 * (transfer2d_[child].transpose() * p1_.col(parent));
          dloc_.col(cc).noalias() += 4.0 * (transfer2d_[child].transpose() * dloc_.col(parent));
        }
      }

  // leaf collection
  const double inv_kappa2 = 1.0 / (wave_.kappa * wave_.kappa);
  for (int ip = 0; ip < layout.num_patches; ++ip)
    for (int k = 0; k < layout.elems_per_patch(); ++k) {
      const int c = tree_.id({ip, m, k});
      auto y0 = y.segment(layout.index(0, ip, k, 0), loc);
      auto y1 = y.segment(layout.index(1, ip, k, 0), loc);
      y0.noalias() += moment2d_.transpose() * p0_.col(c);
      y0.noalias() -= inv_kappa2 * (moment2d_dx_.transpose() * dloc_.col(c));
      y1.noalias() += moment2d_.transpose() * p1_.col(c);
      y1.noalias() -= inv_kappa2 * (moment2d_dy_.transpose() * dloc_.col(c));
    }
}

void H2Operator::near_matvec(const VectorXcd& x, VectorXcd& y) const {
  const SuperSpaceLayout& layout = space_->superspace();
  const int loc = layout.local_dim();
  const auto& pairs = blocks_.near_field();
  for (size_t i = 0; i < pairs.size(); ++i) {
    const ElementIndex ea = tree_.element(pairs[i].a);
    const ElementIndex eb = tree_.element(pairs[i].b);
    const DenseBlock& blk = near_blocks_[i];
    for (int alpha = 0; alpha < 2; ++alpha)
      for (int beta = 0; beta < 2; ++beta) {
        const auto xb = x.segment(layout.index(beta, eb.patch, eb.position, 0), loc);
        y.segment(layout.index(alpha, ea.patch, ea.position, 0), loc).noalias() +=
            blk.comp[alpha][beta] * xb;
        if (pairs[i].a != pairs[i].b) {
          const auto xa = x.segment(layout.index(beta, ea.patch, ea.position, 0), loc);
          y.segment(layout.index(alpha, eb.patch, eb.position, 0), loc).noalias() +=
              blk.comp[beta][alpha].transpose() * xa;
        }
      }
  }
}

VectorXcd H2Operator::apply_superspace(const VectorXcd& x) const {
  IGABEM_REQUIRE(x.size() == space_->superspace().dim(), "superspace dimension mismatch");
  VectorXcd y = VectorXcd::Zero(x.size());
  near_matvec(x, y);
  far_matvec(x, y);
  return y;
}

VectorXcd H2Operator::apply(const VectorXcd& x) const {
  IGABEM_REQUIRE(x.size() == space_->dim(), "operator dimension mismatch");
  const SparseMatrixD& T = space_->transform();
  VectorXcd super = VectorXcd::Zero(T.rows());
  // sparse real T times complex vector
  for (int k = 0; k < T.outerSize(); ++k)
    for (SparseMatrixD::InnerIterator it(T, k); it; ++it)
      super[it.row()] += it.value() * x[it.col()];
  const VectorXcd vs = apply_superspace(super);
  VectorXcd y = VectorXcd::Zero(space_->dim());
  for (int k = 0; k < T.outerSize(); ++k)
    for (SparseMatrixD::InnerIterator it(T, k); it; ++it)
      y[it.col()] += it.value() * vs[it.row()];
  return y;
}

KernelMatrices H2Operator::kernel_matrices(int cluster_a, int cluster_b, int alpha,
                                           int beta) const {
  const MatrixXcd G = block_kernel(cluster_a, cluster_b);
  KernelMatrices out;
  out.k2 = -G / (wave_.kappa * wave_.kappa);
  out.k1 = G;
  const auto& da = (alpha == 0) ? node_du_[cluster_a] : node_dv_[cluster_a];
  const auto& db = (beta == 0) ? node_du_[cluster_b] : node_dv_[cluster_b];
  for (int m = 0; m < G.rows(); ++m)
    for (int mp = 0; mp < G.cols(); ++mp) out.k1(m, mp) *= da.col(m).dot(db.col(mp));
  return out;
}

MatrixXcd H2Operator::aggregated_moments(int cluster, int which) const {
  const ElementIndex lambda = tree_.element(cluster);
  const int loc = space_->superspace().local_dim();
  if (lambda.level == tree_.leaf_level()) {
    // columns: component-0 locals then component-1 locals
    MatrixXcd M(moment2d_.rows(), 2 * loc);
    if (which == 0) {
      M.leftCols(loc) = moment2d_.cast<Complex>();
      M.rightCols(loc) = moment2d_.cast<Complex>();
    } else {
      M.leftCols(loc) = moment2d_dx_.cast<Complex>();
      M.rightCols(loc) = moment2d_dy_.cast<Complex>();
    }
    return M;
  }
  MatrixXcd M;
  for (int child = 0; child < 4; ++child) {
    const MatrixXcd child_m = aggregated_moments(tree_.id(lambda.child(child)), which);
    const double s = (which == 0) ? 2.0 : 4.0;
    const MatrixXcd lifted = s * (transfer2d_[child] * child_m);
    if (M.size() == 0)
      M.resize(lifted.rows(), 4 * lifted.cols());
    M.middleCols(child * lifted.cols(), lifted.cols()) = lifted;
  }
  return M;
}

std::string H2Operator::report() const {
  std::ostringstream out;
  out << "H2 operator report\n";
  out << "  dimension (complex): " << space_->dim() << "\n";
  out << "  superspace dimension: " << space_->superspace().dim() << "\n";
  out << "  interpolation degree q: " << options_.q << ", eta: " << options_.eta << "\n";
  out << "  near blocks (ordered): " << stats_.near_blocks << "\n";
  out << "  far blocks (ordered): " << stats_.far_blocks << " by level:";
  for (size_t j = 0; j < stats_.far_by_level.size(); ++j)
    out << " L" << j << "=" << stats_.far_by_level[j];
  out << "\n";
  out << "  far-field storage, kernel-matrix formula: " << stats_.far_storage_formula_mb
      << " MB\n";
  out << "  far-field kernel cache (" << stats_.cache_mode << "): " << stats_.far_cache_actual_mb
      << " MB\n";
  out << "  near-field storage: " << stats_.near_storage_mb << " MB\n";
  out << "  moment/transfer/node storage: " << stats_.moment_storage_mb << " MB\n";
  const double dense_mb =
      static_cast<double>(space_->superspace().dim()) * space_->superspace().dim() * 16.0 / 1e6;
  out << "  dense-equivalent storage: " << dense_mb << " MB (compression ratio "
      << dense_mb / std::max(1e-9, stats_.far_storage_formula_mb + stats_.near_storage_mb)
      << ")\n";
  return out.str();
}

}  // namespace igabem
