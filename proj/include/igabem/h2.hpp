#ifndef IGABEM_H2_HPP_
#define IGABEM_H2_HPP_

#include <optional>

#include "igabem/assembly.hpp"

namespace igabem {

/// Quadtree of surface clusters with sampled bounding spheres.
class ClusterTree {
 public:
  ClusterTree(const MultipatchGeometry& geometry, int leaf_level);

  int leaf_level() const { return leaf_level_; }
  int num_patches() const { return num_patches_; }
  int clusters_at(int level) const { return num_patches_ << (2 * level); }
  int num_clusters() const { return static_cast<int>(center_.size()); }

  /// Flat cluster id of (patch, level, position).
  int id(const ElementIndex& lambda) const {
    return level_offset_[lambda.level] + (lambda.patch << (2 * lambda.level)) + lambda.position;
  }
  ElementIndex element(int cluster) const;

  const Vec3& center(int cluster) const { return center_[cluster]; }
  double radius(int cluster) const { return radius_[cluster]; }
  double diam(int cluster) const { return 2.0 * radius_[cluster]; }
  double dist(int a, int b) const {
    return std::max(0.0, (center_[a] - center_[b]).norm() - radius_[a] - radius_[b]);
  }

 private:
  int leaf_level_;
  int num_patches_;
  std::vector<int> level_offset_;
  std::vector<Vec3> center_;
  std::vector<double> radius_;
};

/// max{diam, diam'} <= eta dist, with bounding-sphere diameters and the
/// sphere-gap distance (conservative on both sides).
bool admissible(const ClusterTree& tree, int a, int b, double eta);

/// Far/near partition of the level-wise cluster pairs. Pairs are stored
/// unordered (a <= b); the operator applies each stored block both ways.
class BlockClusterTree {
 public:
  BlockClusterTree(const ClusterTree& tree, double eta);

  struct Pair {
    int a, b;
  };

  double eta() const { return eta_; }
  const std::vector<Pair>& far(int level) const { return far_[level]; }
  const std::vector<Pair>& near_field() const { return near_; }
  int num_levels() const { return static_cast<int>(far_.size()); }
  long ordered_far_count() const;
  long ordered_near_count() const;

 private:
  double eta_;
  std::vector<std::vector<Pair>> far_;  // by level
  std::vector<Pair> near_;              // leaf level
};

/// Rate-preserving interpolation degree rule q = max(q0, ceil(c (sigma+1) m)).
int choose_q(double sigma, int m, double c = 1.0, int q0 = 4);

/// 1-D interpolation data: Chebyshev points of the second kind on [0,1],
/// moment matrices against the Bernstein shape functions, and the two
/// parent-to-child transfer matrices.
struct InterpolationData {
  int q = 0;
  Eigen::VectorXd nodes;        // q+1
  MatrixXd moment;              // (q+1) x (p+1): int L_m B_l
  MatrixXd moment_derivative;   // (q+1) x (p+1): int L_m B_l'
  MatrixXd transfer[2];         // (q+1) x (q+1): 1/2 L_m((x+c)/2)
};

InterpolationData make_interpolation(int q, int degree);

/// Kernel and geometry samples of one admissible block (paper-facing API,
/// used by the low-rank reconstruction tests).
struct KernelMatrices {
  MatrixXcd k1;  // G * <d_alpha F, d_beta F'> at tensor nodes
  MatrixXcd k2;  // -(1/kappa^2) G
};

struct H2Options {
  int q = 10;
  double eta = 1.6;
  double cache_budget_mb = 1800.0;  // far kernel cache; float fallback at 2x
  bool force_on_the_fly = false;
  AssemblyOptions assembly;
};

struct H2Stats {
  long near_blocks = 0;          // ordered count
  long far_blocks = 0;           // ordered count
  std::vector<long> far_by_level;
  double far_storage_formula_mb = 0.0;  // sum over blocks of 2 (q+1)^4 complex
  double far_cache_actual_mb = 0.0;
  double near_storage_mb = 0.0;
  double moment_storage_mb = 0.0;
  std::string cache_mode;  // "double", "float", "on-the-fly"
};

/// Compressed electric single layer operator: dense near field plus
/// interpolation-based multipole far field in H^2 form.
class H2Operator {
 public:
  H2Operator(const WaveContext& wave, const DivConformingSpace& space, const H2Options& options);

  const DivConformingSpace& space() const { return *space_; }
  const ClusterTree& clusters() const { return tree_; }
  const BlockClusterTree& blocks() const { return blocks_; }
  const WaveContext& wave() const { return wave_; }
  int dim() const { return space_->dim(); }

  /// y = V* x on superspace coefficients.
  VectorXcd apply_superspace(const VectorXcd& x) const;
  /// y = T' V* T x on the div-conforming space.
  VectorXcd apply(const VectorXcd& x) const;

  /// Kernel/geometry sample matrices of one admissible block.
  KernelMatrices kernel_matrices(int cluster_a, int cluster_b, int alpha, int beta) const;
  /// Plain and derivative moments of a cluster's basis functions, aggregated
  /// through the transfer recurrences (columns: functions, rows: nodes).
  MatrixXcd aggregated_moments(int cluster, int which /*0: plain, 1: divergence*/) const;

  H2Stats stats() const { return stats_; }
  std::string report() const;

 private:
  const DivConformingSpace* space_;
  WaveContext wave_;
  H2Options options_;
  ClusterTree tree_;
  BlockClusterTree blocks_;
  InterpolationData interp_;
  MatrixXd moment2d_, moment2d_dx_, moment2d_dy_;  // (q+1)^2 x (p+1)^2
  MatrixXd transfer2d_[4];                         // per Morton child

  // per-cluster tensor-node geometry: positions and tangents
  std::vector<Eigen::Matrix<double, 3, Eigen::Dynamic>> node_pos_, node_du_, node_dv_;

  // near-field blocks for the unordered near pairs
  std::vector<DenseBlock> near_blocks_;

  // far-field kernel cache (one of these, or neither when on the fly)
  std::vector<MatrixXcd> cache_d_;
  std::vector<Eigen::MatrixXcf> cache_f_;

  H2Stats stats_;

  // matvec workspaces, one (q+1)^2 column per cluster
  mutable MatrixXcd up0_, up1_, updiv_, p0_, p1_, dloc_;

  void build_geometry_samples();
  void build_near_field();
  void build_far_cache();
  MatrixXcd block_kernel(int a, int b) const;
  void far_matvec(const VectorXcd& x, VectorXcd& y) const;
  void near_matvec(const VectorXcd& x, VectorXcd& y) const;
};

}  // namespace igabem

#endif  // IGABEM_H2_HPP_
