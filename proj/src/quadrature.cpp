#include "igabem/quadrature.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>

namespace igabem {

QuadratureRule1D gauss_legendre(int n) {
  IGABEM_REQUIRE(n >= 1, "quadrature needs at least one point");
  QuadratureRule1D rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  // Newton iteration on P_n over [-1,1], then map to [0,1].
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.points[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * pp * pp);
  }
  return rule;
}

QuadratureRule2D gauss_square(int n) {
  const QuadratureRule1D g = gauss_legendre(n);
  QuadratureRule2D rule;
  rule.points.reserve(n * n);
  rule.weights.resize(n * n);
  int idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j, ++idx) {
      rule.points.emplace_back(g.points[i], g.points[j]);
      rule.weights[idx] = g.weights[i] * g.weights[j];
    }
  return rule;
}

namespace {

// All singular rules are built from a tensor Gauss grid on [0,1]^4 composed
// with the class-specific regularizing transforms.
struct Grid4 {
  std::vector<std::array<double, 4>> x;
  std::vector<double> w;
};

Grid4 grid4(int n) {
  const QuadratureRule1D g = gauss_legendre(n);
  Grid4 grid;
  grid.x.reserve(n * n * n * n);
  grid.w.reserve(n * n * n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          grid.x.push_back({g.points[a], g.points[b], g.points[c], g.points[d]});
          grid.w.push_back(g.weights[a] * g.weights[b] * g.weights[c] * g.weights[d]);
        }
  return grid;
}

// Identical elements: relative coordinates z = t - s, Duffy toward z = 0.
PairQuadratureRule identical_rule(int n) {
  PairQuadratureRule rule;
  rule.adjacency = Adjacency::kIdentical;
  const Grid4 grid = grid4(n);
  for (int quadrant = 0; quadrant < 4; ++quadrant) {
    const double sgn1 = (quadrant & 1) ? -1.0 : 1.0;
    const double sgn2 = (quadrant & 2) ? -1.0 : 1.0;
    for (int tri = 0; tri < 2; ++tri) {
      for (size_t k = 0; k < grid.x.size(); ++k) {
        const double u = grid.x[k][0], v = grid.x[k][1];
        const double z1 = sgn1 * (tri == 0 ? u : u * v);
        const double z2 = sgn2 * (tri == 0 ? u * v : u);
        const double len1 = 1.0 - std::abs(z1), len2 = 1.0 - std::abs(z2);
        const double s1 = std::max(0.0, -z1) + grid.x[k][2] * len1;
        const double s2 = std::max(0.0, -z2) + grid.x[k][3] * len2;
        rule.points.push_back({Vec2(s1, s2), Vec2(s1 + z1, s2 + z2),
                               grid.w[k] * u * len1 * len2});
      }
    }
  }
  return rule;
}

// Shared edge at {y=0}, same direction: singular at s2 = t2 = 0, t1 = s1.
PairQuadratureRule edge_rule(int n) {
  PairQuadratureRule rule;
  rule.adjacency = Adjacency::kCommonEdge;
  const Grid4 grid = grid4(n);
  auto push = [&rule](double z1, double s2, double t2, double sigma, double w) {
    const double len = 1.0 - std::abs(z1);
    const double s1 = std::max(0.0, -z1) + sigma * len;
    rule.points.push_back({Vec2(s1, s2), Vec2(s1 + z1, t2), w * len});
  };
  for (size_t k = 0; k < grid.x.size(); ++k) {
    const double u = grid.x[k][0], a = grid.x[k][1], b = grid.x[k][2], sig = grid.x[k][3];
    const double w = grid.w[k] * u * u;
    push(u, u * a, u * b, sig, w);     // |z1| largest, z1 > 0
    push(-u, u * a, u * b, sig, w);    // |z1| largest, z1 < 0
    push(u * a, u, u * b, sig, w);     // s2 largest, z1 > 0
    push(-u * a, u, u * b, sig, w);    // s2 largest, z1 < 0
    push(u * a, u * b, u, sig, w);     // t2 largest, z1 > 0
    push(-u * a, u * b, u, sig, w);    // t2 largest, z1 < 0
  }
  return rule;
}

// Shared vertex at the origin of both parameter squares.
PairQuadratureRule vertex_rule(int n) {
  PairQuadratureRule rule;
  rule.adjacency = Adjacency::kCommonVertex;
  const Grid4 grid = grid4(n);
  for (size_t k = 0; k < grid.x.size(); ++k) {
    const double u = grid.x[k][0], a = grid.x[k][1], b = grid.x[k][2], c = grid.x[k][3];
    const double w = grid.w[k] * u * u * u;
    rule.points.push_back({Vec2(u, u * a), Vec2(u * b, u * c), w});
    rule.points.push_back({Vec2(u * a, u), Vec2(u * b, u * c), w});
    rule.points.push_back({Vec2(u * b, u * c), Vec2(u, u * a), w});
    rule.points.push_back({Vec2(u * b, u * c), Vec2(u * a, u), w});
  }
  return rule;
}

PairQuadratureRule separated_rule(int n) {
  PairQuadratureRule rule;
  rule.adjacency = Adjacency::kSeparated;
  const QuadratureRule2D g = gauss_square(n);
  for (size_t i = 0; i < g.points.size(); ++i)
    for (size_t j = 0; j < g.points.size(); ++j)
      rule.points.push_back({g.points[i], g.points[j], g.weights[i] * g.weights[j]});
  return rule;
}

}  // namespace

const PairQuadratureRule& pair_rule(Adjacency adjacency, int n) {
  IGABEM_REQUIRE(n >= 1, "pair rule needs at least one point per direction");
  static std::map<std::pair<int, int>, PairQuadratureRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_pair(static_cast<int>(adjacency), n);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  PairQuadratureRule rule;
  switch (adjacency) {
    case Adjacency::kIdentical: rule = identical_rule(n); break;
    case Adjacency::kCommonEdge: rule = edge_rule(n); break;
    case Adjacency::kCommonVertex: rule = vertex_rule(n); break;
    case Adjacency::kSeparated: rule = separated_rule(n); break;
    default: throw std::logic_error("unknown adjacency class");
  }
  return cache.emplace(key, std::move(rule)).first->second;
}

Adjacency classify_adjacency(const ElementIndex& a, const ElementIndex& b,
                             const MultipatchGeometry& geometry) {
  IGABEM_REQUIRE(a.level == b.level, "adjacency requires equal levels");
  if (a.patch == b.patch && a.position == b.position) return Adjacency::kIdentical;
  const auto ca = geometry.element_corners(a);
  const auto cb = geometry.element_corners(b);
  const double tol = 1e-8 * geometry.scale();
  int shared = 0;
  for (const auto& x : ca)
    for (const auto& y : cb)
      if ((x - y).norm() < tol) ++shared;
  switch (shared) {
    case 0: return Adjacency::kSeparated;
    case 1: return Adjacency::kCommonVertex;
    case 2: return Adjacency::kCommonEdge;
    default:
      throw std::logic_error("elements share more than two corners; refine the mesh");
  }
}

namespace {
const std::array<SquareMap, 8>& dihedral_group() {
  static const std::array<SquareMap, 8> group = [] {
    std::array<SquareMap, 8> g;
    Eigen::Matrix2d rot;
    rot << 0, -1, 1, 0;  // 90 degrees about the center composed into affine form
    SquareMap r;
    r.linear = rot;
    r.shift = Vec2(1, 0);  // (x,y) -> (1-y, x)
    SquareMap cur;  // identity
    for (int k = 0; k < 4; ++k) {
      g[k] = cur;
      SquareMap next;
      next.linear = r.linear * cur.linear;
      next.shift = r.linear * cur.shift + r.shift;
      cur = next;
    }
    SquareMap t;  // transpose (x,y) -> (y,x)
    t.linear << 0, 1, 1, 0;
    for (int k = 0; k < 4; ++k) {
      g[4 + k].linear = g[k].linear * t.linear;
      g[4 + k].shift = g[k].linear * t.shift + g[k].shift;
    }
    return g;
  }();
  return group;
}

Vec2 morton_corner(int c) { return Vec2(c & 1, (c >> 1) & 1); }

int corner_index(const Vec2& x) {
  return (x[0] > 0.5 ? 1 : 0) + (x[1] > 0.5 ? 2 : 0);
}
}  // namespace

SquareMap square_map_for_corners(int c0, int c1) {
  for (const SquareMap& m : dihedral_group()) {
    if (corner_index(m(morton_corner(0))) == c0 && corner_index(m(morton_corner(1))) == c1)
      return m;
  }
  throw std::logic_error("no dihedral map for the requested corner pair (corners not adjacent?)");
}

SquareMap rotation_to_corner(int c) {
  const auto& g = dihedral_group();
  for (int k = 0; k < 4; ++k)
    if (corner_index(g[k](morton_corner(0))) == c) return g[k];
  throw std::logic_error("unreachable corner");
}

PairNormalization normalize_pair(const ElementIndex& a, const ElementIndex& b,
                                 Adjacency adjacency, const MultipatchGeometry& geometry) {
  PairNormalization norm;
  if (adjacency == Adjacency::kIdentical || adjacency == Adjacency::kSeparated) return norm;

  const auto ca = geometry.element_corners(a);
  const auto cb = geometry.element_corners(b);
  const double tol = 1e-8 * geometry.scale();
  std::vector<std::pair<int, int>> matches;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if ((ca[i] - cb[j]).norm() < tol) matches.emplace_back(i, j);

  if (adjacency == Adjacency::kCommonVertex) {
    IGABEM_CHECK(matches.size() == 1, "vertex normalization expects one shared corner");
    norm.map_a = rotation_to_corner(matches[0].first);
    norm.map_b = rotation_to_corner(matches[0].second);
    return norm;
  }
  IGABEM_CHECK(matches.size() == 2, "edge normalization expects two shared corners");
  norm.map_a = square_map_for_corners(matches[0].first, matches[1].first);
  norm.map_b = square_map_for_corners(matches[0].second, matches[1].second);
  return norm;
}

}  // namespace igabem
