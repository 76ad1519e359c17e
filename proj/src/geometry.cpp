#include "igabem/geometry.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace igabem {

NurbsPatch::NurbsPatch(TensorSplineSpace space, std::vector<Vec3> control_points,
                       std::vector<double> weights)
    : space_(std::move(space)), points_(std::move(control_points)), weights_(std::move(weights)) {
  const int n = space_.dim();
  IGABEM_REQUIRE(static_cast<int>(points_.size()) == n, "patch: control point count mismatch");
  IGABEM_REQUIRE(static_cast<int>(weights_.size()) == n, "patch: weight count mismatch");
  scale_ = 1e-30;
  for (int i = 0; i < n; ++i) {
    if (!(weights_[i] > 0.0)) throw GeometryError("patch: weights must be strictly positive");
    scale_ = std::max(scale_, points_[i].cwiseAbs().maxCoeff());
  }

  const auto& kx = space_.knots_x();
  const auto& ky = space_.knots_y();
  const auto ex = bezier_extract_1d(kx);
  const auto ey = bezier_extract_1d(ky);
  nex_ = kx.num_elements();
  ney_ = ky.num_elements();
  const int px = kx.degree(), py = ky.degree();
  element_coeffs_.resize(nex_ * ney_);
  for (int e1 = 0; e1 < nex_; ++e1)
    for (int e2 = 0; e2 < ney_; ++e2) {
      Eigen::MatrixXd coef = Eigen::MatrixXd::Zero((px + 1) * (py + 1), 4);
      for (int k1 = 0; k1 <= px; ++k1)
        for (int k2 = 0; k2 <= py; ++k2)
          for (int i = 0; i <= px; ++i)
            for (int j = 0; j <= py; ++j) {
              const double c = ex.ops[e1](k1, i) * ey.ops[e2](k2, j);
              if (c == 0.0) continue;
              const int g = space_.index(ex.first[e1] + i, ey.first[e2] + j);
              const double w = weights_[g];
              coef.row(k1 * (py + 1) + k2) +=
                  c * Eigen::RowVector4d(w * points_[g][0], w * points_[g][1], w * points_[g][2], w);
            }
      element_coeffs_[e1 * ney_ + e2] = std::move(coef);
    }
}

PatchSample NurbsPatch::eval(const Vec2& s) const {
  const auto& kx = space_.knots_x();
  const auto& ky = space_.knots_y();
  const int e1 = kx.find_element(s[0]);
  const int e2 = ky.find_element(s[1]);
  const double ax = kx.breaks()[e1], bx = kx.breaks()[e1 + 1];
  const double ay = ky.breaks()[e2], by = ky.breaks()[e2 + 1];
  const double tx = (s[0] - ax) / (bx - ax), ty = (s[1] - ay) / (by - ay);
  const int px = kx.degree(), py = ky.degree();

  Eigen::VectorXd bu, bv, du, dv;
  bernstein_values(px, tx, bu);
  bernstein_values(py, ty, bv);
  bernstein_derivatives(px, tx, du);
  bernstein_derivatives(py, ty, dv);
  du /= (bx - ax);
  dv /= (by - ay);

  const Eigen::MatrixXd& C = element_coeffs_[e1 * ney_ + e2];
  Eigen::RowVector4d H = Eigen::RowVector4d::Zero(), Hu = H, Hv = H;
  for (int i = 0; i <= px; ++i)
    for (int j = 0; j <= py; ++j) {
      const auto row = C.row(i * (py + 1) + j);
      H += bu[i] * bv[j] * row;
      Hu += du[i] * bv[j] * row;
      Hv += bu[i] * dv[j] * row;
    }

  PatchSample out;
  const double W = H[3];
  const Vec3 P = H.head<3>().transpose() / W;
  out.position = P;
  out.jacobian.col(0) = (Hu.head<3>().transpose() - Hu[3] * P) / W;
  out.jacobian.col(1) = (Hv.head<3>().transpose() - Hv[3] * P) / W;
  out.normal = out.jacobian.col(0).cross(out.jacobian.col(1));
  out.surface_measure = out.normal.norm();
  if (out.surface_measure <= 1e-14 * scale_ * scale_) {
    std::ostringstream msg;
    msg << "degenerate patch jacobian at parameter (" << s[0] << ", " << s[1] << ")";
    throw GeometryError(msg.str());
  }
  return out;
}

Vec2 edge_point(int edge, double t) {
  switch (edge) {
    case 0: return {t, 0.0};
    case 1: return {1.0, t};
    case 2: return {t, 1.0};
    case 3: return {0.0, t};
    default: throw std::out_of_range("edge index must be 0..3");
  }
}

AffineCellMap element_map(const ElementIndex& lambda) {
  IGABEM_REQUIRE(lambda.level >= 0, "element level must be non-negative");
  IGABEM_REQUIRE(lambda.position >= 0 && lambda.position < (1 << (2 * lambda.level)),
                 "element position out of range for level");
  int kx = 0, ky = 0;
  for (int b = 0; b < lambda.level; ++b) {
    kx |= ((lambda.position >> (2 * b)) & 1) << b;
    ky |= ((lambda.position >> (2 * b + 1)) & 1) << b;
  }
  AffineCellMap map;
  map.scale = std::ldexp(1.0, -lambda.level);
  map.offset = Vec2(kx * map.scale, ky * map.scale);
  return map;
}

MultipatchGeometry::MultipatchGeometry(std::vector<NurbsPatch> patches)
    : patches_(std::move(patches)) {
  IGABEM_REQUIRE(!patches_.empty(), "geometry needs at least one patch");
  Vec3 lo = Vec3::Constant(1e300), hi = Vec3::Constant(-1e300);
  for (const auto& p : patches_)
    for (const auto& c : p.control_points()) {
      lo = lo.cwiseMin(c);
      hi = hi.cwiseMax(c);
    }
  scale_ = (hi - lo).norm();
  if (scale_ <= 0.0) throw GeometryError("geometry has zero extent");
  verify_regularity();
  detect_interfaces();
  verify_orientation();
}

void MultipatchGeometry::verify_regularity() const {
  for (int i = 0; i < num_patches(); ++i)
    for (int a = 0; a < 32; ++a)
      for (int b = 0; b < 32; ++b) {
        try {
          patches_[i].eval(Vec2((a + 0.5) / 32.0, (b + 0.5) / 32.0));
        } catch (const GeometryError& err) {
          throw GeometryError("patch " + std::to_string(i) + ": " + err.what());
        }
      }
}

namespace {
constexpr int kEdgeSamples = 33;

std::vector<Vec3> sample_edge(const NurbsPatch& patch, int edge) {
  std::vector<Vec3> pts(kEdgeSamples);
  for (int k = 0; k < kEdgeSamples; ++k)
    pts[k] = patch.position(edge_point(edge, static_cast<double>(k) / (kEdgeSamples - 1)));
  return pts;
}

// +1 if the positive (counterclockwise) boundary walks the edge with
// increasing edge parameter.
int boundary_sense(int edge) { return (edge == 0 || edge == 1) ? 1 : -1; }
}  // namespace

void MultipatchGeometry::detect_interfaces() {
  const double tol = 1e-10 * scale_;
  struct EdgeRef {
    int patch, edge;
    std::vector<Vec3> samples;
  };
  std::vector<EdgeRef> edges;
  for (int i = 0; i < num_patches(); ++i)
    for (int e = 0; e < 4; ++e) edges.push_back({i, e, sample_edge(patches_[i], e)});

  std::vector<int> partner(edges.size(), -1);
  for (size_t a = 0; a < edges.size(); ++a)
    for (size_t b = a + 1; b < edges.size(); ++b) {
      if (edges[a].patch == edges[b].patch && edges[a].edge == edges[b].edge) continue;
      double dev_fwd = 0.0, dev_rev = 0.0;
      for (int k = 0; k < kEdgeSamples; ++k) {
        dev_fwd = std::max(dev_fwd, (edges[a].samples[k] - edges[b].samples[k]).norm());
        dev_rev = std::max(dev_rev,
                           (edges[a].samples[k] - edges[b].samples[kEdgeSamples - 1 - k]).norm());
      }
      if (std::min(dev_fwd, dev_rev) > tol) continue;
      if (partner[a] >= 0 || partner[b] >= 0)
        throw GeometryError("non-manifold geometry: a patch edge matches more than one neighbor");
      partner[a] = static_cast<int>(b);
      partner[b] = static_cast<int>(a);
      interfaces_.push_back({edges[a].patch, edges[a].edge, edges[b].patch, edges[b].edge,
                             dev_rev < dev_fwd});
    }
  closed_ = true;
  for (size_t a = 0; a < edges.size(); ++a)
    if (partner[a] < 0) closed_ = false;
}

void MultipatchGeometry::verify_orientation() const {
  for (const auto& itf : interfaces_) {
    const bool expect_reversed = boundary_sense(itf.edge_a) == boundary_sense(itf.edge_b);
    if (itf.reversed != expect_reversed) {
      std::ostringstream msg;
      msg << "inconsistent patch orientation across interface between patch " << itf.patch_a
          << " (edge " << itf.edge_a << ") and patch " << itf.patch_b << " (edge " << itf.edge_b
          << "); reparametrize one patch so all normals point outward";
      throw GeometryError(msg.str());
    }
  }
}

PatchSample MultipatchGeometry::eval(const ElementIndex& lambda, const Vec2& s) const {
  IGABEM_REQUIRE(lambda.patch >= 0 && lambda.patch < num_patches(), "patch index out of range");
  const AffineCellMap map = element_map(lambda);
  PatchSample sample = patches_[lambda.patch].eval(map(s));
  sample.jacobian *= map.scale;
  sample.normal *= map.scale * map.scale;
  sample.surface_measure *= map.scale * map.scale;
  return sample;
}

std::array<Vec3, 4> MultipatchGeometry::element_corners(const ElementIndex& lambda) const {
  const AffineCellMap map = element_map(lambda);
  const NurbsPatch& p = patches_[lambda.patch];
  return {p.position(map(Vec2(0, 0))), p.position(map(Vec2(1, 0))), p.position(map(Vec2(0, 1))),
          p.position(map(Vec2(1, 1)))};
}

// ---------------------------------------------------------------------------
// file format
// ---------------------------------------------------------------------------

namespace {
std::string next_token(std::istream& in) {
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    return tok;
  }
  throw GeometryError("geometry file: unexpected end of file");
}

double next_double(std::istream& in) {
  const std::string tok = next_token(in);
  try {
    size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw GeometryError("geometry file: expected a number, got '" + tok + "'");
  }
}

int next_int(std::istream& in) {
  const double v = next_double(in);
  const int i = static_cast<int>(std::lround(v));
  if (std::abs(v - i) > 0) throw GeometryError("geometry file: expected an integer");
  return i;
}

void expect(std::istream& in, const std::string& word) {
  const std::string tok = next_token(in);
  if (tok != word) throw GeometryError("geometry file: expected '" + word + "', got '" + tok + "'");
}
}  // namespace

MultipatchGeometry read_geometry(std::istream& in) {
  expect(in, "igabem-geometry");
  const int version = next_int(in);
  if (version != 1) throw GeometryError("geometry file: unsupported version");
  expect(in, "patches");
  const int np = next_int(in);
  if (np < 1) throw GeometryError("geometry file: patch count must be positive");
  std::vector<NurbsPatch> patches;
  patches.reserve(np);
  for (int ip = 0; ip < np; ++ip) {
    expect(in, "patch");
    next_int(in);  // ordinal, informational
    expect(in, "degrees");
    const int p1 = next_int(in), p2 = next_int(in);
    expect(in, "knots_u");
    const int n1 = next_int(in);
    std::vector<double> ku(n1);
    for (auto& k : ku) k = next_double(in);
    expect(in, "knots_v");
    const int n2 = next_int(in);
    std::vector<double> kv(n2);
    for (auto& k : kv) k = next_double(in);
    expect(in, "net");
    const int k1 = next_int(in), k2 = next_int(in);
    KnotVector kvu(p1, std::move(ku)), kvv(p2, std::move(kv));
    if (kvu.dim() != k1 || kvv.dim() != k2)
      throw GeometryError("geometry file: net size does not match knot vectors");
    std::vector<Vec3> pts(k1 * k2);
    std::vector<double> w(k1 * k2);
    for (int i = 0; i < k1; ++i)
      for (int j = 0; j < k2; ++j) {
        const double x = next_double(in), y = next_double(in), z = next_double(in);
        const double wij = next_double(in);
        if (!(wij > 0.0)) throw GeometryError("geometry file: weights must be positive");
        pts[i * k2 + j] = Vec3(x, y, z);
        w[i * k2 + j] = wij;
      }
    try {
      patches.emplace_back(TensorSplineSpace(std::move(kvu), std::move(kvv)), std::move(pts),
                           std::move(w));
    } catch (const std::invalid_argument& err) {
      throw GeometryError("geometry file: patch " + std::to_string(ip) + ": " + err.what());
    }
  }
  return MultipatchGeometry(std::move(patches));
}

MultipatchGeometry load_geometry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GeometryError("cannot open geometry file '" + path + "'");
  return read_geometry(in);
}

void write_geometry(const MultipatchGeometry& geometry, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GeometryError("cannot write geometry file '" + path + "'");
  out << std::setprecision(17);
  out << "# multipatch NURBS surface\n";
  out << "igabem-geometry 1\n";
  out << "patches " << geometry.num_patches() << "\n";
  for (int ip = 0; ip < geometry.num_patches(); ++ip) {
    const NurbsPatch& p = geometry.patch(ip);
    const auto& kx = p.space().knots_x();
    const auto& ky = p.space().knots_y();
    out << "patch " << ip << "\n";
    out << "degrees " << kx.degree() << " " << ky.degree() << "\n";
    out << "knots_u " << kx.knots().size();
    for (double k : kx.knots()) out << " " << k;
    out << "\nknots_v " << ky.knots().size();
    for (double k : ky.knots()) out << " " << k;
    out << "\nnet " << kx.dim() << " " << ky.dim() << "\n";
    for (int i = 0; i < kx.dim(); ++i)
      for (int j = 0; j < ky.dim(); ++j) {
        const int g = i * ky.dim() + j;
        const Vec3& c = p.control_points()[g];
        out << c[0] << " " << c[1] << " " << c[2] << " " << p.weights()[g] << "\n";
      }
  }
}

// ---------------------------------------------------------------------------
// built-in geometries
// ---------------------------------------------------------------------------

MultipatchGeometry unit_sphere() {
  // Homogeneous biquartic control net (X, Y, Z, W) of the +z patch of an exact
  // rational sphere with cube topology. Boundary curves are symmetric
  // rational-quadratic great-circle arcs; the interior resolves the on-sphere
  // identity X^2+Y^2+Z^2 = W^2 with the surface-measure spread minimized over
  // the remaining reparametrization freedom.
  static const double net[5][5][4] = {
      {{-0.57735026918962576, -0.57735026918962576, 0.57735026918962576, 1.0},
       {-0.63239215850587640, -0.27883876791260264, 0.63239215850587640, 0.89121120360839716},
       {-0.64779189099135480, 0.0, 0.64779189099135480, 0.85911675639654192},
       {-0.63239215850587640, 0.27883876791260264, 0.63239215850587640, 0.89121120360839716},
       {-0.57735026918962576, 0.57735026918962576, 0.57735026918962576, 1.0}},
      {{-0.27883876791260264, -0.63239215850587640, 0.63239215850587640, 0.89121120360839716},
       {-0.38084627288038375, -0.38084627288038375, 0.94190697555809783, 0.94190697555809783},
       {-0.43602684739006708, 0.0, 1.0363063362412203, 0.95003332120704672},
       {-0.38084627288038375, 0.38084627288038375, 0.94190697555809783, 0.94190697555809783},
       {-0.27883876791260264, 0.63239215850587640, 0.63239215850587640, 0.89121120360839716}},
      {{0.0, -0.64779189099135480, 0.64779189099135480, 0.85911675639654192},
       {0.0, -0.43602684739006708, 1.0363063362412203, 0.95003332120704672},
       {0.0, 0.0, 1.2512380623541114, 1.0633937375495006},
       {0.0, 0.43602684739006708, 1.0363063362412203, 0.95003332120704672},
       {0.0, 0.64779189099135480, 0.64779189099135480, 0.85911675639654192}},
      {{0.27883876791260264, -0.63239215850587640, 0.63239215850587640, 0.89121120360839716},
       {0.38084627288038375, -0.38084627288038375, 0.94190697555809783, 0.94190697555809783},
       {0.43602684739006708, 0.0, 1.0363063362412203, 0.95003332120704672},
       {0.38084627288038375, 0.38084627288038375, 0.94190697555809783, 0.94190697555809783},
       {0.27883876791260264, 0.63239215850587640, 0.63239215850587640, 0.89121120360839716}},
      {{0.57735026918962576, -0.57735026918962576, 0.57735026918962576, 1.0},
       {0.63239215850587640, -0.27883876791260264, 0.63239215850587640, 0.89121120360839716},
       {0.64779189099135480, 0.0, 0.64779189099135480, 0.85911675639654192},
       {0.63239215850587640, 0.27883876791260264, 0.63239215850587640, 0.89121120360839716},
       {0.57735026918962576, 0.57735026918962576, 0.57735026918962576, 1.0}}};

  static const double rots[6][3][3] = {
      {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}},     // +z
      {{1, 0, 0}, {0, -1, 0}, {0, 0, -1}},   // -z
      {{0, 0, 1}, {0, 1, 0}, {-1, 0, 0}},    // +x
      {{0, 0, -1}, {0, 1, 0}, {1, 0, 0}},    // -x
      {{1, 0, 0}, {0, 0, 1}, {0, -1, 0}},    // +y
      {{1, 0, 0}, {0, 0, -1}, {0, 1, 0}},    // -y
  };

  std::vector<NurbsPatch> patches;
  std::vector<double> open_quartic = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  for (const auto& rot : rots) {
    Eigen::Matrix3d R;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) R(r, c) = rot[r][c];
    std::vector<Vec3> pts(25);
    std::vector<double> w(25);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        const double* q = net[i][j];
        pts[i * 5 + j] = R * (Vec3(q[0], q[1], q[2]) / q[3]);
        w[i * 5 + j] = q[3];
      }
    patches.emplace_back(
        TensorSplineSpace(KnotVector(4, open_quartic), KnotVector(4, open_quartic)),
        std::move(pts), std::move(w));
  }
  return MultipatchGeometry(std::move(patches));
}

NurbsPatch flat_patch(const Vec3& origin, const Vec3& span_u, const Vec3& span_v) {
  std::vector<double> knots = {0, 0, 1, 1};
  std::vector<Vec3> pts = {origin, origin + span_v, origin + span_u, origin + span_u + span_v};
  std::vector<double> w(4, 1.0);
  return NurbsPatch(TensorSplineSpace(KnotVector(1, knots), KnotVector(1, knots)), std::move(pts),
                    std::move(w));
}

}  // namespace igabem
