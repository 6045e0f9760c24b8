#include "ifem/fem.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "ifem/errors.hpp"

namespace ifem {

namespace {

// 1D Lagrange basis on the equispaced nodes {k/degree}.
double lagrange_1d(int degree, int i, double x) {
  double v = 1.0;
  const double xi = static_cast<double>(i) / degree;
  for (int k = 0; k <= degree; ++k) {
    if (k == i) continue;
    const double xk = static_cast<double>(k) / degree;
    v *= (x - xk) / (xi - xk);
  }
  return v;
}

double lagrange_1d_derivative(int degree, int i, double x) {
  const double xi = static_cast<double>(i) / degree;
  double sum = 0.0;
  for (int m = 0; m <= degree; ++m) {
    if (m == i) continue;
    const double xm = static_cast<double>(m) / degree;
    double prod = 1.0 / (xi - xm);
    for (int k = 0; k <= degree; ++k) {
      if (k == i || k == m) continue;
      const double xk = static_cast<double>(k) / degree;
      prod *= (x - xk) / (xi - xk);
    }
    sum += prod;
  }
  return sum;
}

}  // namespace

ReferenceElement::ReferenceElement(ElementFamily family, int degree)
    : family_(family), degree_(degree) {
  if (family == ElementFamily::LagrangeQ) {
    if (degree < 1 || degree > 2)
      throw InvalidArgumentError("LagrangeQ supports degrees 1 and 2");
    n_basis_ = (degree + 1) * (degree + 1);
    nodes_.reserve(n_basis_);
    for (int j = 0; j <= degree; ++j)
      for (int i = 0; i <= degree; ++i)
        nodes_.emplace_back(static_cast<double>(i) / degree, static_cast<double>(j) / degree);
  } else {
    if (degree != 1)
      throw InvalidArgumentError("discontinuous Legendre element supports degree 1 only");
    n_basis_ = 3;
  }
}

ReferenceElement ReferenceElement::lagrange(int degree) {
  return ReferenceElement(ElementFamily::LagrangeQ, degree);
}

ReferenceElement ReferenceElement::legendre_discontinuous(int degree) {
  return ReferenceElement(ElementFamily::LegendrePDiscontinuous, degree);
}

double ReferenceElement::shape_value(int i, const Vec2& p) const {
  if (i < 0 || i >= n_basis_) throw std::out_of_range("shape_value: basis index");
  if (family_ == ElementFamily::LagrangeQ) {
    const int n = degree_ + 1;
    return lagrange_1d(degree_, i % n, p.x()) * lagrange_1d(degree_, i / n, p.y());
  }
  switch (i) {
    case 0:
      return 1.0;
    case 1:
      return p.x() - 0.5;
    default:
      return p.y() - 0.5;
  }
}

Vec2 ReferenceElement::shape_gradient(int i, const Vec2& p) const {
  if (i < 0 || i >= n_basis_) throw std::out_of_range("shape_gradient: basis index");
  if (family_ == ElementFamily::LagrangeQ) {
    const int n = degree_ + 1;
    const int ix = i % n, iy = i / n;
    return Vec2(lagrange_1d_derivative(degree_, ix, p.x()) * lagrange_1d(degree_, iy, p.y()),
                lagrange_1d(degree_, ix, p.x()) * lagrange_1d_derivative(degree_, iy, p.y()));
  }
  switch (i) {
    case 0:
      return Vec2(0.0, 0.0);
    case 1:
      return Vec2(1.0, 0.0);
    default:
      return Vec2(0.0, 1.0);
  }
}

std::vector<int> ReferenceElement::face_nodes(int local_face) const {
  std::vector<int> out;
  if (family_ != ElementFamily::LagrangeQ) return out;
  const double tol = 1e-12;
  for (int i = 0; i < n_basis_; ++i) {
    const Vec2& n = nodes_[i];
    const bool on_face = (local_face == 0 && std::abs(n.y()) < tol) ||
                         (local_face == 1 && std::abs(n.x() - 1.0) < tol) ||
                         (local_face == 2 && std::abs(n.y() - 1.0) < tol) ||
                         (local_face == 3 && std::abs(n.x()) < tol);
    if (on_face) out.push_back(i);
  }
  return out;
}

void gauss_rule_1d(int n, std::vector<double>& points, std::vector<double>& weights) {
  if (n < 1) throw InvalidArgumentError("gauss rule: need >= 1 point");

  // Newton iteration on Legendre polynomials over [-1,1], mapped to [0,1].
  points.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n == 1 ? 1.0 : n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    points[i] = 0.5 * (t + 1.0);
    weights[i] = n == 1 ? 1.0 : 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

QuadratureRule gauss_rule(int points_per_direction) {
  const int n = points_per_direction;
  std::vector<double> x, w;
  gauss_rule_1d(n, x, w);

  QuadratureRule rule;
  rule.points.reserve(n * n);
  rule.weights.reserve(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      rule.points.emplace_back(x[i], x[j]);
      rule.weights.push_back(w[i] * w[j]);
    }
  return rule;
}

namespace {

struct PairHash {
  std::size_t operator()(const std::pair<int, int>& p) const {
    return std::hash<long long>()((static_cast<long long>(p.first) << 32) ^ p.second);
  }
};

}  // namespace

DofHandler distribute_dofs(const Mesh& mesh, const ReferenceElement& elem, int components) {
  if (components < 1) throw InvalidArgumentError("distribute_dofs: components must be >= 1");
  DofHandler dh;
  dh.mesh_ = &mesh;
  dh.element_ = elem;
  dh.components_ = components;
  dh.cell_scalar_.assign(static_cast<std::size_t>(mesh.n_cells()) * elem.n_basis(), -1);

  int next = 0;
  if (!elem.continuous()) {
    for (int c = 0; c < mesh.n_cells(); ++c)
      for (int i = 0; i < elem.n_basis(); ++i) dh.cell_scalar_[c * elem.n_basis() + i] = next++;
    dh.n_scalar_ = next;
    return dh;
  }

  // Continuous Lagrange: identify nodes shared through vertices and edges.
  // Degree <= 2 means at most one interior node per edge, so no orientation
  // bookkeeping is needed.
  const int deg = elem.degree();
  std::vector<int> vertex_dof(mesh.n_vertices(), -1);
  std::unordered_map<std::pair<int, int>, int, PairHash> edge_dof;

  // Lexicographic node index of each cell corner, in cell vertex order
  // (ccw: lower-left, lower-right, upper-right, upper-left).
  const std::array<int, 4> corner_node = {0, deg, deg * (deg + 1) + deg, deg * (deg + 1)};

  for (int c = 0; c < mesh.n_cells(); ++c) {
    for (int i = 0; i < elem.n_basis(); ++i) {
      int& slot = dh.cell_scalar_[c * elem.n_basis() + i];
      // Corner?
      int corner = -1;
      for (int k = 0; k < 4; ++k)
        if (corner_node[k] == i) corner = k;
      if (corner >= 0) {
        int& vd = vertex_dof[mesh.cell(c)[corner]];
        if (vd < 0) vd = next++;
        slot = vd;
        continue;
      }
      // Edge midpoint? (degree 2 only)
      if (deg == 2 && i != 4) {
        const int local_face = (i == 1) ? 0 : (i == 5) ? 1 : (i == 7) ? 2 : 3;
        auto [a, b] = mesh.face_vertices(c, local_face);
        auto key = std::make_pair(std::min(a, b), std::max(a, b));
        auto [it, inserted] = edge_dof.emplace(key, next);
        if (inserted) ++next;
        slot = it->second;
        continue;
      }
      // Interior node.
      slot = next++;
    }
  }
  dh.n_scalar_ = next;
  return dh;
}

MappingConfig MappingConfig::eulerian(const DofHandler& dh, const Eigen::VectorXd& w,
                                      int geometry_degree) {
  MappingConfig cfg;
  cfg.kind = Kind::EulerianDisplaced;
  cfg.geometry_degree = geometry_degree;
  cfg.displacement_dofs = &dh;
  cfg.displacement = w.data();
  cfg.displacement_size = static_cast<int>(w.size());
  return cfg;
}

CellGeometry cell_geometry(const Mesh& mesh, int cell, int degree) {
  CellGeometry geo;
  geo.degree = degree;
  const auto& v = mesh.cell(cell);
  const Vec2 p0 = mesh.vertex(v[0]), p1 = mesh.vertex(v[1]), p2 = mesh.vertex(v[2]),
             p3 = mesh.vertex(v[3]);
  if (degree == 1) {
    geo.nodes[0] = p0;
    geo.nodes[1] = p1;
    geo.nodes[2] = p3;
    geo.nodes[3] = p2;
    return geo;
  }
  if (degree != 2) throw InvalidArgumentError("cell_geometry: degree must be 1 or 2");

  auto edge_node = [&](int local_face) {
    auto [a, b] = mesh.face_vertices(cell, local_face);
    Vec2 m = 0.5 * (mesh.vertex(a) + mesh.vertex(b));
    if (auto marker = mesh.boundary_marker(cell, local_face)) {
      if (const BoundaryCircle* bc = mesh.circle_for_marker(*marker)) {
        const Vec2 d = m - bc->center;
        const double len = d.norm();
        if (len > 0.0) m = bc->center + bc->radius / len * d;
      }
    }
    return m;
  };

  geo.nodes[0] = p0;
  geo.nodes[2] = p1;
  geo.nodes[8] = p2;
  geo.nodes[6] = p3;
  geo.nodes[1] = edge_node(0);
  geo.nodes[5] = edge_node(1);
  geo.nodes[7] = edge_node(2);
  geo.nodes[3] = edge_node(3);
  geo.nodes[4] = 0.5 * (geo.nodes[1] + geo.nodes[5] + geo.nodes[7] + geo.nodes[3]) -
                 0.25 * (p0 + p1 + p2 + p3);
  return geo;
}

namespace {

void check_displacement(const MappingConfig& cfg) {
  if (cfg.kind != MappingConfig::Kind::EulerianDisplaced) return;
  if (cfg.displacement_dofs == nullptr || cfg.displacement == nullptr)
    throw InvalidArgumentError("eulerian mapping requires a displacement vector");
  if (cfg.displacement_size != cfg.displacement_dofs->n_dofs())
    throw InvalidArgumentError("eulerian mapping: displacement vector has wrong length");
}

}  // namespace

Vec2 map_point(const Mesh& mesh, const MappingConfig& cfg, int cell, const Vec2& ref) {
  check_displacement(cfg);
  const CellGeometry geo = cell_geometry(mesh, cell, cfg.geometry_degree);
  const ReferenceElement geo_elem = ReferenceElement::lagrange(cfg.geometry_degree);
  Vec2 x = Vec2::Zero();
  for (int i = 0; i < geo_elem.n_basis(); ++i) x += geo_elem.shape_value(i, ref) * geo.nodes[i];
  if (cfg.kind == MappingConfig::Kind::EulerianDisplaced) {
    const DofHandler& dh = *cfg.displacement_dofs;
    const ReferenceElement& de = dh.element();
    for (int i = 0; i < de.n_basis(); ++i) {
      const double phi = de.shape_value(i, ref);
      const int sd = dh.cell_scalar_dof(cell, i);
      for (int comp = 0; comp < dh.components(); ++comp)
        x[comp] += phi * cfg.displacement[dh.global_dof(sd, comp)];
    }
  }
  return x;
}

MappingDerivatives mapping_jacobian(const Mesh& mesh, const MappingConfig& cfg, int cell,
                                    const Vec2& ref) {
  check_displacement(cfg);
  const CellGeometry geo = cell_geometry(mesh, cell, cfg.geometry_degree);
  const ReferenceElement geo_elem = ReferenceElement::lagrange(cfg.geometry_degree);
  Mat2 J = Mat2::Zero();
  for (int i = 0; i < geo_elem.n_basis(); ++i) {
    const Vec2 g = geo_elem.shape_gradient(i, ref);
    J += geo.nodes[i] * g.transpose();
  }
  if (cfg.kind == MappingConfig::Kind::EulerianDisplaced) {
    const DofHandler& dh = *cfg.displacement_dofs;
    const ReferenceElement& de = dh.element();
    for (int i = 0; i < de.n_basis(); ++i) {
      const Vec2 g = de.shape_gradient(i, ref);
      const int sd = dh.cell_scalar_dof(cell, i);
      for (int comp = 0; comp < dh.components(); ++comp)
        J.row(comp) += cfg.displacement[dh.global_dof(sd, comp)] * g.transpose();
    }
  }
  const double det = J.determinant();
  if (det <= 0.0)
    throw DegenerateMappingError("nonpositive mapping determinant in cell " +
                                 std::to_string(cell));
  return {J, det};
}

std::vector<Vec2> scalar_dof_support_points(const DofHandler& dh, int geometry_degree) {
  if (!dh.element().continuous())
    throw InvalidArgumentError("support points are defined for Lagrange elements only");
  std::vector<Vec2> points(dh.n_scalar_dofs());
  const Mesh& mesh = dh.mesh();
  const auto& nodes = dh.element().nodes();
  const MappingConfig cfg = MappingConfig::reference(geometry_degree);
  for (int c = 0; c < mesh.n_cells(); ++c)
    for (int i = 0; i < dh.element().n_basis(); ++i)
      points[dh.cell_scalar_dof(c, i)] = map_point(mesh, cfg, c, nodes[i]);
  return points;
}

}  // namespace ifem
