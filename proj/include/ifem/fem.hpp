#ifndef IFEM_FEM_HPP
#define IFEM_FEM_HPP

#include <array>
#include <vector>

#include "ifem/geometry.hpp"
#include "ifem/mesh.hpp"

namespace ifem {

enum class ElementFamily { LagrangeQ, LegendrePDiscontinuous };

// Scalar element on the reference square [0,1]^2. Lagrange bases are nodal on
// the tensor grid of degree+1 points per direction (lexicographic, x fastest);
// the discontinuous Legendre element of degree 1 has the three per-cell modes
// {1, x-1/2, y-1/2}.
class ReferenceElement {
 public:
  static ReferenceElement lagrange(int degree);
  static ReferenceElement legendre_discontinuous(int degree);

  ElementFamily family() const { return family_; }
  int degree() const { return degree_; }
  int n_basis() const { return n_basis_; }
  bool continuous() const { return family_ == ElementFamily::LagrangeQ; }

  double shape_value(int i, const Vec2& p) const;
  Vec2 shape_gradient(int i, const Vec2& p) const;

  // Nodal points (empty for the discontinuous family).
  const std::vector<Vec2>& nodes() const { return nodes_; }

  // Scalar basis indices whose nodes lie on a local face (Lagrange only).
  std::vector<int> face_nodes(int local_face) const;

 private:
  ReferenceElement(ElementFamily family, int degree);

  ElementFamily family_;
  int degree_;
  int n_basis_;
  std::vector<Vec2> nodes_;
};

struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(points.size()); }
};

// Tensor-product Gauss-Legendre rule on [0,1]^2 with n points per direction.
QuadratureRule gauss_rule(int points_per_direction);

// 1D Gauss-Legendre points and weights on [0,1].
void gauss_rule_1d(int n, std::vector<double>& points, std::vector<double>& weights);

// Global numbering of a (possibly vector-valued) field over a mesh. Vector
// fields are stacked scalar fields: global dof = comp * n_scalar + scalar.
class DofHandler {
 public:
  DofHandler() = default;

  const Mesh& mesh() const { return *mesh_; }
  const ReferenceElement& element() const { return element_; }
  int components() const { return components_; }
  int n_scalar_dofs() const { return n_scalar_; }
  int n_dofs() const { return components_ * n_scalar_; }

  int cell_scalar_dof(int cell, int local) const {
    return cell_scalar_[cell * element_.n_basis() + local];
  }
  int global_dof(int scalar_dof, int comp) const { return comp * n_scalar_ + scalar_dof; }
  // Local index within a cell runs over comp-major blocks of the scalar basis.
  int dofs_per_cell() const { return components_ * element_.n_basis(); }
  int cell_dof(int cell, int local) const {
    const int nb = element_.n_basis();
    return global_dof(cell_scalar_dof(cell, local % nb), local / nb);
  }

  friend DofHandler distribute_dofs(const Mesh&, const ReferenceElement&, int);

 private:
  const Mesh* mesh_ = nullptr;
  ReferenceElement element_ = ReferenceElement::lagrange(1);
  int components_ = 1;
  int n_scalar_ = 0;
  std::vector<int> cell_scalar_;
};

DofHandler distribute_dofs(const Mesh& mesh, const ReferenceElement& elem, int components);

// Geometric description of one cell: bilinear from the mesh vertices, or
// quadratic with boundary edge nodes projected onto attached circles and a
// serendipity interior node.
struct CellGeometry {
  int degree = 1;
  std::array<Vec2, 9> nodes;  // lexicographic; first 4 used when degree == 1
};

CellGeometry cell_geometry(const Mesh& mesh, int cell, int degree);

struct MappingConfig {
  enum class Kind { IsoparametricReference, EulerianDisplaced };

  Kind kind = Kind::IsoparametricReference;
  int geometry_degree = 1;
  // Required for EulerianDisplaced: the displacement field over the mesh.
  const DofHandler* displacement_dofs = nullptr;
  const double* displacement = nullptr;
  int displacement_size = 0;

  static MappingConfig reference(int geometry_degree = 1) {
    return {Kind::IsoparametricReference, geometry_degree, nullptr, nullptr, 0};
  }
  static MappingConfig eulerian(const DofHandler& dh, const Eigen::VectorXd& w,
                                int geometry_degree);
};

Vec2 map_point(const Mesh& mesh, const MappingConfig& cfg, int cell, const Vec2& ref);

struct MappingDerivatives {
  Mat2 jacobian;  // d(physical)/d(reference)
  double det;
};

// Throws DegenerateMappingError when the determinant is not positive.
MappingDerivatives mapping_jacobian(const Mesh& mesh, const MappingConfig& cfg, int cell,
                                    const Vec2& ref);

// Physical positions of the scalar dofs of a Lagrange handler, following the
// given geometry degree (so boundary-snapped cells place their face nodes on
// the circle).
std::vector<Vec2> scalar_dof_support_points(const DofHandler& dh, int geometry_degree);

}  // namespace ifem

#endif
