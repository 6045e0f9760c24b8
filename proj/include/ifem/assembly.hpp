#ifndef IFEM_ASSEMBLY_HPP
#define IFEM_ASSEMBLY_HPP

#include <Eigen/SparseCholesky>
#include <functional>
#include <optional>
#include <vector>

#include "ifem/constitutive.hpp"
#include "ifem/expression.hpp"
#include "ifem/fem.hpp"
#include "ifem/linear_algebra.hpp"
#include "ifem/mesh.hpp"
#include "ifem/point_location.hpp"
#include "ifem/system_state.hpp"

namespace ifem {

struct PhysicalConstants {
  double density = 1.0;                  // rho, shared by fluid and solid
  double solid_reference_density = 1.0;  // rho_s0, defaults to rho
  double viscosity = 1.0;                // mu
  double phi_b = 1.0;                    // scaling of the velocity coupling row
  Expression body_force;                 // b; empty means zero
  Expression dirichlet_values;           // u_g; empty means zero
  Expression neumann_traction;           // tau_g; empty means zero
};

struct AssemblyOptions {
  bool semi_implicit = true;
  bool use_spread_operator = true;
  bool all_dirichlet = true;
  int dirichlet_marker = 1;
  bool fix_one_pressure_dof = false;
  int fluid_quad_points = 3;  // per direction
  int solid_quad_points = 3;
};

struct FsiConfig {
  int velocity_degree = 2;
  ElementFamily pressure_family = ElementFamily::LegendrePDiscontinuous;
  PhysicalConstants constants;
  SolidModel model;
  AssemblyOptions options;
};

// Assembly context for the coupled problem: dof layout, precomputed element
// data on both meshes, the point-location index, the solid mass matrix, and
// the residual/Jacobian/coupling operators built on top of them.
//
// Fluid block layout: velocity dofs (component-major) then pressure dofs.
// Solid block: displacement dofs (component-major).
class FsiSystem {
 public:
  FsiSystem(const Mesh& fluid_mesh, const Mesh& solid_mesh, FsiConfig config);

  const Mesh& fluid_mesh() const { return *fluid_mesh_; }
  const Mesh& solid_mesh() const { return *solid_mesh_; }
  const DofHandler& velocity_dofs() const { return dh_velocity_; }
  const DofHandler& pressure_dofs() const { return dh_pressure_; }
  const DofHandler& solid_dofs() const { return dh_solid_; }
  const FsiConfig& config() const { return config_; }
  const PhysicalConstants& constants() const { return config_.constants; }
  const AssemblyOptions& options() const { return config_.options; }
  const SolidModel& model() const { return config_.model; }
  AssemblyOptions& mutable_options() { return config_.options; }

  int n_velocity() const { return dh_velocity_.n_dofs(); }
  int n_pressure() const { return dh_pressure_.n_dofs(); }
  int n_fluid() const { return n_velocity() + n_pressure(); }
  int n_solid() const { return dh_solid_.n_dofs(); }

  BlockedVector make_vector() const { return BlockedVector(n_fluid(), n_solid()); }

  // Interpolates initial data: u0 carries velocity (+ optional pressure)
  // components, w0 the solid displacement.
  BlockedVector interpolate_initial(const Expression& u0, const Expression& w0) const;

  // Coupling sparsity for the configuration displacement w, plus the
  // uncoupled fluid/fluid and solid/solid patterns. Values start at zero.
  BlockedSparseMatrix build_sparsity(const Eigen::VectorXd& w) const;

  // Nonlinear residual G(xi) of the implicit-Euler step (time derivative
  // (xi - previous_xi)/dt). Dirichlet and pressure-pin rows are NOT yet
  // replaced; see apply_constraints.
  BlockedVector assemble_residual(const SystemState& state);

  // Approximate Jacobian dG/dxi + alpha dG/dxi' of the residual in which the
  // elastic force is realized through the change-of-variable form; exact in
  // semi-implicit mode, and omitting the derivatives through the frozen
  // change-of-variable displacement otherwise.
  BlockedSparseMatrix assemble_jacobian(const SystemState& state, double alpha);

  // Replaces Dirichlet velocity rows by (xi_i - g_i(t)) with identity matrix
  // rows, and pins one pressure dof whenever the whole boundary is Dirichlet
  // (removing the constant-pressure null space). matrix may be null.
  void apply_constraints(BlockedSparseMatrix* matrix, BlockedVector& residual,
                         const BlockedVector& xi, double t) const;

  // Elastic momentum force through the interpolation/spread factorization:
  // returns M_g1(h)^T M_g3^{-1} A_g(w) over the fluid block (velocity rows).
  Eigen::VectorXd assemble_spread_elastic_force(const Eigen::VectorXd& w,
                                                const Eigen::VectorXd& h);

  // The same force assembled directly from the change-of-variable integral.
  Eigen::VectorXd assemble_direct_elastic_force(const Eigen::VectorXd& w,
                                                const Eigen::VectorXd& h);

  // Lagrangian elastic operator A_g(w): dual vector over the solid block.
  Eigen::VectorXd lagrangian_elastic_force(const Eigen::VectorXd& w) const;

  // M_g1(h) u: variational interpolation of the fluid velocity onto the
  // solid test space (velocity coupling rows, without the time-derivative
  // part).
  Eigen::VectorXd interpolation_apply(const Eigen::VectorXd& fluid_coeffs,
                                      const Eigen::VectorXd& h);

  // M_g3 w (includes Phi_B).
  Eigen::VectorXd solid_mass_apply(const Eigen::VectorXd& w) const;
  const Eigen::SparseMatrix<double>& solid_mass_matrix() const { return solid_mass_; }

  // Continuity rows -integral(q div u) for all pressure test functions,
  // without any pin replacement.
  Eigen::VectorXd continuity_residual(const Eigen::VectorXd& fluid_coeffs) const;

  // Plain velocity mass matrix (no density factor), e.g. for dual norms.
  Eigen::SparseMatrix<double> velocity_mass_matrix() const;

  double pressure_mean(const Eigen::VectorXd& fluid_coeffs) const;
  void shift_pressure_to_zero_mean(BlockedVector& xi) const;
  double fluid_area() const { return fluid_area_; }

  bool pressure_pin_active() const { return pin_pressure_; }
  // Global fluid-block index of the pinned pressure dof.
  int pinned_pressure_dof() const { return n_velocity() + pinned_scalar_; }

  // Quadrature samples of the fluid fields, for error norms and reports.
  struct FluidSample {
    Vec2 x;
    double jxw;
    Vec2 u;
    Mat2 grad_u;  // grad_u(i,j) = du_i/dx_j
    double p;
  };
  void for_each_fluid_sample(const Eigen::VectorXd& fluid_coeffs, int quad_points_per_dir,
                             const std::function<void(const FluidSample&)>& f) const;

  // Quadrature samples of the solid deformation for a displacement w.
  struct SolidSample {
    Vec2 s;       // reference position
    double jxw;   // reference measure
    Mat2 F;
    double det_f;
  };
  void for_each_solid_sample(const Eigen::VectorXd& w,
                             const std::function<void(const SolidSample&)>& f) const;

 private:
  struct FluidCellData {
    std::vector<double> jxw;
    std::vector<Vec2> x;
    std::vector<Vec2> grad_v;  // [qp * nb_v + i], physical
  };
  struct SolidCellData {
    CellGeometry geo;
    std::vector<double> jxw;
    std::vector<Vec2> s;
    std::vector<Vec2> grad_s;  // [qp * nb_s + i], physical w.r.t. reference config
  };
  struct NeumannFaceData {
    std::vector<Vec2> x;
    std::vector<double> jxw;
    std::vector<Vec2> normal;
    std::vector<double> values;  // [qp * nb_v + i] velocity shape values
  };
  struct DirichletDof {
    int fluid_index;  // global index in the fluid block
    int component;
    Vec2 point;
  };

  struct CouplingGroup {
    int fluid_cell;
    std::vector<int> qs;
    std::vector<Vec2> ref;
  };
  struct CouplingCache {
    bool valid = false;
    Eigen::VectorXd h;
    std::vector<std::vector<CouplingGroup>> groups;  // per solid cell
  };

  void build_fluid_data();
  void build_solid_data();
  void build_dirichlet_dofs();
  void build_solid_mass();
  const CouplingCache& coupling(const Eigen::VectorXd& h);

  // Displacement value at a solid quadrature point.
  Vec2 solid_field_value(const Eigen::VectorXd& w, int cell, int qs) const;
  Mat2 solid_field_gradient(const Eigen::VectorXd& w, int cell, int qs) const;

  const Mesh* fluid_mesh_;
  const Mesh* solid_mesh_;
  FsiConfig config_;

  DofHandler dh_velocity_, dh_pressure_, dh_solid_;
  QuadratureRule fluid_quad_, solid_quad_;
  std::vector<double> vel_values_, p_values_, solid_values_;  // [qp * nb + i]
  std::vector<FluidCellData> fluid_cells_;
  std::vector<SolidCellData> solid_cells_;
  std::vector<NeumannFaceData> neumann_faces_;
  std::vector<DirichletDof> dirichlet_dofs_;
  bool pin_pressure_ = false;
  int pinned_scalar_ = 0;
  double fluid_area_ = 0.0;

  CellLocator locator_;
  Eigen::SparseMatrix<double> solid_mass_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solid_mass_ldlt_;
  CouplingCache coupling_cache_;
};

}  // namespace ifem

#endif
