#ifndef IFEM_PARAMETERS_HPP
#define IFEM_PARAMETERS_HPP

#include <map>
#include <string>
#include <vector>

namespace ifem {

// One of the expression-valued entries (initial data, boundary data, forcing).
struct FunctionSpec {
  std::string constants;   // "a=1, b=2" style symbol definitions
  std::string expression;  // semicolon-separated components
  std::string variables = "x,y,t";

  std::map<std::string, double> parsed_constants() const;
};

// Run configuration. Defaults mirror the shipped default parameter file.
struct Parameters {
  // Time stepping
  double final_t = 1.0;
  double delta_t = 0.1;
  int output_interval = 1;

  // Nonlinear solver
  bool force_jacobian_each_step = false;
  bool update_jacobian_every_iteration = false;
  bool semi_implicit = true;
  bool use_spread_operator = true;
  double newton_tolerance = 1e-10;
  int newton_max_iterations = 20;

  // Constitutive data
  std::string solid_model = "INH_0";  // INH_0 | INH_1 | CircumferentialFiberModel
  double density = 1.0;
  double viscosity = 1.0;
  double elastic_modulus = 1.0;
  double phi_b = 1.0;

  // Meshes. A path is read as a UCD file; the forms generate:square,
  // generate:annulus and generate:disk(cx,cy,r) build the grids directly
  // (square and annulus take their dimensions from the ring subsection).
  std::string solid_mesh = "meshes/solid_square.inp";
  int solid_refinement = 1;
  std::string fluid_mesh = "meshes/fluid_square.inp";
  int fluid_refinement = 4;

  // Boundary conditions and spaces
  bool all_dirichlet = true;
  int dirichlet_marker = 1;
  int velocity_degree = 2;
  std::string pressure_family = "FE_DGP";  // FE_DGP | FE_Q
  bool fix_one_pressure_dof = false;

  std::string output_name = "out/square";

  // Ring geometry (also the control-volume edge length for generated grids)
  double box_edge = 1.0;
  double ring_inner_radius = 0.25;
  double ring_width = 0.0625;
  double ring_center_x = 0.5;
  double ring_center_y = 0.5;

  FunctionSpec w0{.constants = "", .expression = "0; 0"};
  FunctionSpec force{.constants = "", .expression = "0; 0; 0"};
  FunctionSpec u0{.constants = "", .expression = "0; 0; 0"};
  FunctionSpec ug{.constants = "", .expression = "if(y>.99, 1, 0); 0; 0"};

  // Throws InvalidArgumentError when a value violates its contract.
  void validate() const;
};

struct ParameterReadResult {
  Parameters parameters;
  std::vector<std::string> warnings;  // unknown keys and other non-fatal notes
};

ParameterReadResult parse_parameters(const std::string& text);

// Canonical text form; parsing it back reproduces the same values.
std::string serialize_parameters(const Parameters& p);

}  // namespace ifem

#endif
