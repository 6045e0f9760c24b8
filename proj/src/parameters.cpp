#include "ifem/parameters.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "ifem/errors.hpp"
#include "ifem/expression.hpp"

namespace ifem {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string strip_spaces(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(),
                         [](unsigned char c) { return std::isspace(c); }),
          s.end());
  return s;
}

struct RawEntry {
  std::string value;
  int line;
  bool used = false;
};

// section -> key -> entry; the top level uses section "".
using RawTree = std::map<std::string, std::map<std::string, RawEntry>>;

RawTree parse_dialect(const std::string& text) {
  RawTree tree;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
    const std::string content = trim(line);
    if (content.empty()) continue;

    if (content.rfind("subsection", 0) == 0) {
      if (!section.empty())
        throw ParseError("parameter file: nested subsections are not supported", line_no);
      section = trim(content.substr(10));
      if (section.empty()) throw ParseError("parameter file: missing subsection name", line_no);
      continue;
    }
    if (content == "end") {
      if (section.empty())
        throw ParseError("parameter file: 'end' outside of a subsection", line_no);
      section.clear();
      continue;
    }
    if (content.rfind("set ", 0) == 0 || content == "set") {
      const std::string rest = trim(content.substr(3));
      const auto eq = rest.find('=');
      if (eq == std::string::npos)
        throw ParseError("parameter file: 'set' line without '='", line_no);
      const std::string key = trim(rest.substr(0, eq));
      const std::string value = trim(rest.substr(eq + 1));
      if (key.empty()) throw ParseError("parameter file: empty key", line_no);
      tree[section][key] = RawEntry{value, line_no, false};
      continue;
    }
    throw ParseError("parameter file: unrecognized line '" + content + "'", line_no);
  }
  if (!section.empty())
    throw ParseError("parameter file: subsection '" + section + "' is never closed", line_no);
  return tree;
}

class Reader {
 public:
  explicit Reader(RawTree& tree) : tree_(tree) {}

  void read(const std::string& section, const std::string& key, double& out) {
    if (RawEntry* e = find(section, key)) {
      try {
        std::size_t used = 0;
        out = std::stod(e->value, &used);
        if (used != e->value.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ParseError("parameter '" + key + "': expected a number, got '" + e->value + "'",
                         e->line);
      }
    }
  }

  void read(const std::string& section, const std::string& key, int& out) {
    if (RawEntry* e = find(section, key)) {
      try {
        std::size_t used = 0;
        out = std::stoi(e->value, &used);
        if (used != e->value.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ParseError("parameter '" + key + "': expected an integer, got '" + e->value + "'",
                         e->line);
      }
    }
  }

  void read(const std::string& section, const std::string& key, bool& out) {
    if (RawEntry* e = find(section, key)) {
      if (e->value == "true") out = true;
      else if (e->value == "false") out = false;
      else
        throw ParseError("parameter '" + key + "': expected true or false, got '" + e->value +
                             "'",
                         e->line);
    }
  }

  void read(const std::string& section, const std::string& key, std::string& out) {
    if (RawEntry* e = find(section, key)) out = e->value;
  }

  std::vector<std::string> unknown_keys() const {
    std::vector<std::string> out;
    for (const auto& [section, entries] : tree_)
      for (const auto& [key, e] : entries)
        if (!e.used)
          out.push_back("unknown parameter '" + (section.empty() ? key : section + "/" + key) +
                        "' (line " + std::to_string(e.line) + ") ignored");
    return out;
  }

 private:
  RawEntry* find(const std::string& section, const std::string& key) {
    auto s = tree_.find(section);
    if (s == tree_.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.used = true;
    return &k->second;
  }

  RawTree& tree_;
};

void read_function(Reader& reader, const std::string& section, FunctionSpec& spec) {
  reader.read(section, "Function constants", spec.constants);
  reader.read(section, "Function expression", spec.expression);
  reader.read(section, "Variable names", spec.variables);
  if (strip_spaces(spec.variables) != "x,y,t")
    throw InvalidArgumentError("subsection " + section +
                               ": only the variable names 'x,y,t' are supported");
}

}  // namespace

std::map<std::string, double> FunctionSpec::parsed_constants() const {
  std::map<std::string, double> out;
  const std::string text = trim(constants);
  if (text.empty()) return out;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ParseError("function constants: expected name=value, got '" + trim(item) + "'");
    const std::string name = trim(item.substr(0, eq));
    const std::string value = trim(item.substr(eq + 1));
    try {
      out[name] = std::stod(value);
    } catch (const std::exception&) {
      throw ParseError("function constants: bad value for '" + name + "'");
    }
  }
  return out;
}

void Parameters::validate() const {
  if (delta_t <= 0.0) throw InvalidArgumentError("Delta t must be positive");
  if (final_t < delta_t) throw InvalidArgumentError("Final t must be at least Delta t");
  if (output_interval < 1) throw InvalidArgumentError("output interval must be >= 1");
  if (newton_tolerance <= 0.0) throw InvalidArgumentError("Newton tolerance must be positive");
  if (newton_max_iterations < 1)
    throw InvalidArgumentError("Newton maximum iterations must be >= 1");
  if (density <= 0.0) throw InvalidArgumentError("Density must be positive");
  if (viscosity <= 0.0) throw InvalidArgumentError("Viscosity must be positive");
  if (elastic_modulus <= 0.0) throw InvalidArgumentError("Elastic modulus must be positive");
  if (phi_b <= 0.0) throw InvalidArgumentError("Phi_B must be positive");
  if (solid_model != "INH_0" && solid_model != "INH_1" &&
      solid_model != "CircumferentialFiberModel")
    throw InvalidArgumentError("unknown constitutive model '" + solid_model + "'");
  if (velocity_degree != 2)
    throw InvalidArgumentError(
        "velocity finite element degree must be 2 (inf-sup stability requires >= 2, higher "
        "degrees are not implemented)");
  if (pressure_family != "FE_DGP" && pressure_family != "FE_Q")
    throw InvalidArgumentError("pressure element must be FE_DGP or FE_Q");
  if (solid_refinement < 0 || fluid_refinement < 0)
    throw InvalidArgumentError("refinement levels must be >= 0");
  if (box_edge <= 0.0 || ring_inner_radius <= 0.0 || ring_width <= 0.0)
    throw InvalidArgumentError("ring geometry values must be positive");

  // Component counts: displacement-valued entries carry d components,
  // velocity/pressure-valued ones d or d+1 (the pressure slot is optional).
  const auto arity = [](const FunctionSpec& spec, const char* name, int lo, int hi) {
    const int n = Expression::parse(spec.expression, spec.parsed_constants()).components();
    if (n < lo || n > hi)
      throw InvalidArgumentError(std::string(name) + ": expected " + std::to_string(lo) +
                                 (hi > lo ? " or " + std::to_string(hi) : "") +
                                 " components, got " + std::to_string(n));
  };
  arity(w0, "W0", 2, 2);
  arity(force, "force", 2, 3);
  arity(u0, "u0", 2, 3);
  arity(ug, "ug", 2, 3);
}

ParameterReadResult parse_parameters(const std::string& text) {
  RawTree tree = parse_dialect(text);
  Reader reader(tree);
  ParameterReadResult result;
  Parameters& p = result.parameters;

  reader.read("", "Final t", p.final_t);
  reader.read("", "Delta t", p.delta_t);
  reader.read("", "Interval (of time-steps) between output", p.output_interval);
  reader.read("", "Force J update at step beginning", p.force_jacobian_each_step);
  reader.read("", "Update J cont", p.update_jacobian_every_iteration);
  reader.read("", "Semi-implicit scheme", p.semi_implicit);
  reader.read("", "Use spread operator", p.use_spread_operator);
  reader.read("", "Newton absolute tolerance", p.newton_tolerance);
  reader.read("", "Newton maximum iterations", p.newton_max_iterations);
  reader.read("", "Solid constitutive model", p.solid_model);
  reader.read("", "Density", p.density);
  reader.read("", "Viscosity", p.viscosity);
  reader.read("", "Elastic modulus", p.elastic_modulus);
  reader.read("", "Phi_B", p.phi_b);
  reader.read("", "Solid mesh", p.solid_mesh);
  reader.read("", "Solid refinement", p.solid_refinement);
  reader.read("", "Fluid mesh", p.fluid_mesh);
  reader.read("", "Fluid refinement", p.fluid_refinement);
  reader.read("", "All Dirichlet BC", p.all_dirichlet);
  reader.read("", "Dirichlet BC indicator", p.dirichlet_marker);
  reader.read("", "Velocity finite element degree", p.velocity_degree);
  reader.read("", "Finite element for pressure", p.pressure_family);
  reader.read("", "Fix one dof of p", p.fix_one_pressure_dof);
  reader.read("", "Output base name", p.output_name);

  const std::string ring = "Equilibrium Solution of Ring with Circumferential Fibers";
  reader.read(ring, "Any edge length of the (square) control volume", p.box_edge);
  reader.read(ring, "Inner radius of the ring", p.ring_inner_radius);
  reader.read(ring, "Width of the ring", p.ring_width);
  reader.read(ring, "x-coordinate of the center of the ring", p.ring_center_x);
  reader.read(ring, "y-coordinate of the center of the ring", p.ring_center_y);

  read_function(reader, "W0", p.w0);
  read_function(reader, "force", p.force);
  read_function(reader, "u0", p.u0);
  read_function(reader, "ug", p.ug);

  result.warnings = reader.unknown_keys();
  p.validate();
  return result;
}

namespace {

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(16);
  ss << v;
  return ss.str();
}

std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

void write_function(std::ostream& out, const std::string& name, const FunctionSpec& spec) {
  out << "subsection " << name << "\n"
      << "  set Function constants  = " << spec.constants << "\n"
      << "  set Function expression = " << spec.expression << "\n"
      << "  set Variable names      = " << spec.variables << "\n"
      << "end\n";
}

}  // namespace

std::string serialize_parameters(const Parameters& p) {
  std::ostringstream out;
  out << "# Listing of Parameters\n"
      << "# ---------------------\n\n";
  out << "# Time stepping\n"
      << "set Final t                                 = " << fmt(p.final_t) << "\n"
      << "set Delta t                                 = " << fmt(p.delta_t) << "\n"
      << "set Interval (of time-steps) between output = " << fmt(p.output_interval) << "\n\n";
  out << "# Nonlinear solver\n"
      << "set Force J update at step beginning        = " << fmt(p.force_jacobian_each_step)
      << "\n"
      << "set Update J cont                           = "
      << fmt(p.update_jacobian_every_iteration) << "\n"
      << "set Semi-implicit scheme                    = " << fmt(p.semi_implicit) << "\n"
      << "set Use spread operator                     = " << fmt(p.use_spread_operator) << "\n"
      << "set Newton absolute tolerance               = " << fmt(p.newton_tolerance) << "\n"
      << "set Newton maximum iterations               = " << fmt(p.newton_max_iterations)
      << "\n\n";
  out << "# Constitutive models: INH_0 (P^e = mu (F - F^-T)), INH_1 (P^e = mu F),\n"
      << "# CircumferentialFiberModel (annular solid with inextensible\n"
      << "# circumferential fibers)\n"
      << "set Solid constitutive model                = " << p.solid_model << "\n"
      << "set Density                                 = " << fmt(p.density) << "\n"
      << "set Viscosity                               = " << fmt(p.viscosity) << "\n"
      << "set Elastic modulus                         = " << fmt(p.elastic_modulus) << "\n"
      << "# Dimensional constant for the velocity coupling equation\n"
      << "set Phi_B                                   = " << fmt(p.phi_b) << "\n\n";
  out << "# Solid mesh information\n"
      << "set Solid mesh                              = " << p.solid_mesh << "\n"
      << "set Solid refinement                        = " << fmt(p.solid_refinement) << "\n\n";
  out << "# Fluid mesh information\n"
      << "set Fluid mesh                              = " << p.fluid_mesh << "\n"
      << "set Fluid refinement                        = " << fmt(p.fluid_refinement) << "\n"
      << "set All Dirichlet BC                        = " << fmt(p.all_dirichlet) << "\n"
      << "set Dirichlet BC indicator                  = " << fmt(p.dirichlet_marker) << "\n"
      << "set Velocity finite element degree          = " << fmt(p.velocity_degree) << "\n"
      << "# FE_Q: continuous Lagrange pressure; FE_DGP: discontinuous Legendre pressure\n"
      << "set Finite element for pressure             = " << p.pressure_family << "\n"
      << "set Fix one dof of p                        = " << fmt(p.fix_one_pressure_dof)
      << "\n\n";
  out << "# Base name used for the output files\n"
      << "set Output base name                        = " << p.output_name << "\n\n";
  out << "# Used when the constitutive model is CircumferentialFiberModel, and as\n"
      << "# the geometry of generated grids\n"
      << "subsection Equilibrium Solution of Ring with Circumferential Fibers\n"
      << "  set Any edge length of the (square) control volume = " << fmt(p.box_edge) << "\n"
      << "  set Inner radius of the ring                       = " << fmt(p.ring_inner_radius)
      << "\n"
      << "  set Width of the ring                              = " << fmt(p.ring_width) << "\n"
      << "  set x-coordinate of the center of the ring         = " << fmt(p.ring_center_x)
      << "\n"
      << "  set y-coordinate of the center of the ring         = " << fmt(p.ring_center_y)
      << "\n"
      << "end\n\n";
  out << "# Initial solid displacement\n";
  write_function(out, "W0", p.w0);
  out << "\n# Body force\n";
  write_function(out, "force", p.force);
  out << "\n# Initial velocity and pressure\n";
  write_function(out, "u0", p.u0);
  out << "\n# Dirichlet boundary values\n";
  write_function(out, "ug", p.ug);
  return out.str();
}

}  // namespace ifem
