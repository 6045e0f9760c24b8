#include "ifem/assembly.hpp"

#include <array>
#include <cmath>

#include "ifem/errors.hpp"

namespace ifem {

namespace {

Vec2 eval_vec2(const Expression& e, const Vec2& x, double t) {
  if (e.components() == 0) return Vec2::Zero();
  return Vec2(e.evaluate(0, x.x(), x.y(), t), e.evaluate(1, x.x(), x.y(), t));
}

// Values and physical gradients of a scalar element at one reference point.
struct PointBasis {
  int nb = 0;
  std::array<double, 9> val{};
  std::array<Vec2, 9> grad{};
};

}  // namespace

FsiSystem::FsiSystem(const Mesh& fluid_mesh, const Mesh& solid_mesh, FsiConfig config)
    : fluid_mesh_(&fluid_mesh),
      solid_mesh_(&solid_mesh),
      config_(std::move(config)),
      locator_(fluid_mesh) {
  const int deg = config_.velocity_degree;
  if (deg != 2) throw InvalidArgumentError("only velocity degree 2 is implemented");

  const ReferenceElement vel_elem = ReferenceElement::lagrange(deg);
  const ReferenceElement p_elem = config_.pressure_family == ElementFamily::LagrangeQ
                                      ? ReferenceElement::lagrange(deg - 1)
                                      : ReferenceElement::legendre_discontinuous(deg - 1);
  dh_velocity_ = distribute_dofs(fluid_mesh, vel_elem, 2);
  dh_pressure_ = distribute_dofs(fluid_mesh, p_elem, 1);
  dh_solid_ = distribute_dofs(solid_mesh, vel_elem, 2);

  fluid_quad_ = gauss_rule(config_.options.fluid_quad_points);
  solid_quad_ = gauss_rule(config_.options.solid_quad_points);

  if (config_.constants.solid_reference_density <= 0.0)
    config_.constants.solid_reference_density = config_.constants.density;

  build_fluid_data();
  build_solid_data();
  build_dirichlet_dofs();
  build_solid_mass();
}

void FsiSystem::build_fluid_data() {
  const ReferenceElement& ve = dh_velocity_.element();
  const ReferenceElement& pe = dh_pressure_.element();
  const int nq = fluid_quad_.size();
  const int nbv = ve.n_basis();
  const int nbp = pe.n_basis();

  vel_values_.resize(static_cast<std::size_t>(nq) * nbv);
  p_values_.resize(static_cast<std::size_t>(nq) * nbp);
  std::vector<Vec2> vel_ref_grads(static_cast<std::size_t>(nq) * nbv);
  for (int q = 0; q < nq; ++q) {
    for (int i = 0; i < nbv; ++i) {
      vel_values_[q * nbv + i] = ve.shape_value(i, fluid_quad_.points[q]);
      vel_ref_grads[q * nbv + i] = ve.shape_gradient(i, fluid_quad_.points[q]);
    }
    for (int i = 0; i < nbp; ++i) p_values_[q * nbp + i] = pe.shape_value(i, fluid_quad_.points[q]);
  }

  const MappingConfig ref_cfg = MappingConfig::reference(1);
  fluid_cells_.resize(fluid_mesh_->n_cells());
  fluid_area_ = 0.0;
  for (int c = 0; c < fluid_mesh_->n_cells(); ++c) {
    FluidCellData& data = fluid_cells_[c];
    data.jxw.resize(nq);
    data.x.resize(nq);
    data.grad_v.resize(static_cast<std::size_t>(nq) * nbv);
    for (int q = 0; q < nq; ++q) {
      const Vec2& rq = fluid_quad_.points[q];
      const MappingDerivatives md = mapping_jacobian(*fluid_mesh_, ref_cfg, c, rq);
      const Mat2 invT = md.jacobian.inverse().transpose();
      data.jxw[q] = md.det * fluid_quad_.weights[q];
      data.x[q] = map_point(*fluid_mesh_, ref_cfg, c, rq);
      for (int i = 0; i < nbv; ++i) data.grad_v[q * nbv + i] = invT * vel_ref_grads[q * nbv + i];
      fluid_area_ += data.jxw[q];
    }
  }

  // Neumann faces (those not covered by the Dirichlet settings) with a 1D
  // Gauss rule of velocity_degree + 1 points.
  const AssemblyOptions& opts = config_.options;
  std::vector<double> pts_1d, wts_1d;
  gauss_rule_1d(config_.velocity_degree + 1, pts_1d, wts_1d);
  const int nql = static_cast<int>(pts_1d.size());
  for (const BoundaryFace& bf : fluid_mesh_->boundary_faces()) {
    const bool dirichlet = opts.all_dirichlet || bf.marker == opts.dirichlet_marker;
    if (dirichlet) continue;
    NeumannFaceData face;
    face.x.resize(nql);
    face.jxw.resize(nql);
    face.normal.resize(nql);
    face.values.resize(static_cast<std::size_t>(nql) * nbv);
    auto [a, b] = fluid_mesh_->face_vertices(bf.cell, bf.local_face);
    const Vec2 pa = fluid_mesh_->vertex(a), pb = fluid_mesh_->vertex(b);
    const Vec2 tangent = pb - pa;
    for (int q = 0; q < nql; ++q) {
      const double s = pts_1d[q];
      face.x[q] = (1.0 - s) * pa + s * pb;
      // Faces run counterclockwise around the cell, so this is outward.
      face.normal[q] = Vec2(tangent.y(), -tangent.x()).normalized();
      face.jxw[q] = wts_1d[q] * tangent.norm();
      Vec2 ref;
      switch (bf.local_face) {
        case 0: ref = Vec2(s, 0.0); break;
        case 1: ref = Vec2(1.0, s); break;
        case 2: ref = Vec2(1.0 - s, 1.0); break;
        default: ref = Vec2(0.0, 1.0 - s); break;
      }
      for (int i = 0; i < nbv; ++i)
        face.values[q * nbv + i] = dh_velocity_.element().shape_value(i, ref);
    }
    neumann_faces_.push_back(std::move(face));
  }

  pin_pressure_ = neumann_faces_.empty();
  pinned_scalar_ = 0;  // lowest global index of the constant mode in both families
}

void FsiSystem::build_solid_data() {
  const ReferenceElement& se = dh_solid_.element();
  const int nq = solid_quad_.size();
  const int nbs = se.n_basis();

  solid_values_.resize(static_cast<std::size_t>(nq) * nbs);
  std::vector<Vec2> ref_grads(static_cast<std::size_t>(nq) * nbs);
  for (int q = 0; q < nq; ++q)
    for (int i = 0; i < nbs; ++i) {
      solid_values_[q * nbs + i] = se.shape_value(i, solid_quad_.points[q]);
      ref_grads[q * nbs + i] = se.shape_gradient(i, solid_quad_.points[q]);
    }

  const int geo_degree = se.degree();
  const ReferenceElement geo_elem = ReferenceElement::lagrange(geo_degree);
  solid_cells_.resize(solid_mesh_->n_cells());
  for (int c = 0; c < solid_mesh_->n_cells(); ++c) {
    SolidCellData& data = solid_cells_[c];
    data.geo = cell_geometry(*solid_mesh_, c, geo_degree);
    data.jxw.resize(nq);
    data.s.resize(nq);
    data.grad_s.resize(static_cast<std::size_t>(nq) * nbs);
    for (int q = 0; q < nq; ++q) {
      const Vec2& rq = solid_quad_.points[q];
      Mat2 J = Mat2::Zero();
      Vec2 x = Vec2::Zero();
      for (int i = 0; i < geo_elem.n_basis(); ++i) {
        J += data.geo.nodes[i] * geo_elem.shape_gradient(i, rq).transpose();
        x += geo_elem.shape_value(i, rq) * data.geo.nodes[i];
      }
      const double det = J.determinant();
      if (det <= 0.0)
        throw DegenerateMappingError("solid cell " + std::to_string(c) +
                                     " has a nonpositive geometry determinant");
      const Mat2 invT = J.inverse().transpose();
      data.jxw[q] = det * solid_quad_.weights[q];
      data.s[q] = x;
      for (int i = 0; i < nbs; ++i) data.grad_s[q * nbs + i] = invT * ref_grads[q * nbs + i];
    }
  }
}

void FsiSystem::build_dirichlet_dofs() {
  const AssemblyOptions& opts = config_.options;
  const ReferenceElement& ve = dh_velocity_.element();
  const MappingConfig ref_cfg = MappingConfig::reference(1);
  std::vector<char> seen(dh_velocity_.n_dofs(), 0);
  for (const BoundaryFace& bf : fluid_mesh_->boundary_faces()) {
    const bool dirichlet = opts.all_dirichlet || bf.marker == opts.dirichlet_marker;
    if (!dirichlet) continue;
    for (int node : ve.face_nodes(bf.local_face)) {
      const int scalar = dh_velocity_.cell_scalar_dof(bf.cell, node);
      const Vec2 point = map_point(*fluid_mesh_, ref_cfg, bf.cell, ve.nodes()[node]);
      for (int comp = 0; comp < 2; ++comp) {
        const int dof = dh_velocity_.global_dof(scalar, comp);
        if (seen[dof]) continue;
        seen[dof] = 1;
        dirichlet_dofs_.push_back({dof, comp, point});
      }
    }
  }
}

void FsiSystem::build_solid_mass() {
  const int nbs = dh_solid_.element().n_basis();
  const int nq = solid_quad_.size();
  const double phi = config_.constants.phi_b;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(solid_mesh_->n_cells()) * nbs * nbs * 2);
  for (int c = 0; c < solid_mesh_->n_cells(); ++c) {
    const SolidCellData& data = solid_cells_[c];
    for (int i = 0; i < nbs; ++i)
      for (int j = 0; j < nbs; ++j) {
        double m = 0.0;
        for (int q = 0; q < nq; ++q)
          m += solid_values_[q * nbs + i] * solid_values_[q * nbs + j] * data.jxw[q];
        m *= phi;
        for (int comp = 0; comp < 2; ++comp)
          triplets.emplace_back(
              dh_solid_.global_dof(dh_solid_.cell_scalar_dof(c, i), comp),
              dh_solid_.global_dof(dh_solid_.cell_scalar_dof(c, j), comp), m);
      }
  }
  solid_mass_.resize(n_solid(), n_solid());
  solid_mass_.setFromTriplets(triplets.begin(), triplets.end());
  solid_mass_ldlt_.compute(solid_mass_);
  if (solid_mass_ldlt_.info() != Eigen::Success)
    throw SingularMatrixError("solid mass matrix factorization failed");
}

Vec2 FsiSystem::solid_field_value(const Eigen::VectorXd& w, int cell, int qs) const {
  const int nbs = dh_solid_.element().n_basis();
  Vec2 v = Vec2::Zero();
  for (int i = 0; i < nbs; ++i) {
    const double phi = solid_values_[qs * nbs + i];
    const int sd = dh_solid_.cell_scalar_dof(cell, i);
    v.x() += phi * w[dh_solid_.global_dof(sd, 0)];
    v.y() += phi * w[dh_solid_.global_dof(sd, 1)];
  }
  return v;
}

Mat2 FsiSystem::solid_field_gradient(const Eigen::VectorXd& w, int cell, int qs) const {
  const int nbs = dh_solid_.element().n_basis();
  const SolidCellData& data = solid_cells_[cell];
  Mat2 g = Mat2::Zero();
  for (int i = 0; i < nbs; ++i) {
    const Vec2& gs = data.grad_s[qs * nbs + i];
    const int sd = dh_solid_.cell_scalar_dof(cell, i);
    g.row(0) += w[dh_solid_.global_dof(sd, 0)] * gs.transpose();
    g.row(1) += w[dh_solid_.global_dof(sd, 1)] * gs.transpose();
  }
  return g;
}

const FsiSystem::CouplingCache& FsiSystem::coupling(const Eigen::VectorXd& h) {
  if (h.size() != n_solid())
    throw InvalidArgumentError("coupling: configuration displacement has wrong length");
  if (coupling_cache_.valid && coupling_cache_.h.size() == h.size() && coupling_cache_.h == h)
    return coupling_cache_;

  coupling_cache_.valid = false;
  coupling_cache_.h = h;
  coupling_cache_.groups.assign(solid_mesh_->n_cells(), {});

  const int nq = solid_quad_.size();
  int hint = -1;
  for (int c = 0; c < solid_mesh_->n_cells(); ++c) {
    auto& groups = coupling_cache_.groups[c];
    for (int qs = 0; qs < nq; ++qs) {
      const Vec2 x = solid_cells_[c].s[qs] + solid_field_value(h, c, qs);
      int cell;
      Vec2 ref;
      try {
        std::tie(cell, ref) = locator_.locate(x, hint);
      } catch (const PointOutsideDomainError&) {
        throw PointOutsideDomainError(
            "a displaced solid quadrature point left the control volume (solid cell " +
                std::to_string(c) + ", point " + std::to_string(qs) + ")",
            static_cast<std::size_t>(c) * nq + qs);
      }
      hint = cell;
      CouplingGroup* group = nullptr;
      for (auto& g : groups)
        if (g.fluid_cell == cell) {
          group = &g;
          break;
        }
      if (group == nullptr) {
        groups.push_back({cell, {}, {}});
        group = &groups.back();
      }
      group->qs.push_back(qs);
      group->ref.push_back(ref);
    }
  }
  coupling_cache_.valid = true;
  return coupling_cache_;
}

BlockedSparseMatrix FsiSystem::build_sparsity(const Eigen::VectorXd& w) const {
  // The coupling search is shared with residual/Jacobian assembly through
  // the cache; build_sparsity is conceptually const.
  FsiSystem& self = const_cast<FsiSystem&>(*this);
  const CouplingCache& cache = self.coupling(w);

  const int n_f = n_fluid();
  const int n_s = n_solid();
  const int n_u = n_velocity();
  const int nbv = dh_velocity_.element().n_basis();
  const int nbp = dh_pressure_.element().n_basis();
  const int nbs = dh_solid_.element().n_basis();

  std::vector<std::vector<int>> ff(n_f), fs(n_f), sf(n_s), ss(n_s);

  std::vector<int> fluid_dofs(2 * nbv + nbp);
  auto gather_fluid = [&](int c) {
    int k = 0;
    for (int comp = 0; comp < 2; ++comp)
      for (int i = 0; i < nbv; ++i)
        fluid_dofs[k++] = dh_velocity_.global_dof(dh_velocity_.cell_scalar_dof(c, i), comp);
    for (int i = 0; i < nbp; ++i)
      fluid_dofs[k++] = n_u + dh_pressure_.cell_scalar_dof(c, i);
  };

  for (int c = 0; c < fluid_mesh_->n_cells(); ++c) {
    gather_fluid(c);
    for (int a : fluid_dofs)
      for (int b : fluid_dofs) ff[a].push_back(b);
  }

  std::vector<int> solid_dofs(2 * nbs);
  auto gather_solid = [&](int c) {
    int k = 0;
    for (int comp = 0; comp < 2; ++comp)
      for (int i = 0; i < nbs; ++i)
        solid_dofs[k++] = dh_solid_.global_dof(dh_solid_.cell_scalar_dof(c, i), comp);
  };

  for (int c = 0; c < solid_mesh_->n_cells(); ++c) {
    gather_solid(c);
    for (int a : solid_dofs)
      for (int b : solid_dofs) ss[a].push_back(b);
    for (const CouplingGroup& g : cache.groups[c]) {
      gather_fluid(g.fluid_cell);
      for (int a : fluid_dofs)
        for (int b : solid_dofs) {
          fs[a].push_back(b);
          sf[b].push_back(a);
        }
    }
  }

  BlockedSparseMatrix m;
  m.n_fluid = n_f;
  m.n_solid = n_s;
  m.ff = SparseBlock(n_f, n_f, std::move(ff));
  m.fs = SparseBlock(n_f, n_s, std::move(fs));
  m.sf = SparseBlock(n_s, n_f, std::move(sf));
  m.ss = SparseBlock(n_s, n_s, std::move(ss));
  return m;
}

namespace {

PointBasis basis_at(const ReferenceElement& elem, const Vec2& ref, const Mat2* inv_t) {
  PointBasis b;
  b.nb = elem.n_basis();
  for (int i = 0; i < b.nb; ++i) {
    b.val[i] = elem.shape_value(i, ref);
    if (inv_t) b.grad[i] = (*inv_t) * elem.shape_gradient(i, ref);
  }
  return b;
}

}  // namespace

BlockedVector FsiSystem::assemble_residual(const SystemState& state) {
  const AssemblyOptions& opts = config_.options;
  const PhysicalConstants& pc = config_.constants;
  const double rho = pc.density;
  const double mu = pc.viscosity;
  const double phi = pc.phi_b;
  const double inv_dt = 1.0 / state.dt;
  const double t = state.t;
  const bool has_body = pc.body_force.components() > 0;

  BlockedVector R = make_vector();
  const int n_u = n_velocity();
  const int nbv = dh_velocity_.element().n_basis();
  const int nbp = dh_pressure_.element().n_basis();
  const int nbs = dh_solid_.element().n_basis();
  const int nqf = fluid_quad_.size();
  const int nqs = solid_quad_.size();

  // Navier-Stokes block over the whole control volume.
  std::array<double, 18> uc{}, utc{};
  std::array<double, 9> pco{};
  for (int c = 0; c < fluid_mesh_->n_cells(); ++c) {
    const FluidCellData& data = fluid_cells_[c];
    for (int comp = 0; comp < 2; ++comp)
      for (int i = 0; i < nbv; ++i) {
        const int dof = dh_velocity_.global_dof(dh_velocity_.cell_scalar_dof(c, i), comp);
        uc[comp * nbv + i] = state.xi.fluid[dof];
        utc[comp * nbv + i] = (state.xi.fluid[dof] - state.previous_xi.fluid[dof]) * inv_dt;
      }
    for (int i = 0; i < nbp; ++i)
      pco[i] = state.xi.fluid[n_u + dh_pressure_.cell_scalar_dof(c, i)];

    for (int q = 0; q < nqf; ++q) {
      Vec2 u = Vec2::Zero(), ut = Vec2::Zero();
      Mat2 grad_u = Mat2::Zero();
      for (int i = 0; i < nbv; ++i) {
        const double v = vel_values_[q * nbv + i];
        const Vec2& g = data.grad_v[q * nbv + i];
        u.x() += v * uc[i];
        u.y() += v * uc[nbv + i];
        ut.x() += v * utc[i];
        ut.y() += v * utc[nbv + i];
        grad_u.row(0) += uc[i] * g.transpose();
        grad_u.row(1) += uc[nbv + i] * g.transpose();
      }
      double p = 0.0;
      for (int i = 0; i < nbp; ++i) p += p_values_[q * nbp + i] * pco[i];
      const Vec2 b = has_body ? eval_vec2(pc.body_force, data.x[q], t) : Vec2::Zero();
      const double jxw = data.jxw[q];
      const Vec2 conv = grad_u * u;          // (grad u) u
      const Mat2 sym = grad_u + grad_u.transpose();
      const double div_u = grad_u.trace();

      for (int i = 0; i < nbv; ++i) {
        const double v = vel_values_[q * nbv + i];
        const Vec2& g = data.grad_v[q * nbv + i];
        for (int comp = 0; comp < 2; ++comp) {
          const int dof = dh_velocity_.global_dof(dh_velocity_.cell_scalar_dof(c, i), comp);
          R.fluid[dof] += jxw * (rho * (ut[comp] - b[comp] + conv[comp]) * v +
                                 mu * sym.row(comp).dot(g) - p * g[comp]);
        }
      }
      for (int i = 0; i < nbp; ++i) {
        const int dof = n_u + dh_pressure_.cell_scalar_dof(c, i);
        R.fluid[dof] -= jxw * p_values_[q * nbp + i] * div_u;
      }
    }
  }

  // Prescribed tractions on the Neumann part of the boundary.
  if (pc.neumann_traction.components() > 0 && !neumann_faces_.empty()) {
    int face_index = 0;
    for (const BoundaryFace& bf : fluid_mesh_->boundary_faces()) {
      const bool dirichlet = opts.all_dirichlet || bf.marker == opts.dirichlet_marker;
      if (dirichlet) continue;
      const NeumannFaceData& face = neumann_faces_[face_index++];
      const int nql = static_cast<int>(face.jxw.size());
      for (int q = 0; q < nql; ++q) {
        const Vec2 tau = eval_vec2(pc.neumann_traction, face.x[q], t);
        for (int i = 0; i < nbv; ++i) {
          const double v = face.values[q * nbv + i];
          if (v == 0.0) continue;
          for (int comp = 0; comp < 2; ++comp) {
            const int dof =
                dh_velocity_.global_dof(dh_velocity_.cell_scalar_dof(bf.cell, i), comp);
            R.fluid[dof] -= tau[comp] * v * face.jxw[q];
          }
        }
      }
    }
  }

  // Solid motion rows: Phi_B integral(w_dot . y) over the reference body.
  for (int c = 0; c < solid_mesh_->n_cells(); ++c) {
    const SolidCellData& data = solid_cells_[c];
    for (int q = 0; q < nqs; ++q) {
      Vec2 wt = Vec2::Zero();
      for (int i = 0; i < nbs; ++i) {
        const double v = solid_values_[q * nbs + i];
        const int sd = dh_solid_.cell_scalar_dof(c, i);
        wt.x() += v * (state.xi.solid[dh_solid_.global_dof(sd, 0)] -
                       state.previous_xi.solid[dh_solid_.global_dof(sd, 0)]);
        wt.y() += v * (state.xi.solid[dh_solid_.global_dof(sd, 1)] -
                       state.previous_xi.solid[dh_solid_.global_dof(sd, 1)]);
      }
      wt *= inv_dt;
      for (int i = 0; i < nbs; ++i) {
        const double v = solid_values_[q * nbs + i];
        const int sd = dh_solid_.cell_scalar_dof(c, i);
        R.solid[dh_solid_.global_dof(sd, 0)] += phi * wt.x() * v * data.jxw[q];
        R.solid[dh_solid_.global_dof(sd, 1)] += phi * wt.y() * v * data.jxw[q];
      }
    }
  }

  // Cross-mesh terms at the configuration displacement h.
  const Eigen::VectorXd& h = opts.semi_implicit ? state.previous_xi.solid : state.xi.solid;
  const CouplingCache& cache = coupling(h);

  Eigen::VectorXd spread_field;
  if (opts.use_spread_operator) {
    spread_field = solid_mass_ldlt_.solve(lagrangian_elastic_force(state.xi.solid));
  }

  const double rho_s0 = pc.solid_reference_density;
  std::vector<Mat2> stress_cov(nqs);   // elastic PK1 times F[h]^T
  std::vector<double> det_fw(nqs);
  std::vector<Vec2> z_at(nqs);

  for (int c = 0; c < solid_mesh_->n_cells(); ++c) {
    const SolidCellData& data = solid_cells_[c];
    for (int q = 0; q < nqs; ++q) {
      const Mat2 Fw = Mat2::Identity() + solid_field_gradient(state.xi.solid, c, q);
      const double det = Fw.determinant();
      if (det <= 0.0)
        throw DegenerateMappingError("solid element inversion in cell " + std::to_string(c));
      det_fw[q] = det;
      if (!opts.use_spread_operator) {
        const Mat2 P = elastic_pk1(config_.model, {Fw, det}, data.s[q]);
        const Mat2 Fh = Mat2::Identity() + solid_field_gradient(h, c, q);
        stress_cov[q] = P * Fh.transpose();
      }
      if (opts.use_spread_operator) z_at[q] = solid_field_value(spread_field, c, q);
    }

    for (const CouplingGroup& g : cache.groups[c]) {
      for (std::size_t k = 0; k < g.qs.size(); ++k) {
        const int qs = g.qs[k];
        const Vec2& ref = g.ref[k];
        const MappingDerivatives fd =
            mapping_jacobian(*fluid_mesh_, MappingConfig::reference(1), g.fluid_cell, ref);
        const Mat2 invT = fd.jacobian.inverse().transpose();
        const PointBasis fb = basis_at(dh_velocity_.element(), ref, &invT);
        const double jxw = data.jxw[qs];

        // Fluid velocity at the displaced point.
        Vec2 uval = Vec2::Zero();
        for (int j = 0; j < nbv; ++j) {
          const int sd = dh_velocity_.cell_scalar_dof(g.fluid_cell, j);
          uval.x() += fb.val[j] * state.xi.fluid[dh_velocity_.global_dof(sd, 0)];
          uval.y() += fb.val[j] * state.xi.fluid[dh_velocity_.global_dof(sd, 1)];
        }

        // Velocity coupling rows: -Phi_B u(s + h) . y
        for (int i = 0; i < nbs; ++i) {
          const double ys = solid_values_[qs * nbs + i];
          const int sd = dh_solid_.cell_scalar_dof(c, i);
          R.solid[dh_solid_.global_dof(sd, 0)] -= phi * uval.x() * ys * jxw;
          R.solid[dh_solid_.global_dof(sd, 1)] -= phi * uval.y() * ys * jxw;
        }

        // Elastic momentum term, spread or direct realization.
        if (opts.use_spread_operator) {
          const Vec2& z = z_at[qs];
          for (int j = 0; j < nbv; ++j) {
            const int sd = dh_velocity_.cell_scalar_dof(g.fluid_cell, j);
            R.fluid[dh_velocity_.global_dof(sd, 0)] += phi * fb.val[j] * z.x() * jxw;
            R.fluid[dh_velocity_.global_dof(sd, 1)] += phi * fb.val[j] * z.y() * jxw;
          }
        } else {
          const Mat2& M = stress_cov[qs];
          for (int j = 0; j < nbv; ++j) {
            const int sd = dh_velocity_.cell_scalar_dof(g.fluid_cell, j);
            R.fluid[dh_velocity_.global_dof(sd, 0)] += M.row(0).dot(fb.grad[j]) * jxw;
            R.fluid[dh_velocity_.global_dof(sd, 1)] += M.row(1).dot(fb.grad[j]) * jxw;
          }
        }

        // Body-force mismatch over the solid: -(rho_s0 - rho J[w]) b . v
        if (has_body) {
          const Vec2 xq = data.s[qs] + solid_field_value(h, c, qs);
          const Vec2 b = eval_vec2(pc.body_force, xq, t);
          const double factor = rho_s0 - rho * det_fw[qs];
          for (int j = 0; j < nbv; ++j) {
            const int sd = dh_velocity_.cell_scalar_dof(g.fluid_cell, j);
            R.fluid[dh_velocity_.global_dof(sd, 0)] -= factor * b.x() * fb.val[j] * jxw;
            R.fluid[dh_velocity_.global_dof(sd, 1)] -= factor * b.y() * fb.val[j] * jxw;
          }
        }
      }
    }
  }

  return R;
}

BlockedSparseMatrix FsiSystem::assemble_jacobian(const SystemState& state, double alpha) {
  const AssemblyOptions& opts = config_.options;
  const PhysicalConstants& pc = config_.constants;
  const double rho = pc.density;
  const double mu = pc.viscosity;
  const double phi = pc.phi_b;
  const double t = state.t;
  const bool has_body = pc.body_force.components() > 0;

  const Eigen::VectorXd& h = opts.semi_implicit ? state.previous_xi.solid : state.xi.solid;
  BlockedSparseMatrix J = build_sparsity(h);
  const CouplingCache& cache = coupling(h);

  const int n_u = n_velocity();
  const int nbv = dh_velocity_.element().n_basis();
  const int nbp = dh_pressure_.element().n_basis();
  const int nbs = dh_solid_.element().n_basis();
  const int nqf = fluid_quad_.size();
  const int nqs = solid_quad_.size();

  // Fluid/fluid block.
  std::array<double, 18> uc{};
  std::vector<int> vdof(2 * nbv), pdof(nbp);
  for (int c = 0; c < fluid_mesh_->n_cells(); ++c) {
    const FluidCellData& data = fluid_cells_[c];
    for (int comp = 0; comp < 2; ++comp)
      for (int i = 0; i < nbv; ++i) {
        vdof[comp * nbv + i] = dh_velocity_.global_dof(dh_velocity_.cell_scalar_dof(c, i), comp);
        uc[comp * nbv + i] = state.xi.fluid[vdof[comp * nbv + i]];
      }
    for (int i = 0; i < nbp; ++i) pdof[i] = n_u + dh_pressure_.cell_scalar_dof(c, i);

    for (int q = 0; q < nqf; ++q) {
      Vec2 u = Vec2::Zero();
      Mat2 grad_u = Mat2::Zero();
      for (int i = 0; i < nbv; ++i) {
        const double v = vel_values_[q * nbv + i];
        const Vec2& g = data.grad_v[q * nbv + i];
        u.x() += v * uc[i];
        u.y() += v * uc[nbv + i];
        grad_u.row(0) += uc[i] * g.transpose();
        grad_u.row(1) += uc[nbv + i] * g.transpose();
      }
      const double jxw = data.jxw[q];

      for (int i = 0; i < nbv; ++i) {
        const double vi = vel_values_[q * nbv + i];
        const Vec2& gi = data.grad_v[q * nbv + i];
        for (int j = 0; j < nbv; ++j) {
          const double vj = vel_values_[q * nbv + j];
          const Vec2& gj = data.grad_v[q * nbv + j];
          // Same-component couplings: mass, viscous grad:grad, N(u)du.
          const double diag = jxw * (rho * alpha * vi * vj + mu * gi.dot(gj) +
                                     rho * vi * (u.dot(gj)));
          // Component-mixing couplings: viscous transpose and N(du)u.
          for (int ci = 0; ci < 2; ++ci) {
            J.ff.add(vdof[ci * nbv + i], vdof[ci * nbv + j], diag);
            for (int cj = 0; cj < 2; ++cj) {
              const double mix = jxw * (mu * gi[cj] * gj[ci] +
                                        rho * vi * grad_u(ci, cj) * vj);
              J.ff.add(vdof[ci * nbv + i], vdof[cj * nbv + j], mix);
            }
          }
        }
        // Pressure column: -p div v.
        for (int jp = 0; jp < nbp; ++jp) {
          const double pv = p_values_[q * nbp + jp];
          for (int ci = 0; ci < 2; ++ci)
            J.ff.add(vdof[ci * nbv + i], pdof[jp], -jxw * pv * gi[ci]);
        }
      }
      // Continuity rows: -q div du.
      for (int ip = 0; ip < nbp; ++ip) {
        const double pv = p_values_[q * nbp + ip];
        for (int j = 0; j < nbv; ++j) {
          const Vec2& gj = data.grad_v[q * nbv + j];
          for (int cj = 0; cj < 2; ++cj)
            J.ff.add(pdof[ip], vdof[cj * nbv + j], -jxw * pv * gj[cj]);
        }
      }
    }
  }

  // Solid/solid block: alpha * M_g3 (the motion row's time derivative).
  for (int c = 0; c < solid_mesh_->n_cells(); ++c) {
    const SolidCellData& data = solid_cells_[c];
    for (int i = 0; i < nbs; ++i)
      for (int j = 0; j < nbs; ++j) {
        double m = 0.0;
        for (int q = 0; q < nqs; ++q)
          m += solid_values_[q * nbs + i] * solid_values_[q * nbs + j] * data.jxw[q];
        m *= phi * alpha;
        for (int comp = 0; comp < 2; ++comp)
          J.ss.add(dh_solid_.global_dof(dh_solid_.cell_scalar_dof(c, i), comp),
                   dh_solid_.global_dof(dh_solid_.cell_scalar_dof(c, j), comp), m);
      }
  }

  // Coupling blocks.
  const double rho_s0 = pc.solid_reference_density;
  for (int c = 0; c < solid_mesh_->n_cells(); ++c) {
    const SolidCellData& data = solid_cells_[c];

    // Deformation state at the current iterate (the stress argument).
    std::vector<Mat2> Fw(nqs), FhT(nqs), FwInv(nqs);
    std::vector<double> detF(nqs);
    for (int q = 0; q < nqs; ++q) {
      Fw[q] = Mat2::Identity() + solid_field_gradient(state.xi.solid, c, q);
      detF[q] = Fw[q].determinant();
      if (detF[q] <= 0.0)
        throw DegenerateMappingError("solid element inversion in cell " + std::to_string(c));
      const Mat2 Fh = Mat2::Identity() + solid_field_gradient(h, c, q);
      FhT[q] = Fh.transpose();
      FwInv[q] = Fw[q].inverse();
    }

    for (const CouplingGroup& g : cache.groups[c]) {
      for (std::size_t k = 0; k < g.qs.size(); ++k) {
        const int qs = g.qs[k];
        const Vec2& ref = g.ref[k];
        const MappingDerivatives fd =
            mapping_jacobian(*fluid_mesh_, MappingConfig::reference(1), g.fluid_cell, ref);
        const Mat2 invT = fd.jacobian.inverse().transpose();
        const PointBasis fb = basis_at(dh_velocity_.element(), ref, &invT);
        const double jxw = data.jxw[qs];
        const DeformationGradient fg{Fw[qs], detF[qs]};

        const Vec2 b = has_body
                           ? eval_vec2(pc.body_force,
                                       Vec2(data.s[qs] + solid_field_value(h, c, qs)), t)
                           : Vec2::Zero();

        for (int j = 0; j < nbs; ++j) {
          const Vec2& gs = data.grad_s[qs * nbs + j];
          for (int cj = 0; cj < 2; ++cj) {
            const int col = dh_solid_.global_dof(dh_solid_.cell_scalar_dof(c, j), cj);
            // dP[H] with H = e_cj (x) grad_s(phi_j)
            Mat2 H = Mat2::Zero();
            H.row(cj) = gs.transpose();
            const Mat2 dP = elastic_tangent(config_.model, fg, data.s[qs], H);
            const Mat2 dM = dP * FhT[qs];
            // d(J[w]) along the same direction, for the body-force mismatch.
            const double dJ = has_body ? detF[qs] * FwInv[qs].row(cj).dot(gs) : 0.0;
            for (int i = 0; i < nbv; ++i) {
              const int sd = dh_velocity_.cell_scalar_dof(g.fluid_cell, i);
              for (int ci = 0; ci < 2; ++ci) {
                double val = dM.row(ci).dot(fb.grad[i]) * jxw;
                if (has_body) val += rho * dJ * b[ci] * fb.val[i] * jxw;
                J.fs.add(dh_velocity_.global_dof(sd, ci), col, val);
              }
            }
          }
        }

        // Motion rows: -M_g1(h), a velocity-block column for each solid row.
        for (int i = 0; i < nbs; ++i) {
          const double ys = solid_values_[qs * nbs + i];
          for (int j = 0; j < nbv; ++j) {
            const int sd = dh_velocity_.cell_scalar_dof(g.fluid_cell, j);
            const double val = -phi * ys * fb.val[j] * jxw;
            for (int comp = 0; comp < 2; ++comp)
              J.sf.add(dh_solid_.global_dof(dh_solid_.cell_scalar_dof(c, i), comp),
                       dh_velocity_.global_dof(sd, comp), val);
          }
        }
      }
    }
  }

  return J;
}

void FsiSystem::apply_constraints(BlockedSparseMatrix* matrix, BlockedVector& residual,
                                  const BlockedVector& xi, double t) const {
  const Expression& ug = config_.constants.dirichlet_values;
  for (const DirichletDof& d : dirichlet_dofs_) {
    const double g = ug.components() > 0 ? ug.evaluate(d.component, d.point.x(), d.point.y(), t)
                                         : 0.0;
    residual.fluid[d.fluid_index] = xi.fluid[d.fluid_index] - g;
    if (matrix) {
      matrix->zero_row(d.fluid_index);
      matrix->ff.add(d.fluid_index, d.fluid_index, 1.0);
    }
  }
  if (pin_pressure_) {
    const int dof = pinned_pressure_dof();
    residual.fluid[dof] = xi.fluid[dof];
    if (matrix) {
      matrix->zero_row(dof);
      matrix->ff.add(dof, dof, 1.0);
    }
  }
}

Eigen::VectorXd FsiSystem::lagrangian_elastic_force(const Eigen::VectorXd& w) const {
  const int nbs = dh_solid_.element().n_basis();
  const int nqs = solid_quad_.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_solid());
  for (int c = 0; c < solid_mesh_->n_cells(); ++c) {
    const SolidCellData& data = solid_cells_[c];
    for (int q = 0; q < nqs; ++q) {
      const Mat2 Fw = Mat2::Identity() + solid_field_gradient(w, c, q);
      const double det = Fw.determinant();
      if (det <= 0.0)
        throw DegenerateMappingError("solid element inversion in cell " + std::to_string(c));
      const Mat2 P = elastic_pk1(config_.model, {Fw, det}, data.s[q]);
      for (int i = 0; i < nbs; ++i) {
        const Vec2& gs = data.grad_s[q * nbs + i];
        const int sd = dh_solid_.cell_scalar_dof(c, i);
        out[dh_solid_.global_dof(sd, 0)] += P.row(0).dot(gs) * data.jxw[q];
        out[dh_solid_.global_dof(sd, 1)] += P.row(1).dot(gs) * data.jxw[q];
      }
    }
  }
  return out;
}

Eigen::VectorXd FsiSystem::assemble_spread_elastic_force(const Eigen::VectorXd& w,
                                                         const Eigen::VectorXd& h) {
  const Eigen::VectorXd z = solid_mass_ldlt_.solve(lagrangian_elastic_force(w));
  const CouplingCache& cache = coupling(h);
  const double phi = config_.constants.phi_b;
  const int nbv = dh_velocity_.element().n_basis();
  const int nqs = solid_quad_.size();

  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_fluid());
  for (int c = 0; c < solid_mesh_->n_cells(); ++c) {
    const SolidCellData& data = solid_cells_[c];
    std::vector<Vec2> z_at(nqs);
    for (int q = 0; q < nqs; ++q) z_at[q] = solid_field_value(z, c, q);
    for (const CouplingGroup& g : cache.groups[c]) {
      for (std::size_t k = 0; k < g.qs.size(); ++k) {
        const int qs = g.qs[k];
        const PointBasis fb = basis_at(dh_velocity_.element(), g.ref[k], nullptr);
        const double jxw = data.jxw[qs];
        for (int j = 0; j < nbv; ++j) {
          const int sd = dh_velocity_.cell_scalar_dof(g.fluid_cell, j);
          out[dh_velocity_.global_dof(sd, 0)] += phi * fb.val[j] * z_at[qs].x() * jxw;
          out[dh_velocity_.global_dof(sd, 1)] += phi * fb.val[j] * z_at[qs].y() * jxw;
        }
      }
    }
  }
  return out;
}

Eigen::VectorXd FsiSystem::assemble_direct_elastic_force(const Eigen::VectorXd& w,
                                                         const Eigen::VectorXd& h) {
  const CouplingCache& cache = coupling(h);
  const int nbv = dh_velocity_.element().n_basis();
  const int nqs = solid_quad_.size();

  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_fluid());
  for (int c = 0; c < solid_mesh_->n_cells(); ++c) {
    const SolidCellData& data = solid_cells_[c];
    std::vector<Mat2> M(nqs);
    for (int q = 0; q < nqs; ++q) {
      const Mat2 Fw = Mat2::Identity() + solid_field_gradient(w, c, q);
      const double det = Fw.determinant();
      if (det <= 0.0)
        throw DegenerateMappingError("solid element inversion in cell " + std::to_string(c));
      const Mat2 P = elastic_pk1(config_.model, {Fw, det}, data.s[q]);
      const Mat2 Fh = Mat2::Identity() + solid_field_gradient(h, c, q);
      M[q] = P * Fh.transpose();
    }
    for (const CouplingGroup& g : cache.groups[c]) {
      for (std::size_t k = 0; k < g.qs.size(); ++k) {
        const int qs = g.qs[k];
        const MappingDerivatives fd = mapping_jacobian(
            *fluid_mesh_, MappingConfig::reference(1), g.fluid_cell, g.ref[k]);
        const Mat2 invT = fd.jacobian.inverse().transpose();
        const PointBasis fb = basis_at(dh_velocity_.element(), g.ref[k], &invT);
        const double jxw = data.jxw[qs];
        for (int j = 0; j < nbv; ++j) {
          const int sd = dh_velocity_.cell_scalar_dof(g.fluid_cell, j);
          out[dh_velocity_.global_dof(sd, 0)] += M[qs].row(0).dot(fb.grad[j]) * jxw;
          out[dh_velocity_.global_dof(sd, 1)] += M[qs].row(1).dot(fb.grad[j]) * jxw;
        }
      }
    }
  }
  return out;
}

Eigen::VectorXd FsiSystem::interpolation_apply(const Eigen::VectorXd& fluid_coeffs,
                                               const Eigen::VectorXd& h) {
  const CouplingCache& cache = coupling(h);
  const double phi = config_.constants.phi_b;
  const int nbv = dh_velocity_.element().n_basis();
  const int nbs = dh_solid_.element().n_basis();

  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_solid());
  for (int c = 0; c < solid_mesh_->n_cells(); ++c) {
    const SolidCellData& data = solid_cells_[c];
    for (const CouplingGroup& g : cache.groups[c]) {
      for (std::size_t k = 0; k < g.qs.size(); ++k) {
        const int qs = g.qs[k];
        const PointBasis fb = basis_at(dh_velocity_.element(), g.ref[k], nullptr);
        Vec2 uval = Vec2::Zero();
        for (int j = 0; j < nbv; ++j) {
          const int sd = dh_velocity_.cell_scalar_dof(g.fluid_cell, j);
          uval.x() += fb.val[j] * fluid_coeffs[dh_velocity_.global_dof(sd, 0)];
          uval.y() += fb.val[j] * fluid_coeffs[dh_velocity_.global_dof(sd, 1)];
        }
        const double jxw = data.jxw[qs];
        for (int i = 0; i < nbs; ++i) {
          const double ys = solid_values_[qs * nbs + i];
          const int sd = dh_solid_.cell_scalar_dof(c, i);
          out[dh_solid_.global_dof(sd, 0)] += phi * uval.x() * ys * jxw;
          out[dh_solid_.global_dof(sd, 1)] += phi * uval.y() * ys * jxw;
        }
      }
    }
  }
  return out;
}

Eigen::VectorXd FsiSystem::solid_mass_apply(const Eigen::VectorXd& w) const {
  return solid_mass_ * w;
}

Eigen::VectorXd FsiSystem::continuity_residual(const Eigen::VectorXd& fluid_coeffs) const {
  const int nbv = dh_velocity_.element().n_basis();
  const int nbp = dh_pressure_.element().n_basis();
  const int nqf = fluid_quad_.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_pressure());
  for (int c = 0; c < fluid_mesh_->n_cells(); ++c) {
    const FluidCellData& data = fluid_cells_[c];
    for (int q = 0; q < nqf; ++q) {
      double div_u = 0.0;
      for (int i = 0; i < nbv; ++i) {
        const Vec2& g = data.grad_v[q * nbv + i];
        const int sd = dh_velocity_.cell_scalar_dof(c, i);
        div_u += fluid_coeffs[dh_velocity_.global_dof(sd, 0)] * g.x() +
                 fluid_coeffs[dh_velocity_.global_dof(sd, 1)] * g.y();
      }
      for (int i = 0; i < nbp; ++i)
        out[dh_pressure_.cell_scalar_dof(c, i)] -=
            p_values_[q * nbp + i] * div_u * data.jxw[q];
    }
  }
  return out;
}

Eigen::SparseMatrix<double> FsiSystem::velocity_mass_matrix() const {
  const int nbv = dh_velocity_.element().n_basis();
  const int nqf = fluid_quad_.size();
  std::vector<Eigen::Triplet<double>> triplets;
  for (int c = 0; c < fluid_mesh_->n_cells(); ++c) {
    const FluidCellData& data = fluid_cells_[c];
    for (int i = 0; i < nbv; ++i)
      for (int j = 0; j < nbv; ++j) {
        double m = 0.0;
        for (int q = 0; q < nqf; ++q)
          m += vel_values_[q * nbv + i] * vel_values_[q * nbv + j] * data.jxw[q];
        for (int comp = 0; comp < 2; ++comp)
          triplets.emplace_back(dh_velocity_.global_dof(dh_velocity_.cell_scalar_dof(c, i), comp),
                                dh_velocity_.global_dof(dh_velocity_.cell_scalar_dof(c, j), comp),
                                m);
      }
  }
  Eigen::SparseMatrix<double> m(n_velocity(), n_velocity());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

double FsiSystem::pressure_mean(const Eigen::VectorXd& fluid_coeffs) const {
  const int n_u = n_velocity();
  const int nbp = dh_pressure_.element().n_basis();
  const int nqf = fluid_quad_.size();
  double integral = 0.0;
  for (int c = 0; c < fluid_mesh_->n_cells(); ++c) {
    const FluidCellData& data = fluid_cells_[c];
    for (int q = 0; q < nqf; ++q) {
      double p = 0.0;
      for (int i = 0; i < nbp; ++i)
        p += p_values_[q * nbp + i] * fluid_coeffs[n_u + dh_pressure_.cell_scalar_dof(c, i)];
      integral += p * data.jxw[q];
    }
  }
  return integral / fluid_area_;
}

void FsiSystem::shift_pressure_to_zero_mean(BlockedVector& xi) const {
  const double mean = pressure_mean(xi.fluid);
  const int n_u = n_velocity();
  if (dh_pressure_.element().continuous()) {
    for (int i = 0; i < n_pressure(); ++i) xi.fluid[n_u + i] -= mean;
  } else {
    // Constant mode is the first per-cell coefficient.
    const int nbp = dh_pressure_.element().n_basis();
    for (int c = 0; c < fluid_mesh_->n_cells(); ++c)
      xi.fluid[n_u + dh_pressure_.cell_scalar_dof(c, 0)] -= mean;
  }
}

BlockedVector FsiSystem::interpolate_initial(const Expression& u0,
                                             const Expression& w0) const {
  BlockedVector xi = make_vector();
  const int n_u = n_velocity();

  const std::vector<Vec2> vpoints = scalar_dof_support_points(dh_velocity_, 1);
  for (int s = 0; s < dh_velocity_.n_scalar_dofs(); ++s)
    for (int comp = 0; comp < 2; ++comp)
      xi.fluid[dh_velocity_.global_dof(s, comp)] =
          u0.components() > comp ? u0.evaluate(comp, vpoints[s].x(), vpoints[s].y(), 0.0) : 0.0;

  const bool has_p = u0.components() > 2;
  if (dh_pressure_.element().continuous()) {
    const std::vector<Vec2> ppoints = scalar_dof_support_points(dh_pressure_, 1);
    for (int s = 0; s < dh_pressure_.n_scalar_dofs(); ++s)
      xi.fluid[n_u + s] = has_p ? u0.evaluate(2, ppoints[s].x(), ppoints[s].y(), 0.0) : 0.0;
  } else if (has_p) {
    const MappingConfig ref_cfg = MappingConfig::reference(1);
    for (int c = 0; c < fluid_mesh_->n_cells(); ++c) {
      auto at = [&](double rx, double ry) {
        const Vec2 x = map_point(*fluid_mesh_, ref_cfg, c, Vec2(rx, ry));
        return u0.evaluate(2, x.x(), x.y(), 0.0);
      };
      xi.fluid[n_u + dh_pressure_.cell_scalar_dof(c, 0)] = at(0.5, 0.5);
      xi.fluid[n_u + dh_pressure_.cell_scalar_dof(c, 1)] = at(1.0, 0.5) - at(0.0, 0.5);
      xi.fluid[n_u + dh_pressure_.cell_scalar_dof(c, 2)] = at(0.5, 1.0) - at(0.5, 0.0);
    }
  }

  const std::vector<Vec2> spoints =
      scalar_dof_support_points(dh_solid_, dh_solid_.element().degree());
  for (int s = 0; s < dh_solid_.n_scalar_dofs(); ++s)
    for (int comp = 0; comp < 2; ++comp)
      xi.solid[dh_solid_.global_dof(s, comp)] =
          w0.components() > comp ? w0.evaluate(comp, spoints[s].x(), spoints[s].y(), 0.0) : 0.0;

  return xi;
}

void FsiSystem::for_each_fluid_sample(
    const Eigen::VectorXd& fluid_coeffs, int quad_points_per_dir,
    const std::function<void(const FluidSample&)>& f) const {
  const QuadratureRule quad = gauss_rule(quad_points_per_dir);
  const ReferenceElement& ve = dh_velocity_.element();
  const ReferenceElement& pe = dh_pressure_.element();
  const int nbv = ve.n_basis();
  const int nbp = pe.n_basis();
  const int n_u = n_velocity();
  const MappingConfig ref_cfg = MappingConfig::reference(1);

  for (int c = 0; c < fluid_mesh_->n_cells(); ++c) {
    for (int q = 0; q < quad.size(); ++q) {
      const Vec2& rq = quad.points[q];
      const MappingDerivatives md = mapping_jacobian(*fluid_mesh_, ref_cfg, c, rq);
      const Mat2 invT = md.jacobian.inverse().transpose();
      FluidSample sample;
      sample.x = map_point(*fluid_mesh_, ref_cfg, c, rq);
      sample.jxw = md.det * quad.weights[q];
      sample.u = Vec2::Zero();
      sample.grad_u = Mat2::Zero();
      sample.p = 0.0;
      for (int i = 0; i < nbv; ++i) {
        const double v = ve.shape_value(i, rq);
        const Vec2 g = invT * ve.shape_gradient(i, rq);
        const int sd = dh_velocity_.cell_scalar_dof(c, i);
        const double c0 = fluid_coeffs[dh_velocity_.global_dof(sd, 0)];
        const double c1 = fluid_coeffs[dh_velocity_.global_dof(sd, 1)];
        sample.u.x() += v * c0;
        sample.u.y() += v * c1;
        sample.grad_u.row(0) += c0 * g.transpose();
        sample.grad_u.row(1) += c1 * g.transpose();
      }
      for (int i = 0; i < nbp; ++i)
        sample.p += pe.shape_value(i, rq) * fluid_coeffs[n_u + dh_pressure_.cell_scalar_dof(c, i)];
      f(sample);
    }
  }
}

void FsiSystem::for_each_solid_sample(
    const Eigen::VectorXd& w, const std::function<void(const SolidSample&)>& f) const {
  const int nqs = solid_quad_.size();
  for (int c = 0; c < solid_mesh_->n_cells(); ++c) {
    const SolidCellData& data = solid_cells_[c];
    for (int q = 0; q < nqs; ++q) {
      SolidSample sample;
      sample.s = data.s[q];
      sample.jxw = data.jxw[q];
      sample.F = Mat2::Identity() + solid_field_gradient(w, c, q);
      sample.det_f = sample.F.determinant();
      f(sample);
    }
  }
}

}  // namespace ifem
