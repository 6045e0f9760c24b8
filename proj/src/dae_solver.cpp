#include "ifem/dae_solver.hpp"

#include <cmath>

#include "ifem/errors.hpp"

namespace ifem {

namespace {

Eigen::VectorXd to_flat(const BlockedVector& v) {
  Eigen::VectorXd out(v.size());
  out.head(v.fluid.size()) = v.fluid;
  out.tail(v.solid.size()) = v.solid;
  return out;
}

BlockedVector from_flat(const Eigen::VectorXd& v, int n_fluid, int n_solid) {
  BlockedVector out(n_fluid, n_solid);
  out.fluid = v.head(n_fluid);
  out.solid = v.tail(n_solid);
  return out;
}

}  // namespace

BlockedVector linear_solve(const BlockedSparseMatrix& matrix, const BlockedVector& rhs) {
  const Eigen::SparseMatrix<double> m = matrix.to_eigen();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success)
    throw SingularMatrixError("sparse LU factorization failed: " + lu.lastErrorMessage());

  const Eigen::VectorXd b = to_flat(rhs);
  const Eigen::VectorXd x = lu.solve(b);

  int worst = 0;
  x.cwiseAbs().maxCoeff(&worst);
  if (!x.allFinite())
    throw SingularMatrixError("sparse solve produced non-finite entries", worst);

  // Factors of a numerically singular matrix amplify the right-hand side by
  // roughly 1/eps; treat such blowup as singularity (a missing pressure
  // constraint shows up exactly this way).
  double matrix_scale = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
      matrix_scale = std::max(matrix_scale, std::abs(it.value()));
  const double rhs_scale = b.lpNorm<Eigen::Infinity>();
  if (matrix_scale > 0.0 && rhs_scale > 0.0 &&
      x.lpNorm<Eigen::Infinity>() > 1e14 * rhs_scale / matrix_scale)
    throw SingularMatrixError("matrix is numerically singular (missing constraint?)", worst);

  return from_flat(x, matrix.n_fluid, matrix.n_solid);
}

void DaeSolver::sync_options(const NewtonOptions& opts) {
  AssemblyOptions& ao = sys_.mutable_options();
  if (ao.semi_implicit != opts.semi_implicit ||
      ao.use_spread_operator != opts.use_spread_operator) {
    ao.semi_implicit = opts.semi_implicit;
    ao.use_spread_operator = opts.use_spread_operator;
    have_factorization_ = false;
  }
}

void DaeSolver::refresh_jacobian(const SystemState& state, double alpha) {
  BlockedSparseMatrix J = sys_.assemble_jacobian(state, alpha);
  BlockedVector scratch = sys_.make_vector();
  sys_.apply_constraints(&J, scratch, state.xi, state.t);
  lu_.compute(J.to_eigen());
  if (lu_.info() != Eigen::Success)
    throw SingularMatrixError("Jacobian factorization failed: " + lu_.lastErrorMessage());
  have_factorization_ = true;
}

NewtonReport DaeSolver::newton_solve(SystemState& state, const NewtonOptions& opts) {
  sync_options(opts);
  const double alpha = 1.0 / state.dt;

  if (opts.force_jacobian_each_step || !have_factorization_)
    refresh_jacobian(state, alpha);

  NewtonReport report;
  for (int iter = 1;; ++iter) {
    BlockedVector residual = sys_.assemble_residual(state);
    sys_.apply_constraints(nullptr, residual, state.xi, state.t);
    const double norm = residual.inf_norm();
    report.iterations = iter;
    report.residual_norm = norm;
    report.residual_history.push_back(norm);
    if (!std::isfinite(norm))
      throw NoConvergenceError("Newton residual is not finite", norm, iter);
    if (norm <= opts.abs_tol) return report;
    if (iter > opts.max_iterations)
      throw NoConvergenceError("Newton did not converge in " +
                                   std::to_string(opts.max_iterations) +
                                   " iterations (residual " + std::to_string(norm) + ")",
                               norm, iter);

    if (opts.update_jacobian_every_iteration && iter > 1) refresh_jacobian(state, alpha);

    const Eigen::VectorXd delta = lu_.solve(-to_flat(residual));
    if (!delta.allFinite())
      throw SingularMatrixError("Newton correction is not finite");
    state.xi.fluid += delta.head(sys_.n_fluid());
    state.xi.solid += delta.tail(sys_.n_solid());
  }
}

SystemState DaeSolver::advance(const SystemState& state, const NewtonOptions& opts) {
  SystemState next = state;
  next.previous_xi = state.xi;
  next.t = state.t + state.dt;
  next.step_index = state.step_index + 1;

  const bool fresh = opts.force_jacobian_each_step || !have_factorization_;
  try {
    newton_solve(next, opts);
  } catch (const NoConvergenceError&) {
    if (fresh && opts.update_jacobian_every_iteration) throw;
    // A stale factorization can stall; retry the step once at full strength.
    next.xi = next.previous_xi;
    NewtonOptions retry = opts;
    retry.force_jacobian_each_step = true;
    retry.update_jacobian_every_iteration = true;
    newton_solve(next, retry);
  }

  if (sys_.pressure_pin_active() && !sys_.options().fix_one_pressure_dof)
    sys_.shift_pressure_to_zero_mean(next.xi);
  return next;
}

}  // namespace ifem
