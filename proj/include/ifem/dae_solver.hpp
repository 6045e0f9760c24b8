#ifndef IFEM_DAE_SOLVER_HPP
#define IFEM_DAE_SOLVER_HPP

#include <Eigen/SparseLU>
#include <memory>
#include <vector>

#include "ifem/assembly.hpp"
#include "ifem/system_state.hpp"

namespace ifem {

struct NewtonOptions {
  double abs_tol = 1e-10;   // on the max norm of the residual
  int max_iterations = 20;  // Newton corrections per attempt
  bool force_jacobian_each_step = true;
  bool update_jacobian_every_iteration = false;
  bool semi_implicit = true;
  bool use_spread_operator = true;
};

struct NewtonReport {
  int iterations = 0;  // residual evaluations (1 means already converged)
  double residual_norm = 0.0;
  std::vector<double> residual_history;
};

// Direct sparse solve (unsymmetric LU, fill-reducing ordering) with
// singularity detection. Throws SingularMatrixError with the offending
// position when a pressure constraint is missing or an element inverted.
BlockedVector linear_solve(const BlockedSparseMatrix& matrix, const BlockedVector& rhs);

// Implicit-Euler time stepper with Newton corrections. Owns the Jacobian
// factorization and the update policy; the factorization is reused across
// iterations and steps as the flags allow.
class DaeSolver {
 public:
  explicit DaeSolver(FsiSystem& system) : sys_(system) {}

  // Iterates xi until ||G||_inf <= abs_tol, starting from state.xi (callers
  // normally seed it with previous_xi). Throws NoConvergenceError.
  NewtonReport newton_solve(SystemState& state, const NewtonOptions& opts);

  // Shifts previous_xi <- xi, advances t, solves, and post-processes the
  // pressure mean when running in mean-zero mode. On a failed solve with a
  // stale Jacobian, retries the step once with a fresh factorization.
  SystemState advance(const SystemState& state, const NewtonOptions& opts);

  void invalidate_factorization() { have_factorization_ = false; }
  bool has_factorization() const { return have_factorization_; }

 private:
  void refresh_jacobian(const SystemState& state, double alpha);
  void sync_options(const NewtonOptions& opts);

  FsiSystem& sys_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  bool have_factorization_ = false;
};

}  // namespace ifem

#endif
