#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "mipdg/dg_forms.hpp"
#include "mipdg/numerical_operator.hpp"

namespace mipdg {

// Dirichlet problem F(u_xx, u_x, u, x) = 0 on the mesh interval, discretized
// through the numerical operator acting on the three variant discrete second
// derivatives.  The optional source swaps the nonlinear block equation
//   (Fhat(p1, p2, p3, u', u, t, .), phi) = 0
// for its nonhomogeneous version with right side (source, phi), which is what
// implicit time stepping feeds in.
struct EllipticProblem {
  MomentOperator op;
  double ua = 0.0;
  double ub = 0.0;
  double time = 0.0;  // frozen t argument handed to F
  std::optional<DGFunction> source;
};

struct SolverState {
  DGFunction u, p1, p2, p3;
  explicit SolverState(std::shared_ptr<const DGSpace> space)
      : u(space), p1(space), p2(space), p3(space) {}

  DGFunction& p(int k) { return k == 0 ? p1 : k == 1 ? p2 : p3; }
  const DGFunction& p(int k) const { return k == 0 ? p1 : k == 1 ? p2 : p3; }
};

enum class JacobianKind { finite_difference, analytic };

struct NewtonConfig {
  double tolerance = 1e-10;  // residual max-norm
  int max_iterations = 50;
  int max_halvings = 8;  // half-step backtracking depth
  JacobianKind jacobian = JacobianKind::finite_difference;
};

// damping_failure covers every way of failing to find a descent step,
// including Jacobians that stay singular under regularization.
enum class SolveStatus { converged, max_iterations, damping_failure };

struct IterationRecord {
  int iteration;
  double residual_norm;  // max-norm entering the iteration
  double step_norm;
  int halvings;
};

struct NewtonReport {
  SolveStatus status = SolveStatus::max_iterations;
  int iterations = 0;
  double final_residual = std::numeric_limits<double>::infinity();
  std::vector<IterationRecord> history;
  bool converged() const { return status == SolveStatus::converged; }
};

struct SolveResult {
  SolverState state;
  NewtonReport report;
};

// Stacked residual in the block order (u-equation, p1, p2, p3):
//   [(Fhat, phi) - (source, phi); p_k + B_k u - f_k].
Eigen::VectorXd residual(const EllipticProblem& problem,
                         const AssembledForms& forms,
                         const SolverState& state);

// Jacobian of the stacked residual at the given state.
Eigen::SparseMatrix<double> jacobian(const EllipticProblem& problem,
                                     const AssembledForms& forms,
                                     const SolverState& state,
                                     JacobianKind kind);

// Damped Newton on the full four-block system.  Non-finite operator values
// abort the trial step and back off; singular Jacobians fall back to a
// Tikhonov-regularized least-squares step, so flat nonlinear blocks are
// escaped when possible and reported as no root found when not.
SolveResult solve(const EllipticProblem& problem, const AssembledForms& forms,
                  const SolverState& guess, const NewtonConfig& config = {});

// Same equation with the derivative blocks eliminated through
// p_k = f_k - B_k u; iterates on u alone.
SolveResult solve_reduced(const EllipticProblem& problem,
                          const AssembledForms& forms,
                          const DGFunction& u_guess,
                          const NewtonConfig& config = {});

// Straight line through the boundary data, zero derivative guesses.
SolverState secant_initial_guess(const EllipticProblem& problem,
                                 std::shared_ptr<const DGSpace> space);

void write_iteration_csv(const NewtonReport& report, std::ostream& os);

}  // namespace mipdg
