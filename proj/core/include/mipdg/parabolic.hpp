#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include "mipdg/dg_forms.hpp"
#include "mipdg/elliptic.hpp"

namespace mipdg {

// Initial-boundary value problem
//   u_t + F(u_xx, u_x, u, t, x) = 0   on (a, b) x (0, T]
// with Dirichlet data u_a(t), u_b(t) and initial datum u_0(x).  The domain
// interval lives on the mesh of the space the problem is discretized on.
struct ParabolicProblem {
  MomentOperator op;
  double final_time = 1.0;
  std::function<double(double t)> ua;
  std::function<double(double t)> ub;
  std::function<double(double x)> u0;
};

// Uniform partition of [0, T] into M steps.  Built either from an explicit
// step count, from a target step size (rounded so M dt = T exactly), or from
// the parabolic scaling dt = kappa_t h^2.
class TimeGrid {
 public:
  static TimeGrid with_steps(double final_time, int steps);
  static TimeGrid with_step_target(double final_time, double dt_target);
  static TimeGrid cfl(double final_time, double kappa_t, double h);

  double final_time() const { return final_time_; }
  int steps() const { return steps_; }
  double dt() const { return dt_; }
  // kappa_t used at construction; zero when the grid was not CFL-derived.
  double kappa() const { return kappa_; }

  double time(int n) const { return n == steps_ ? final_time_ : n * dt_; }

 private:
  TimeGrid(double final_time, int steps, double kappa);

  double final_time_;
  int steps_;
  double dt_;
  double kappa_;
};

// The three one-sided discrete second derivatives of v at time t: each solves
// its mass system  M q_k = g_k(t) - B_k v.  The orthonormal basis makes the
// mass matrix the identity, so the solve is a plain evaluation.
std::array<DGFunction, 3> discrete_second_derivatives(
    const DGFunction& v, double t, const ParabolicProblem& problem,
    const AssembledForms& forms);

// One explicit step: evaluates u^n - dt * Fhat(Q-, Qa, Q+, u', u, t^n, x) at
// the element-interior quadrature points (where u and u' are single-valued)
// and applies the boundary-weighted projection with data at t^n + dt.
// Throws NonFiniteEvaluation when the operator blows up.
DGFunction forward_euler_step(const DGFunction& u_n, double t_n,
                              const ParabolicProblem& problem,
                              const AssembledForms& forms, double dt,
                              const ModifiedL2Projector& projector);
DGFunction forward_euler_step(const DGFunction& u_n, double t_n,
                              const ParabolicProblem& problem,
                              const AssembledForms& forms, double dt);

// One implicit step to time t_n: solves the nonhomogeneous elliptic problem
// with operator  Ghat = lambda + dt * Fhat(. , t_n)  and right side
// (u^{n-1}, phi); prev supplies both that right side and the Newton warm
// start.  The moment weight of Ghat is dt times the problem's.
SolveResult backward_euler_step(const SolverState& prev, double t_n,
                                const ParabolicProblem& problem,
                                const AssembledForms& forms, double dt,
                                const NewtonConfig& newton = {});

enum class Scheme { forward_euler, backward_euler };

enum class TransientStatus { completed, unstable, non_convergence };

struct StepRecord {
  int step;
  double time;
  double linf;              // sampled max of the state itself
  double l2_error;          // vs the exact solution; NaN when unknown
  double linf_error;        // vs the exact solution; NaN when unknown
  double stability_margin;  // blow-up bound minus linf
};

struct TransientOptions {
  Scheme scheme = Scheme::forward_euler;
  NewtonConfig newton{};
  // Record a diagnostics row every `record_stride` steps (initial and final
  // rows are always kept); zero keeps only those two.
  int record_stride = 0;
  // Exact solution u(x, t) for per-step error columns, when known.
  std::function<double(double x, double t)> exact;
  // Forward stepping aborts when the sampled max exceeds
  // blowup_factor * (1 + sampled max of u^0).
  double blowup_factor = 1e6;
  // Saturated-oscillation guard.  A resolving run changes by O(dt * u_t) per
  // step, so its rate  |u^{n+1} - u^n|_inf / dt  stays on the scale of u_t; a
  // parasitic mode at the explicit stability boundary flips sign every step
  // and the rate becomes O(state / dt) instead.  When the operator itself
  // limits the amplitude (growing diffusivity), the blow-up bound above never
  // trips, so the run is declared unstable once the rate exceeds
  // rate_bound_factor * (1 + sampled max) for rate_bound_patience consecutive
  // steps.  Set the factor to infinity to disable the guard.
  double rate_bound_factor = 50.0;
  int rate_bound_patience = 10;
};

struct TransientResult {
  TransientStatus status = TransientStatus::completed;
  int failed_step = -1;  // first step index that went bad
  SolverState state;     // state at the final completed time
  std::vector<StepRecord> trajectory;

  explicit TransientResult(std::shared_ptr<const DGSpace> space)
      : state(space) {}
  bool completed() const { return status == TransientStatus::completed; }
};

// Marches u^0 = P_h u_0 to the grid's final time.  Forward stepping watches
// the blow-up bound (NaN-safe); backward stepping warm-starts every Newton
// solve from the previous state, with the first derivative guesses taken
// from the discrete second derivatives of u^0.
TransientResult run_transient(const ParabolicProblem& problem,
                              const AssembledForms& forms,
                              const TimeGrid& grid,
                              const TransientOptions& options = {});

// Rows of (step, time, linf, l2_error, stability_margin); the error cell is
// left empty when no exact solution was supplied.
void write_trajectory_csv(const TransientResult& result, std::ostream& os);

}  // namespace mipdg
