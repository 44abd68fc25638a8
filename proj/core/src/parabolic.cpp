#include "mipdg/parabolic.hpp"

#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace mipdg {

namespace {

// Columns of the element-major coefficient vector, one element per column.
Eigen::Map<const Eigen::MatrixXd> by_element(const Eigen::VectorXd& coeffs,
                                             int modes, int elements) {
  return {coeffs.data(), modes, elements};
}

}  // namespace

TimeGrid::TimeGrid(double final_time, int steps, double kappa)
    : final_time_(final_time),
      steps_(steps),
      dt_(steps > 0 ? final_time / steps : 0.0),
      kappa_(kappa) {}

TimeGrid TimeGrid::with_steps(double final_time, int steps) {
  if (final_time < 0.0) {
    throw std::invalid_argument("final time must be nonnegative");
  }
  if (final_time == 0.0) return {0.0, 0, 0.0};
  if (steps <= 0) throw std::invalid_argument("need a positive step count");
  return {final_time, steps, 0.0};
}

TimeGrid TimeGrid::with_step_target(double final_time, double dt_target) {
  if (final_time < 0.0) {
    throw std::invalid_argument("final time must be nonnegative");
  }
  if (final_time == 0.0) return {0.0, 0, 0.0};
  if (!(dt_target > 0.0)) {
    throw std::invalid_argument("need a positive step size");
  }
  const int steps = static_cast<int>(std::ceil(final_time / dt_target - 1e-9));
  return {final_time, std::max(steps, 1), 0.0};
}

TimeGrid TimeGrid::cfl(double final_time, double kappa_t, double h) {
  if (!(kappa_t > 0.0) || !(h > 0.0)) {
    throw std::invalid_argument("CFL scaling needs positive kappa_t and h");
  }
  TimeGrid grid = with_step_target(final_time, kappa_t * h * h);
  grid.kappa_ = kappa_t;
  return grid;
}

std::array<DGFunction, 3> discrete_second_derivatives(
    const DGFunction& v, double t, const ParabolicProblem& problem,
    const AssembledForms& forms) {
  const double ua = problem.ua(t);
  const double ub = problem.ub(t);
  std::array<DGFunction, 3> q{DGFunction(forms.space), DGFunction(forms.space),
                              DGFunction(forms.space)};
  for (int k = 0; k < 3; ++k) {
    // The mass matrix is the identity in this basis; no solve needed.
    q[k].coeffs() =
        forms.boundary_vector(k, ua, ub) - forms.flux[k] * v.coeffs();
  }
  return q;
}

DGFunction forward_euler_step(const DGFunction& u_n, double t_n,
                              const ParabolicProblem& problem,
                              const AssembledForms& forms, double dt,
                              const ModifiedL2Projector& projector) {
  const DGSpace& s = *forms.space;
  const int m = s.dofs_per_element();
  const int ne = s.mesh().num_elements();
  const int nq = s.quadrature().size();

  const std::array<DGFunction, 3> q =
      discrete_second_derivatives(u_n, t_n, problem, forms);

  // All quadrature values in five dense products (point x element), scaled
  // per element afterwards; cheaper than per-element slicing inside the hot
  // time loop.
  Eigen::RowVectorXd val_scale(ne), der_scale(ne);
  for (int e = 0; e < ne; ++e) {
    val_scale[e] = s.scale(e);
    der_scale[e] = s.deriv_scale(e);
  }
  const auto scaled = [&](const Eigen::VectorXd& coeffs,
                          const Eigen::MatrixXd& table,
                          const Eigen::RowVectorXd& scale) {
    Eigen::MatrixXd vals = table * by_element(coeffs, m, ne);
    vals.array().rowwise() *= scale.array();
    return vals;
  };
  const Eigen::MatrixXd p1v = scaled(q[0].coeffs(), s.basis_at_quad(), val_scale);
  const Eigen::MatrixXd p2v = scaled(q[1].coeffs(), s.basis_at_quad(), val_scale);
  const Eigen::MatrixXd p3v = scaled(q[2].coeffs(), s.basis_at_quad(), val_scale);
  const Eigen::MatrixXd uv = scaled(u_n.coeffs(), s.basis_at_quad(), val_scale);
  const Eigen::MatrixXd duv =
      scaled(u_n.coeffs(), s.basis_deriv_at_quad(), der_scale);

  Eigen::MatrixXd integrand(ne, nq);
  for (int e = 0; e < ne; ++e) {
    for (int k = 0; k < nq; ++k) {
      const double x = s.quad_point(e, k);
      integrand(e, k) =
          uv(k, e) - dt * problem.op.value(p1v(k, e), p2v(k, e), p3v(k, e),
                                           duv(k, e), uv(k, e), t_n, x);
    }
  }

  const double t_next = t_n + dt;
  return projector.apply(integrand, problem.ua(t_next), problem.ub(t_next));
}

DGFunction forward_euler_step(const DGFunction& u_n, double t_n,
                              const ParabolicProblem& problem,
                              const AssembledForms& forms, double dt) {
  return forward_euler_step(u_n, t_n, problem, forms, dt,
                            ModifiedL2Projector(forms.space));
}

SolveResult backward_euler_step(const SolverState& prev, double t_n,
                                const ParabolicProblem& problem,
                                const AssembledForms& forms, double dt,
                                const NewtonConfig& newton) {
  const DifferentialOperator& f = problem.op.base();

  DifferentialOperator g;
  g.value = [dt, value = f.value](double p, double q, double lambda, double t,
                                  double x) {
    return lambda + dt * value(p, q, lambda, t, x);
  };
  if (f.gradient) {
    g.gradient = [dt, gradient = f.gradient](double p, double q, double lambda,
                                             double t, double x) {
      std::array<double, 3> d = gradient(p, q, lambda, t, x);
      return std::array<double, 3>{dt * d[0], dt * d[1], 1.0 + dt * d[2]};
    };
  }

  EllipticProblem step_problem{
      MomentOperator(std::move(g), dt * problem.op.alpha(),
                     problem.op.variant()),
      problem.ua(t_n), problem.ub(t_n), t_n, prev.u};
  return solve(step_problem, forms, prev, newton);
}

TransientResult run_transient(const ParabolicProblem& problem,
                              const AssembledForms& forms,
                              const TimeGrid& grid,
                              const TransientOptions& options) {
  const auto space = forms.space;
  const Mesh& mesh = space->mesh();

  const double mismatch_a = std::abs(problem.u0(mesh.a()) - problem.ua(0.0));
  const double mismatch_b = std::abs(problem.u0(mesh.b()) - problem.ub(0.0));
  if (mismatch_a > 1e-8 || mismatch_b > 1e-8) {
    std::cerr << "warning: initial datum disagrees with the boundary data at "
                 "t=0 (|gap| = "
              << std::max(mismatch_a, mismatch_b) << ")\n";
  }

  TransientResult result(space);
  DGFunction u = l2_project(space, problem.u0);
  const double bound = options.blowup_factor * (1.0 + sampled_max_abs(u));

  const auto record = [&](int step, double t, const DGFunction& state) {
    StepRecord rec{step,
                   t,
                   sampled_max_abs(state),
                   std::numeric_limits<double>::quiet_NaN(),
                   std::numeric_limits<double>::quiet_NaN(),
                   0.0};
    rec.stability_margin = bound - rec.linf;
    if (options.exact) {
      const ErrorNorms norms =
          error_norms(state, [&](double x) { return options.exact(x, t); });
      rec.l2_error = norms.l2;
      rec.linf_error = norms.linf;
    }
    result.trajectory.push_back(rec);
  };

  record(0, 0.0, u);

  // Consecutive steps whose rate |u^{n+1} - u^n|/dt exceeds the scaled bound;
  // shared by both schemes.
  int rate_streak = 0;
  DGFunction increment(space);
  const auto rate_exceeded = [&](const DGFunction& next, const DGFunction& prev,
                                 double next_max) {
    increment.coeffs() = next.coeffs() - prev.coeffs();
    const double rate = sampled_max_abs(increment) / grid.dt();
    if (rate > options.rate_bound_factor * (1.0 + next_max)) {
      return ++rate_streak >= options.rate_bound_patience;
    }
    rate_streak = 0;
    return false;
  };

  if (options.scheme == Scheme::forward_euler) {
    const ModifiedL2Projector projector(space);
    for (int n = 0; n < grid.steps(); ++n) {
      DGFunction next(space);
      try {
        next = forward_euler_step(u, grid.time(n), problem, forms, grid.dt(),
                                  projector);
      } catch (const NonFiniteEvaluation&) {
        result.status = TransientStatus::unstable;
        result.failed_step = n + 1;
        break;
      }
      // NaN-safe: a NaN max fails the <= test too.
      const double next_max = sampled_max_abs(next);
      if (!(next_max <= bound) || rate_exceeded(next, u, next_max)) {
        result.status = TransientStatus::unstable;
        result.failed_step = n + 1;
        break;
      }
      u = std::move(next);
      const bool last = n + 1 == grid.steps();
      if (!last && options.record_stride > 0 &&
          (n + 1) % options.record_stride == 0) {
        record(n + 1, grid.time(n + 1), u);
      }
    }
    result.state.u = u;
    const double t_end = result.completed()
                             ? grid.final_time()
                             : grid.time(result.failed_step - 1);
    const std::array<DGFunction, 3> q =
        discrete_second_derivatives(u, t_end, problem, forms);
    for (int k = 0; k < 3; ++k) result.state.p(k) = q[k];
    if (grid.steps() > 0 && result.completed()) {
      record(grid.steps(), grid.final_time(), u);
    }
    return result;
  }

  result.state.u = u;
  {
    const std::array<DGFunction, 3> q =
        discrete_second_derivatives(u, 0.0, problem, forms);
    for (int k = 0; k < 3; ++k) result.state.p(k) = q[k];
  }
  for (int n = 0; n < grid.steps(); ++n) {
    const SolveResult step = backward_euler_step(
        result.state, grid.time(n + 1), problem, forms, grid.dt(),
        options.newton);
    if (!step.report.converged()) {
      result.status = TransientStatus::non_convergence;
      result.failed_step = n + 1;
      break;
    }
    if (rate_exceeded(step.state.u, result.state.u,
                      sampled_max_abs(step.state.u))) {
      result.status = TransientStatus::unstable;
      result.failed_step = n + 1;
      break;
    }
    result.state = step.state;
    const bool last = n + 1 == grid.steps();
    if (!last && options.record_stride > 0 &&
        (n + 1) % options.record_stride == 0) {
      record(n + 1, grid.time(n + 1), result.state.u);
    }
  }
  if (grid.steps() > 0 && result.completed()) {
    record(grid.steps(), grid.final_time(), result.state.u);
  }
  return result;
}

void write_trajectory_csv(const TransientResult& result, std::ostream& os) {
  os << "step,time,linf,l2_error,stability_margin\n";
  os << std::scientific << std::setprecision(10);
  for (const StepRecord& rec : result.trajectory) {
    os << rec.step << ',' << rec.time << ',' << rec.linf << ',';
    if (!std::isnan(rec.l2_error)) os << rec.l2_error;
    os << ',' << rec.stability_margin << '\n';
  }
}

}  // namespace mipdg
