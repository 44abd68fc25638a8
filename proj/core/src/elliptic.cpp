#include "mipdg/elliptic.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace mipdg {

namespace {

struct ElementQuad {
  Eigen::VectorXd p1, p2, p3, u, du;
};

ElementQuad element_quad(const SolverState& s, int e) {
  return {s.p1.values_at_quad(e), s.p2.values_at_quad(e),
          s.p3.values_at_quad(e), s.u.values_at_quad(e),
          s.u.derivs_at_quad(e)};
}

void unpack(const Eigen::VectorXd& x, SolverState& state) {
  const int n = static_cast<int>(x.size()) / 4;
  state.u.coeffs() = x.segment(0, n);
  state.p1.coeffs() = x.segment(n, n);
  state.p2.coeffs() = x.segment(2 * n, n);
  state.p3.coeffs() = x.segment(3 * n, n);
}

Eigen::VectorXd pack(const SolverState& state) {
  const int n = static_cast<int>(state.u.coeffs().size());
  Eigen::VectorXd x(4 * n);
  x << state.u.coeffs(), state.p1.coeffs(), state.p2.coeffs(),
      state.p3.coeffs();
  return x;
}

// Gradient of the nonlinear block integrand at one quadrature point.
std::array<double, 5> point_gradient(const MomentOperator& op,
                                     JacobianKind kind, const ElementQuad& eq,
                                     int k, double t, double x) {
  if (kind == JacobianKind::analytic) {
    return op.gradient(eq.p1[k], eq.p2[k], eq.p3[k], eq.du[k], eq.u[k], t, x);
  }
  return op.gradient_fd(eq.p1[k], eq.p2[k], eq.p3[k], eq.du[k], eq.u[k], t, x);
}

using Triplets = std::vector<Eigen::Triplet<double>>;

void append_shifted(Triplets& out, const Eigen::SparseMatrix<double>& mat,
                    int row_offset, int col_offset) {
  for (int c = 0; c < mat.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(mat, c); it; ++it) {
      out.emplace_back(row_offset + static_cast<int>(it.row()),
                       col_offset + static_cast<int>(it.col()), it.value());
    }
  }
}

// Element-local derivative blocks of the nonlinear residual: d/d(u) and
// d/d(p_k) as sparse matrices over the scalar dof space.
struct NonlinearBlocks {
  Eigen::SparseMatrix<double> du;
  std::array<Eigen::SparseMatrix<double>, 3> dp;
};

NonlinearBlocks nonlinear_blocks(const EllipticProblem& problem,
                                 const DGSpace& s, const SolverState& state,
                                 JacobianKind kind) {
  const int n = s.num_dofs();
  const int m = s.dofs_per_element();
  const int q = s.quadrature().size();
  Triplets tu;
  std::array<Triplets, 3> tp;
  for (int e = 0; e < s.mesh().num_elements(); ++e) {
    const ElementQuad eq = element_quad(state, e);
    for (int k = 0; k < q; ++k) {
      const auto g = point_gradient(problem.op, kind, eq, k, problem.time,
                                    s.quad_point(e, k));
      const double w = s.quad_weight(e, k);
      for (int r = 0; r < m; ++r) {
        const double phi_r = s.scale(e) * s.basis_at_quad()(k, r);
        for (int c = 0; c < m; ++c) {
          const double phi_c = s.scale(e) * s.basis_at_quad()(k, c);
          const double dphi_c = s.deriv_scale(e) * s.basis_deriv_at_quad()(k, c);
          const int row = s.dof(e, r);
          const int col = s.dof(e, c);
          tu.emplace_back(row, col, w * (g[3] * dphi_c + g[4] * phi_c) * phi_r);
          for (int blk = 0; blk < 3; ++blk) {
            tp[blk].emplace_back(row, col, w * g[blk] * phi_c * phi_r);
          }
        }
      }
    }
  }
  NonlinearBlocks blocks;
  blocks.du.resize(n, n);
  blocks.du.setFromTriplets(tu.begin(), tu.end());
  for (int blk = 0; blk < 3; ++blk) {
    blocks.dp[blk].resize(n, n);
    blocks.dp[blk].setFromTriplets(tp[blk].begin(), tp[blk].end());
  }
  return blocks;
}

Eigen::VectorXd nonlinear_residual(const EllipticProblem& problem,
                                   const DGSpace& s, const SolverState& state) {
  const int n = s.num_dofs();
  const int m = s.dofs_per_element();
  const int q = s.quadrature().size();
  Eigen::VectorXd r(n);
  Eigen::VectorXd fvals(q);
  for (int e = 0; e < s.mesh().num_elements(); ++e) {
    const ElementQuad eq = element_quad(state, e);
    for (int k = 0; k < q; ++k) {
      fvals[k] = s.quad_weight(e, k) *
                 problem.op.value(eq.p1[k], eq.p2[k], eq.p3[k], eq.du[k],
                                  eq.u[k], problem.time, s.quad_point(e, k));
    }
    r.segment(e * m, m) = s.scale(e) * (s.basis_at_quad().transpose() * fvals);
  }
  if (problem.source) {
    if (problem.source->coeffs().size() != n) {
      throw std::invalid_argument("source lives in a different space");
    }
    // (source, phi) in the orthonormal basis is the coefficient vector
    // through the mass matrix.
    r -= problem.source->coeffs();
  }
  return r;
}

struct NewtonSystem {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residual;
  std::function<Eigen::SparseMatrix<double>(const Eigen::VectorXd&)> jacobian;
};

NewtonReport run_newton(const NewtonSystem& sys, Eigen::VectorXd& x,
                        const NewtonConfig& cfg) {
  NewtonReport report;
  const auto safe_residual = [&](const Eigen::VectorXd& y,
                                 Eigen::VectorXd& out) {
    try {
      out = sys.residual(y);
    } catch (const NonFiniteEvaluation&) {
      return false;
    }
    return out.allFinite();
  };

  Eigen::VectorXd r;
  if (!safe_residual(x, r)) {
    report.status = SolveStatus::damping_failure;
    return report;
  }
  double rn = r.lpNorm<Eigen::Infinity>();

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    if (rn <= cfg.tolerance) {
      report.status = SolveStatus::converged;
      report.final_residual = rn;
      return report;
    }

    Eigen::SparseMatrix<double> jac;
    try {
      jac = sys.jacobian(x);
    } catch (const NonFiniteEvaluation&) {
      report.status = SolveStatus::damping_failure;
      report.final_residual = rn;
      return report;
    }

    Eigen::VectorXd x_new, r_new;
    double rn_new = 0.0;
    int halvings_used = 0;
    const auto try_direction = [&](const Eigen::VectorXd& d) {
      double lambda = 1.0;
      for (int h = 0; h <= cfg.max_halvings; ++h, lambda *= 0.5) {
        Eigen::VectorXd cand = x + lambda * d;
        Eigen::VectorXd rc;
        if (safe_residual(cand, rc)) {
          const double rcn = rc.lpNorm<Eigen::Infinity>();
          if (rcn < rn) {
            x_new.swap(cand);
            r_new.swap(rc);
            rn_new = rcn;
            halvings_used = h;
            return true;
          }
        }
      }
      return false;
    };

    bool stepped = false;
    {
      Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(jac);
      if (lu.info() == Eigen::Success) {
        const Eigen::VectorXd d = lu.solve(-r);
        if (d.allFinite()) stepped = try_direction(d);
      }
    }
    if (!stepped) {
      // Tikhonov-regularized least-squares direction for singular or stalled
      // Jacobians; escalate the damping weight until something descends.
      const Eigen::MatrixXd dense(jac);
      const Eigen::MatrixXd jtj = dense.transpose() * dense;
      const Eigen::VectorXd jtr = dense.transpose() * r;
      const double scale = std::max(jtj.diagonal().maxCoeff(), 1e-12);
      for (double mu = 1e-10 * scale; mu <= 1e2 * scale && !stepped;
           mu *= 100.0) {
        Eigen::MatrixXd a = jtj;
        a.diagonal().array() += mu;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
        if (ldlt.info() != Eigen::Success) continue;
        const Eigen::VectorXd d = ldlt.solve(-jtr);
        if (!d.allFinite() || d.norm() == 0.0) continue;
        stepped = try_direction(d);
      }
    }
    if (!stepped) {
      report.status = SolveStatus::damping_failure;
      report.final_residual = rn;
      return report;
    }

    report.history.push_back({iter, rn, (x_new - x).norm(), halvings_used});
    report.iterations = iter;
    x.swap(x_new);
    r.swap(r_new);
    rn = rn_new;
  }

  report.status =
      rn <= cfg.tolerance ? SolveStatus::converged : SolveStatus::max_iterations;
  report.final_residual = rn;
  return report;
}

}  // namespace

Eigen::VectorXd residual(const EllipticProblem& problem,
                         const AssembledForms& forms,
                         const SolverState& state) {
  const DGSpace& s = *forms.space;
  const int n = s.num_dofs();
  Eigen::VectorXd r(4 * n);
  r.head(n) = nonlinear_residual(problem, s, state);
  for (int k = 0; k < 3; ++k) {
    r.segment((k + 1) * n, n) = forms.mass * state.p(k).coeffs() +
                                forms.flux[k] * state.u.coeffs() -
                                forms.boundary_vector(k, problem.ua, problem.ub);
  }
  return r;
}

Eigen::SparseMatrix<double> jacobian(const EllipticProblem& problem,
                                     const AssembledForms& forms,
                                     const SolverState& state,
                                     JacobianKind kind) {
  const DGSpace& s = *forms.space;
  const int n = s.num_dofs();
  const NonlinearBlocks blocks = nonlinear_blocks(problem, s, state, kind);
  Triplets t;
  append_shifted(t, blocks.du, 0, 0);
  for (int k = 0; k < 3; ++k) {
    append_shifted(t, blocks.dp[k], 0, (k + 1) * n);
    append_shifted(t, forms.flux[k], (k + 1) * n, 0);
    append_shifted(t, forms.mass, (k + 1) * n, (k + 1) * n);
  }
  Eigen::SparseMatrix<double> jac(4 * n, 4 * n);
  jac.setFromTriplets(t.begin(), t.end());
  jac.makeCompressed();
  return jac;
}

SolveResult solve(const EllipticProblem& problem, const AssembledForms& forms,
                  const SolverState& guess, const NewtonConfig& config) {
  SolverState work = guess;

  NewtonSystem sys;
  sys.residual = [&](const Eigen::VectorXd& x) {
    unpack(x, work);
    return residual(problem, forms, work);
  };
  sys.jacobian = [&](const Eigen::VectorXd& x) {
    unpack(x, work);
    return jacobian(problem, forms, work, config.jacobian);
  };

  Eigen::VectorXd x = pack(guess);
  NewtonReport report = run_newton(sys, x, config);
  SolveResult result{guess, std::move(report)};
  unpack(x, result.state);
  return result;
}

SolveResult solve_reduced(const EllipticProblem& problem,
                          const AssembledForms& forms,
                          const DGFunction& u_guess,
                          const NewtonConfig& config) {
  const DGSpace& s = *forms.space;
  auto space = forms.space;
  SolverState work(space);

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> mass_solver(forms.mass);
  const auto lift = [&](const Eigen::VectorXd& u) {
    work.u.coeffs() = u;
    for (int k = 0; k < 3; ++k) {
      work.p(k).coeffs() = mass_solver.solve(
          forms.boundary_vector(k, problem.ua, problem.ub) -
          forms.flux[k] * u);
    }
  };

  NewtonSystem sys;
  sys.residual = [&](const Eigen::VectorXd& x) {
    lift(x);
    return nonlinear_residual(problem, s, work);
  };
  sys.jacobian = [&](const Eigen::VectorXd& x) {
    lift(x);
    const NonlinearBlocks blocks =
        nonlinear_blocks(problem, s, work, config.jacobian);
    Eigen::SparseMatrix<double> jac = blocks.du;
    for (int k = 0; k < 3; ++k) {
      // dp_k/du = -M^{-1} B_k; the mass matrix is the identity here.
      jac = jac - Eigen::SparseMatrix<double>(blocks.dp[k] * forms.flux[k]);
    }
    jac.makeCompressed();
    return jac;
  };

  Eigen::VectorXd x = u_guess.coeffs();
  NewtonReport report = run_newton(sys, x, config);
  lift(x);
  SolveResult result{work, std::move(report)};
  return result;
}

SolverState secant_initial_guess(const EllipticProblem& problem,
                                 std::shared_ptr<const DGSpace> space) {
  SolverState state(space);
  const double a = space->mesh().a();
  const double b = space->mesh().b();
  const double ua = problem.ua;
  const double ub = problem.ub;
  state.u = l2_project(
      space, [=](double x) { return ua + (ub - ua) * (x - a) / (b - a); });
  return state;
}

void write_iteration_csv(const NewtonReport& report, std::ostream& os) {
  os << "iteration,residual_norm,step_norm,halvings\n";
  os << std::scientific << std::setprecision(10);
  for (const auto& rec : report.history) {
    os << rec.iteration << ',' << rec.residual_norm << ',' << rec.step_norm
       << ',' << rec.halvings << '\n';
  }
}

}  // namespace mipdg
