#pragma once

#include <iosfwd>
#include <vector>

#include "mipdg/elliptic.hpp"

namespace mipdg {

// Fixed-point splitting solver.  Each sweep performs, in order:
//   (2) solve the nonlinear block equation for p2 with u, p1, p3 frozen
//       (independent per-element Newton systems, since the equation couples
//       only coefficients of one element at a time),
//   (3) solve the centered flux equation for u:  B_2 u = f_2 - p2,
//   (4, 5) refresh p1 and p3 from their lifts  p_k = f_k - B_k u,
// until the L2 change in p2 between sweeps drops below the tolerance.  The
// u-solve reuses one factorization; the lifts are direct evaluations in the
// orthonormal basis.

struct SplitConfig {
  double tolerance = 1e-8;  // L2 norm of the p2 change between sweeps
  int max_sweeps = 500;
  // A sweep-to-sweep change beyond this is declared divergent.
  double divergence_bound = 1e8;
  // Inner per-element Newton for the p2 equation.
  NewtonConfig element_newton{1e-12, 50, 8, JacobianKind::finite_difference};
};

struct SweepRecord {
  int sweep;
  double dp2_norm;     // L2 change of p2 in this sweep
  double moment_norm;  // L2 norm of p1 - 2 p2 + p3 after the sweep
};

enum class SplitStatus { converged, no_convergence };

struct SplitReport {
  SplitStatus status = SplitStatus::no_convergence;
  int sweeps = 0;
  double final_change = std::numeric_limits<double>::infinity();
  std::vector<SweepRecord> history;
  bool converged() const { return status == SplitStatus::converged; }
};

struct SplitResult {
  SolverState state;
  SplitReport report;
};

SplitResult split_solve(const EllipticProblem& problem,
                        const AssembledForms& forms, const SolverState& guess,
                        const SplitConfig& config = {});

// Rows of (sweep, dp2_norm, moment_norm).
void write_sweep_csv(const SplitReport& report, std::ostream& os);

}  // namespace mipdg
