#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "mipdg/dg_forms.hpp"
#include "mipdg/elliptic.hpp"
#include "mipdg/numerical_operator.hpp"
#include "mipdg/parabolic.hpp"

namespace mipdg {

// Closed-form solution with every derivative the residual self-checks and
// error columns need; stationary cases ignore t.
struct ExactSolution {
  std::string label;  // "u" for a unique solution, else the branch name
  std::function<double(double x, double t)> u, ux, uxx, ut;
};

// Parameters the reference tables were generated with.  Zero entries mean
// "not applicable" (kappa_t for stationary cases, dt for explicit-only runs).
struct RecommendedParameters {
  PenaltyConfig penalty;
  double alpha = 2.0;
  double kappa_t = 0.0;
  double dt = 0.0;
};

// One benchmark problem: pointwise operator, domain, boundary/initial data,
// and exact solution(s).  Time-dependent data is exposed through callbacks;
// stationary cases evaluate them at a frozen time (default 0).
struct TestCase {
  std::string id;
  double xa = 0.0;
  double xb = 1.0;
  bool time_dependent = false;
  double final_time = 0.0;
  DifferentialOperator op;
  std::function<double(double t)> boundary_a, boundary_b;
  std::function<double(double x)> initial;  // null for stationary cases
  std::vector<ExactSolution> exact;  // two entries for the double-root case
  RecommendedParameters recommended;

  // Stationary restriction at the given time, with the moment weight alpha.
  EllipticProblem elliptic(double alpha, double time = 0.0,
                           MomentVariant variant = MomentVariant::lf1) const;
  // Initial-boundary value problem; throws std::logic_error for stationary
  // cases, which carry no initial datum.
  ParabolicProblem parabolic(double alpha,
                             MomentVariant variant = MomentVariant::lf1) const;
};

// Registered ids, in registry order: test1 .. test6.
const std::vector<std::string>& test_case_ids();

// Throws std::invalid_argument for an unknown id.
const TestCase& get_test_case(std::string_view id);

// Bellman kernel of test3: exact infimum over theta in (0, 1] of
//   g(theta) = (x^2 q) theta^2 - p theta + lambda / x + S(x).
// The theta -> 0+ limit counts as a candidate, so a value is returned even
// when the infimum is not attained.
double evaluate_test3_operator(double p, double q, double lambda, double x);
// Minimizing theta of the same quadratic; 0 encodes the theta -> 0+ limit.
double test3_minimizer(double p, double q, double x);

// Two-control kernel of test6:
//   -min_{theta in {1,2}} { A_theta p + c(x,t) cos(t) sin(x) - sin(t) sin(x) }
// with A_1 = 1, A_2 = 1/2.
double evaluate_test6_operator(double p, double t, double x);
// Minimizing control index; the tie at p = 0 resolves to 2.
int test6_minimizer(double p);
// Piecewise switch c(x,t): 1 on the two (t, x) quadrants where
// cos(t) sin(x) >= 0, 1/2 otherwise; boundary inequalities are literal
// (t and x exactly on the quadrant edges keep the printed <= / < mix).
double test6_coefficient(double t, double x);

}  // namespace mipdg
