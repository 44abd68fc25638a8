#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <vector>

namespace mipdg {

// Pointwise fully nonlinear operator F(p, q, lambda, t, x) acting on the
// second derivative p, first derivative q, and value lambda.  Stationary
// problems ignore t.
struct DifferentialOperator {
  std::function<double(double p, double q, double lambda, double t, double x)>
      value;
  // Optional analytic partials (dF/dp, dF/dq, dF/dlambda).
  std::function<std::array<double, 3>(double p, double q, double lambda,
                                      double t, double x)>
      gradient;
};

enum class MomentVariant { lf1, lf2 };

// Raised when F produces a non-finite value; carries the offending arguments.
struct NonFiniteEvaluation : std::runtime_error {
  NonFiniteEvaluation(double p1, double p2, double p3, double q, double lambda,
                      double t, double x);
  double p1, p2, p3, q, lambda, t, x;
};

// Lax-Friedrichs style numerical operator on the three candidate second
// derivatives:
//   lf1: F(p2, q, lambda, t, x)            + alpha (p1 - 2 p2 + p3)
//   lf2: F((p1+p2+p3)/3, q, lambda, t, x)  + alpha (p1 - 2 p2 + p3)
// The alpha term is the numerical moment; it vanishes identically when
// p1 = p2 = p3, so the operator collapses to F on consistent arguments.
// g-monotonicity (nondecreasing in p1 and p3, nonincreasing in p2) holds for
// alpha exceeding the relevant slope bound of F.
class MomentOperator {
 public:
  MomentOperator(DifferentialOperator base, double alpha,
                 MomentVariant variant = MomentVariant::lf1);

  const DifferentialOperator& base() const { return base_; }
  double alpha() const { return alpha_; }
  MomentVariant variant() const { return variant_; }
  bool has_analytic_gradient() const {
    return static_cast<bool>(base_.gradient);
  }

  // Throws NonFiniteEvaluation when F comes back non-finite.
  double value(double p1, double p2, double p3, double q, double lambda,
               double t, double x) const;

  // Partials w.r.t. (p1, p2, p3, q, lambda); analytic when the base operator
  // carries a gradient, else central finite differences on F.
  std::array<double, 5> gradient(double p1, double p2, double p3, double q,
                                 double lambda, double t, double x) const;
  std::array<double, 5> gradient_fd(double p1, double p2, double p3, double q,
                                    double lambda, double t, double x) const;

 private:
  DifferentialOperator base_;
  double alpha_;
  MomentVariant variant_;
};

struct OperatorSample {
  double p1, p2, p3, q, lambda;
  double t = 0.0;
  double x = 0.0;
};

struct MonotonicityIssue {
  int sample;    // index into the sample list
  int argument;  // 0, 1, 2 for p1, p2, p3
  double derivative;
};

struct MonotonicityReport {
  // Finite-difference derivatives w.r.t. (p1, p2, p3) per sample.
  std::vector<std::array<double, 3>> derivatives;
  std::vector<MonotonicityIssue> violations;      // strict wrong sign
  std::vector<MonotonicityIssue> boundary_cases;  // vanishing derivative
  bool monotone() const { return violations.empty(); }
};

// Central finite-difference check of g-monotonicity over the samples; the
// step is relative to the argument magnitude.
MonotonicityReport check_g_monotonicity(const MomentOperator& op,
                                        const std::vector<OperatorSample>& samples,
                                        double step = 1e-5);

}  // namespace mipdg
