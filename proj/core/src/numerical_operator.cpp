#include "mipdg/numerical_operator.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace mipdg {

namespace {

std::string describe(double p1, double p2, double p3, double q, double lambda,
                     double t, double x) {
  std::ostringstream os;
  os << "non-finite operator value at x=" << x << " t=" << t << " p1=" << p1
     << " p2=" << p2 << " p3=" << p3 << " q=" << q << " lambda=" << lambda;
  return os.str();
}

}  // namespace

NonFiniteEvaluation::NonFiniteEvaluation(double p1, double p2, double p3,
                                         double q, double lambda, double t,
                                         double x)
    : std::runtime_error(describe(p1, p2, p3, q, lambda, t, x)),
      p1(p1),
      p2(p2),
      p3(p3),
      q(q),
      lambda(lambda),
      t(t),
      x(x) {}

MomentOperator::MomentOperator(DifferentialOperator base, double alpha,
                               MomentVariant variant)
    : base_(std::move(base)), alpha_(alpha), variant_(variant) {
  if (!base_.value) {
    throw std::invalid_argument("differential operator has no value callback");
  }
}

double MomentOperator::value(double p1, double p2, double p3, double q,
                             double lambda, double t, double x) const {
  // Written so that equal arguments collapse to F(p2, ...) exactly.
  const double moment = (p1 - p2) + (p3 - p2);
  const double p =
      variant_ == MomentVariant::lf1 ? p2 : p2 + moment / 3.0;
  const double result = base_.value(p, q, lambda, t, x) + alpha_ * moment;
  if (!std::isfinite(result)) {
    throw NonFiniteEvaluation(p1, p2, p3, q, lambda, t, x);
  }
  return result;
}

std::array<double, 5> MomentOperator::gradient(double p1, double p2, double p3,
                                               double q, double lambda,
                                               double t, double x) const {
  if (!base_.gradient) return gradient_fd(p1, p2, p3, q, lambda, t, x);
  const double moment = (p1 - p2) + (p3 - p2);
  const double p = variant_ == MomentVariant::lf1 ? p2 : p2 + moment / 3.0;
  const auto [fp, fq, fl] = base_.gradient(p, q, lambda, t, x);
  if (variant_ == MomentVariant::lf1) {
    return {alpha_, fp - 2.0 * alpha_, alpha_, fq, fl};
  }
  const double third = fp / 3.0;
  return {third + alpha_, third - 2.0 * alpha_, third + alpha_, fq, fl};
}

std::array<double, 5> MomentOperator::gradient_fd(double p1, double p2,
                                                  double p3, double q,
                                                  double lambda, double t,
                                                  double x) const {
  const double rel = 1e-6;
  std::array<double, 5> args{p1, p2, p3, q, lambda};
  std::array<double, 5> grad{};
  for (int i = 0; i < 5; ++i) {
    const double h = rel * std::max(1.0, std::abs(args[i]));
    auto shifted = args;
    shifted[i] = args[i] + h;
    const double up =
        value(shifted[0], shifted[1], shifted[2], shifted[3], shifted[4], t, x);
    shifted[i] = args[i] - h;
    const double down =
        value(shifted[0], shifted[1], shifted[2], shifted[3], shifted[4], t, x);
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

MonotonicityReport check_g_monotonicity(
    const MomentOperator& op, const std::vector<OperatorSample>& samples,
    double step) {
  MonotonicityReport report;
  report.derivatives.reserve(samples.size());
  constexpr double zero_tol = 1e-8;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const OperatorSample& s = samples[i];
    std::array<double, 3> d{};
    std::array<double, 3> args{s.p1, s.p2, s.p3};
    for (int k = 0; k < 3; ++k) {
      const double h = step * std::max(1.0, std::abs(args[k]));
      auto shifted = args;
      shifted[k] = args[k] + h;
      const double up = op.value(shifted[0], shifted[1], shifted[2], s.q,
                                 s.lambda, s.t, s.x);
      shifted[k] = args[k] - h;
      const double down = op.value(shifted[0], shifted[1], shifted[2], s.q,
                                   s.lambda, s.t, s.x);
      d[k] = (up - down) / (2.0 * h);
    }
    report.derivatives.push_back(d);
    for (int k = 0; k < 3; ++k) {
      const double want_sign = k == 1 ? -1.0 : 1.0;
      const double signed_d = want_sign * d[k];
      if (signed_d < -zero_tol) {
        report.violations.push_back({static_cast<int>(i), k, d[k]});
      } else if (std::abs(d[k]) <= zero_tol) {
        report.boundary_cases.push_back({static_cast<int>(i), k, d[k]});
      }
    }
  }
  return report;
}

}  // namespace mipdg
