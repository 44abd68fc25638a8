#include "mipdg/problems.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace mipdg {
namespace {

constexpr double pi = std::numbers::pi;

double sign_with_zero(double v) { return v > 0.0 ? 1.0 : v < 0.0 ? -1.0 : 0.0; }

// test2 source: chosen so u(x) = sin(x|x|) solves -u_xx^3 + |u_x| + S = 0.
double test2_source(double x) {
  const double bracket =
      2.0 * sign_with_zero(x) * std::cos(x * x) - 4.0 * x * x * std::sin(x * std::abs(x));
  return bracket * bracket * bracket - 2.0 * std::abs(x * std::cos(x * x));
}

// test3 source: makes the infimum vanish along u(x) = x^2 ln x.  The factor
// 2 ln x + 1 stays positive on the domain (1.2, 4), so no pole is crossed.
double test3_source(double x) {
  const double lx = std::log(x);
  const double numerator = 4.0 * lx * lx + 12.0 * lx + 9.0 -
                           8.0 * std::pow(x, 4) * lx * lx -
                           4.0 * std::pow(x, 4) * lx;
  return numerator / (4.0 * std::pow(x, 3) * (2.0 * lx + 1.0));
}

// test5 source: chosen so u(x,t) = e^{(t+1)x} solves
// u_t - u_x ln(u_xx + 1) + S = 0.
double test5_source(double x, double t) {
  const double e = std::exp((t + 1.0) * x);
  return e * ((t + 1.0) * std::log((t + 1.0) * (t + 1.0) * e + 1.0) - x);
}

TestCase make_test1() {
  TestCase tc;
  tc.id = "test1";
  tc.xa = 0.0;
  tc.xb = 1.0;
  tc.op.value = [](double p, double, double, double, double) {
    return -p * p + 1.0;
  };
  tc.op.gradient = [](double p, double, double, double, double) {
    return std::array<double, 3>{-2.0 * p, 0.0, 0.0};
  };
  tc.boundary_a = [](double) { return 0.0; };
  tc.boundary_b = [](double) { return 0.5; };
  tc.exact.push_back({"u+",
                      [](double x, double) { return 0.5 * x * x; },
                      [](double x, double) { return x; },
                      [](double, double) { return 1.0; },
                      [](double, double) { return 0.0; }});
  tc.exact.push_back({"u-",
                      [](double x, double) { return -0.5 * x * x + x; },
                      [](double x, double) { return 1.0 - x; },
                      [](double, double) { return -1.0; },
                      [](double, double) { return 0.0; }});
  tc.recommended.penalty.gamma = {1.0, 1.1, 1.0};
  tc.recommended.alpha = 2.0;
  return tc;
}

TestCase make_test2() {
  TestCase tc;
  tc.id = "test2";
  tc.xa = -2.0;
  tc.xb = 2.0;
  tc.op.value = [](double p, double q, double, double, double x) {
    return -p * p * p + std::abs(q) + test2_source(x);
  };
  tc.op.gradient = [](double p, double q, double, double, double) {
    return std::array<double, 3>{-3.0 * p * p, sign_with_zero(q), 0.0};
  };
  // The printed boundary pair contradicts the exact solution's sign at the
  // left endpoint; the data here is taken from u itself.
  tc.boundary_a = [](double) { return -std::sin(4.0); };
  tc.boundary_b = [](double) { return std::sin(4.0); };
  tc.exact.push_back(
      {"u",
       [](double x, double) { return std::sin(x * std::abs(x)); },
       [](double x, double) { return 2.0 * std::abs(x) * std::cos(x * x); },
       [](double x, double) {
         return sign_with_zero(x) *
                (2.0 * std::cos(x * x) - 4.0 * x * x * std::sin(x * x));
       },
       [](double, double) { return 0.0; }});
  tc.recommended.penalty.gamma = {2.0, 2.5, 2.0};
  tc.recommended.alpha = 4.0;
  return tc;
}

TestCase make_test3() {
  TestCase tc;
  tc.id = "test3";
  tc.xa = 1.2;
  tc.xb = 4.0;
  tc.op.value = [](double p, double q, double lambda, double, double x) {
    return evaluate_test3_operator(p, q, lambda, x);
  };
  // Envelope derivative: differentiate at the frozen minimizer.
  tc.op.gradient = [](double p, double q, double, double, double x) {
    const double theta = test3_minimizer(p, q, x);
    return std::array<double, 3>{-theta, theta * theta * x * x, 1.0 / x};
  };
  tc.boundary_a = [](double) { return 1.44 * std::log(1.2); };
  tc.boundary_b = [](double) { return 16.0 * std::log(4.0); };
  tc.exact.push_back(
      {"u",
       [](double x, double) { return x * x * std::log(x); },
       [](double x, double) { return 2.0 * x * std::log(x) + x; },
       [](double x, double) { return 2.0 * std::log(x) + 3.0; },
       [](double, double) { return 0.0; }});
  tc.recommended.penalty.gamma = {2.0, 2.5, 2.0};
  tc.recommended.alpha = 4.0;
  return tc;
}

TestCase make_test4() {
  TestCase tc;
  tc.id = "test4";
  tc.xa = 0.0;
  tc.xb = 1.0;
  tc.time_dependent = true;
  tc.final_time = 1.0;
  tc.op.value = [](double p, double, double lambda, double t, double x) {
    return -p * lambda + 0.5 * x * x + std::pow(t, 4) - 4.0 * std::pow(t, 3) +
           1.0;
  };
  tc.op.gradient = [](double p, double, double lambda, double, double) {
    return std::array<double, 3>{-lambda, 0.0, -p};
  };
  // The printed data omits the additive constant of the exact solution; the
  // values here are u(0,t), u(1,t), u(x,0) of u = x^2/2 + t^4 + 1 itself.
  tc.boundary_a = [](double t) { return 1.0 + std::pow(t, 4); };
  tc.boundary_b = [](double t) { return 1.5 + std::pow(t, 4); };
  tc.initial = [](double x) { return 1.0 + 0.5 * x * x; };
  tc.exact.push_back(
      {"u",
       [](double x, double t) { return 0.5 * x * x + std::pow(t, 4) + 1.0; },
       [](double x, double) { return x; },
       [](double, double) { return 1.0; },
       [](double, double t) { return 4.0 * std::pow(t, 3); }});
  tc.recommended.penalty.gamma = {2.0, 2.5, 2.0};
  tc.recommended.alpha = 2.0;
  tc.recommended.kappa_t = 0.002;
  tc.recommended.dt = 0.001;
  return tc;
}

TestCase make_test5() {
  TestCase tc;
  tc.id = "test5";
  tc.xa = 0.0;
  tc.xb = 2.0;
  tc.time_dependent = true;
  tc.final_time = 3.10;
  tc.op.value = [](double p, double q, double, double t, double x) {
    // Outside the log's domain the value is reported non-finite so the
    // nonlinear solvers back off instead of aborting.
    if (p + 1.0 <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return -q * std::log(p + 1.0) + test5_source(x, t);
  };
  tc.op.gradient = [](double p, double q, double, double, double) {
    if (p + 1.0 <= 0.0) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      return std::array<double, 3>{nan, nan, 0.0};
    }
    return std::array<double, 3>{-q / (p + 1.0), -std::log(p + 1.0), 0.0};
  };
  tc.boundary_a = [](double) { return 1.0; };
  tc.boundary_b = [](double t) { return std::exp(2.0 * (t + 1.0)); };
  tc.initial = [](double x) { return std::exp(x); };
  tc.exact.push_back(
      {"u",
       [](double x, double t) { return std::exp((t + 1.0) * x); },
       [](double x, double t) { return (t + 1.0) * std::exp((t + 1.0) * x); },
       [](double x, double t) {
         return (t + 1.0) * (t + 1.0) * std::exp((t + 1.0) * x);
       },
       [](double x, double t) { return x * std::exp((t + 1.0) * x); }});
  tc.recommended.penalty.gamma = {2.0, 2.5, 2.0};
  tc.recommended.alpha = 4.0;
  tc.recommended.kappa_t = 0.0025;
  tc.recommended.dt = 0.0005;
  return tc;
}

TestCase make_test6() {
  TestCase tc;
  tc.id = "test6";
  tc.xa = 0.0;
  tc.xb = 2.0 * pi;
  tc.time_dependent = true;
  tc.final_time = 3.10;
  tc.op.value = [](double p, double, double, double t, double x) {
    return evaluate_test6_operator(p, t, x);
  };
  tc.op.gradient = [](double p, double, double, double, double) {
    return std::array<double, 3>{p < 0.0 ? -1.0 : -0.5, 0.0, 0.0};
  };
  tc.boundary_a = [](double) { return 0.0; };
  tc.boundary_b = [](double) { return 0.0; };
  tc.initial = [](double x) { return std::sin(x); };
  tc.exact.push_back(
      {"u",
       [](double x, double t) { return std::cos(t) * std::sin(x); },
       [](double x, double t) { return std::cos(t) * std::cos(x); },
       [](double x, double t) { return -std::cos(t) * std::sin(x); },
       [](double x, double t) { return -std::sin(t) * std::sin(x); }});
  tc.recommended.penalty.gamma = {2.0, 2.5, 2.0};
  tc.recommended.alpha = 2.0;
  tc.recommended.kappa_t = 0.002;
  tc.recommended.dt = 0.0062;
  return tc;
}

const std::vector<TestCase>& registry() {
  static const std::vector<TestCase> cases = [] {
    std::vector<TestCase> all;
    all.push_back(make_test1());
    all.push_back(make_test2());
    all.push_back(make_test3());
    all.push_back(make_test4());
    all.push_back(make_test5());
    all.push_back(make_test6());
    return all;
  }();
  return cases;
}

}  // namespace

EllipticProblem TestCase::elliptic(double alpha, double time,
                                   MomentVariant variant) const {
  EllipticProblem problem{MomentOperator(op, alpha, variant), boundary_a(time),
                          boundary_b(time), time, std::nullopt};
  return problem;
}

ParabolicProblem TestCase::parabolic(double alpha,
                                     MomentVariant variant) const {
  if (!time_dependent)
    throw std::logic_error(id + " is stationary; no initial-boundary form");
  ParabolicProblem problem{MomentOperator(op, alpha, variant), final_time,
                           boundary_a, boundary_b, initial};
  return problem;
}

const std::vector<std::string>& test_case_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    for (const auto& tc : registry()) out.push_back(tc.id);
    return out;
  }();
  return ids;
}

const TestCase& get_test_case(std::string_view id) {
  for (const auto& tc : registry())
    if (tc.id == id) return tc;
  throw std::invalid_argument("unknown test id: " + std::string(id));
}

double evaluate_test3_operator(double p, double q, double lambda, double x) {
  const double a = x * x * q;
  const double c = lambda / x + test3_source(x);
  auto g = [&](double theta) { return a * theta * theta - p * theta + c; };
  double best = c;  // theta -> 0+ limit
  best = std::min(best, g(1.0));
  if (a > 0.0) {
    const double vertex = p / (2.0 * a);
    if (vertex > 0.0 && vertex <= 1.0) best = std::min(best, g(vertex));
  }
  return best;
}

double test3_minimizer(double p, double q, double x) {
  const double a = x * x * q;
  const double c = 0.0;  // the constant shifts all candidates equally
  auto g = [&](double theta) { return a * theta * theta - p * theta + c; };
  double best_theta = 0.0;
  double best = c;
  if (g(1.0) < best) {
    best = g(1.0);
    best_theta = 1.0;
  }
  if (a > 0.0) {
    const double vertex = p / (2.0 * a);
    if (vertex > 0.0 && vertex <= 1.0 && g(vertex) < best) best_theta = vertex;
  }
  return best_theta;
}

double evaluate_test6_operator(double p, double t, double x) {
  const double k = test6_coefficient(t, x) * std::cos(t) * std::sin(x) -
                   std::sin(t) * std::sin(x);
  return -(std::min(p, 0.5 * p) + k);
}

int test6_minimizer(double p) { return p < 0.0 ? 1 : 2; }

double test6_coefficient(double t, double x) {
  const bool first = 0.0 < t && t <= 0.5 * pi && 0.0 < x && x <= pi;
  const bool second = 0.5 * pi < t && t <= pi && pi < x && x < 2.0 * pi;
  return (first || second) ? 1.0 : 0.5;
}

}  // namespace mipdg
