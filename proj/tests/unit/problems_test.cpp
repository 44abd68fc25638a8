#include "mipdg/problems.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace mipdg {
namespace {

constexpr double pi = std::numbers::pi;

// Every registered exact solution must satisfy u_t + F(u_xx, u_x, u, t, x) = 0
// pointwise; the sampled residual is the self-check for the hand-derived
// source terms.
TEST(ProblemRegistry, ExactSolutionsSatisfyTheirEquations) {
  std::mt19937 gen(42);
  for (const auto& id : test_case_ids()) {
    const TestCase& tc = get_test_case(id);
    std::uniform_real_distribution<double> xs(tc.xa, tc.xb);
    std::uniform_real_distribution<double> ts(0.0, tc.final_time);
    ASSERT_FALSE(tc.exact.empty()) << id;
    for (const auto& ex : tc.exact) {
      for (int i = 0; i < 100; ++i) {
        const double x = xs(gen);
        const double t = tc.time_dependent ? ts(gen) : 0.0;
        const double residual = ex.ut(x, t) + tc.op.value(ex.uxx(x, t),
                                                          ex.ux(x, t),
                                                          ex.u(x, t), t, x);
        ASSERT_LT(std::abs(residual), 1e-8)
            << id << "/" << ex.label << " at x=" << x << " t=" << t;
      }
    }
  }
}

TEST(ProblemRegistry, BoundaryDataMatchesExactSolutions) {
  std::mt19937 gen(7);
  for (const auto& id : test_case_ids()) {
    const TestCase& tc = get_test_case(id);
    std::uniform_real_distribution<double> ts(0.0, tc.final_time);
    for (int i = 0; i < 20; ++i) {
      const double t = tc.time_dependent ? ts(gen) : 0.0;
      // The double-root case pins both branches to the same boundary pair.
      for (const auto& ex : tc.exact) {
        EXPECT_NEAR(tc.boundary_a(t), ex.u(tc.xa, t), 1e-12) << id;
        EXPECT_NEAR(tc.boundary_b(t), ex.u(tc.xb, t), 1e-12) << id;
      }
      if (tc.time_dependent) {
        const double x = tc.xa + 0.3 * (tc.xb - tc.xa);
        EXPECT_NEAR(tc.initial(x), tc.exact[0].u(x, 0.0), 1e-12) << id;
      }
    }
  }
}

TEST(ProblemRegistry, KnownPointValues) {
  const TestCase& t1 = get_test_case("test1");
  ASSERT_EQ(t1.exact.size(), 2u);
  EXPECT_DOUBLE_EQ(t1.exact[0].u(0.5, 0.0), 0.125);   // u+
  EXPECT_DOUBLE_EQ(t1.exact[1].u(0.5, 0.0), 0.375);   // u-

  const TestCase& t2 = get_test_case("test2");
  EXPECT_NEAR(t2.exact[0].u(std::sqrt(pi / 2.0), 0.0), 1.0, 1e-14);
  // Residual of the printed source at x = 1.
  const auto& e2 = t2.exact[0];
  EXPECT_NEAR(t2.op.value(e2.uxx(1.0, 0.0), e2.ux(1.0, 0.0), e2.u(1.0, 0.0),
                          0.0, 1.0),
              0.0, 1e-10);

  const TestCase& t3 = get_test_case("test3");
  EXPECT_NEAR(t3.exact[0].u(2.0, 0.0), 4.0 * std::log(2.0), 1e-14);
}

TEST(ProblemRegistry, UnknownIdThrows) {
  EXPECT_THROW(get_test_case("test7"), std::invalid_argument);
  EXPECT_THROW(get_test_case(""), std::invalid_argument);
}

TEST(ProblemRegistry, StationaryCasesRefuseParabolicForm) {
  EXPECT_THROW(get_test_case("test1").parabolic(2.0), std::logic_error);
  EXPECT_THROW(get_test_case("test3").parabolic(4.0), std::logic_error);
}

TEST(ProblemRegistry, EllipticRestrictionFreezesTime) {
  const TestCase& tc = get_test_case("test4");
  const EllipticProblem at0 = tc.elliptic(2.0);
  EXPECT_DOUBLE_EQ(at0.ua, 1.0);
  EXPECT_DOUBLE_EQ(at0.ub, 1.5);
  EXPECT_DOUBLE_EQ(at0.time, 0.0);
  const EllipticProblem later = tc.elliptic(2.0, 0.5);
  EXPECT_DOUBLE_EQ(later.ua, 1.0 + 0.0625);
  EXPECT_DOUBLE_EQ(later.time, 0.5);
  EXPECT_DOUBLE_EQ(later.op.alpha(), 2.0);
}

TEST(ProblemRegistry, RecommendedParametersMatchTheTables) {
  const TestCase& t1 = get_test_case("test1");
  EXPECT_DOUBLE_EQ(t1.recommended.penalty.gamma[1], 1.1);
  EXPECT_DOUBLE_EQ(t1.recommended.alpha, 2.0);
  const TestCase& t5 = get_test_case("test5");
  EXPECT_DOUBLE_EQ(t5.recommended.kappa_t, 0.0025);
  EXPECT_DOUBLE_EQ(t5.final_time, 3.10);
  const TestCase& t6 = get_test_case("test6");
  EXPECT_DOUBLE_EQ(t6.xb, 2.0 * pi);
  EXPECT_DOUBLE_EQ(t6.recommended.kappa_t, 0.002);
}

TEST(ProblemRegistry, AnalyticGradientsMatchFiniteDifferences) {
  // One smooth sample per case, away from the kinks (q = 0 in test2, the
  // control switches in test3/test6, the log wall in test5).
  struct Sample {
    const char* id;
    double p1, p2, p3, q, lambda, t, x;
  };
  const Sample samples[] = {
      {"test1", 0.4, 0.3, 0.2, 0.1, 0.5, 0.0, 0.5},
      {"test2", 0.4, 0.3, 0.2, 0.7, -0.1, 0.0, 1.3},
      {"test3", 0.8, 1.0, 1.2, 0.5, 2.0, 0.0, 2.0},
      {"test4", 0.4, 0.9, 0.2, 0.3, 1.2, 0.4, 0.6},
      {"test5", 0.1, 0.5, 0.3, 0.3, 2.0, 0.2, 1.0},
      {"test6", 0.1, 0.4, 0.3, 0.2, 0.1, 1.0, 2.0},
  };
  for (const auto& s : samples) {
    const TestCase& tc = get_test_case(s.id);
    const MomentOperator op(tc.op, tc.recommended.alpha);
    ASSERT_TRUE(op.has_analytic_gradient()) << s.id;
    const auto a = op.gradient(s.p1, s.p2, s.p3, s.q, s.lambda, s.t, s.x);
    const auto fd = op.gradient_fd(s.p1, s.p2, s.p3, s.q, s.lambda, s.t, s.x);
    for (int i = 0; i < 5; ++i) {
      EXPECT_NEAR(a[i], fd[i], 1e-5 * std::max(1.0, std::abs(a[i])))
          << s.id << " component " << i;
    }
  }
}

TEST(Test3Operator, InteriorVertexValue) {
  // q > 0 with p = x^2 q puts the vertex at theta = 1/2; there the quadratic
  // equals -p/4 + lambda/x + S(x).
  const double x = 2.0, q = 1.0, lambda = 3.0;
  const double p = x * x * q;
  // p = 0 with q > 0 parks the vertex at 0, so the operator returns S(x).
  const double s = evaluate_test3_operator(0.0, q, 0.0, x);
  EXPECT_NEAR(evaluate_test3_operator(p, q, lambda, x),
              -p / 4.0 + lambda / x + s, 1e-12);
  EXPECT_NEAR(test3_minimizer(p, q, x), 0.5, 1e-15);
}

TEST(Test3Operator, ConcaveCaseTakesEndpointMinimum) {
  const double x = 1.5, q = -1.0, lambda = 0.7;
  const double a = x * x * q;
  const double s = evaluate_test3_operator(0.0, 1.0, 0.0, x);  // S via p=0,q>0
  for (double p : {-2.0, -0.3, 0.0, 0.4, 3.0}) {
    const double c = lambda / x + s;
    const double expected = std::min(c, a - p + c);
    EXPECT_NEAR(evaluate_test3_operator(p, q, lambda, x), expected, 1e-12)
        << "p=" << p;
  }
}

TEST(Test3Operator, RecoversOptimalControlAlongExactSolution) {
  const TestCase& tc = get_test_case("test3");
  const auto& ex = tc.exact[0];
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> xs(tc.xa, tc.xb);
  for (int i = 0; i < 100; ++i) {
    const double x = xs(gen);
    const double lx = std::log(x);
    const double theta_star =
        (2.0 * lx + 3.0) / (2.0 * std::pow(x, 3) * (2.0 * lx + 1.0));
    EXPECT_NEAR(test3_minimizer(ex.uxx(x, 0.0), ex.ux(x, 0.0), x), theta_star,
                1e-12);
    EXPECT_LT(theta_star, 1.0);
    EXPECT_GT(theta_star, 0.0);
  }
}

TEST(Test3Operator, ZeroLimitCandidateWins) {
  // Convex with the vertex left of zero: inf over (0,1] sits at theta -> 0+.
  const double x = 2.0, q = 1.0, lambda = 0.0, p = -1.0;
  const double s = evaluate_test3_operator(0.0, q, 0.0, x);
  EXPECT_NEAR(evaluate_test3_operator(p, q, lambda, x), s, 1e-12);
  EXPECT_DOUBLE_EQ(test3_minimizer(p, q, x), 0.0);
}

TEST(Test6Operator, CoefficientQuadrants) {
  EXPECT_DOUBLE_EQ(test6_coefficient(pi / 4.0, pi / 2.0), 1.0);
  EXPECT_DOUBLE_EQ(test6_coefficient(pi / 4.0, 3.0 * pi / 2.0), 0.5);
  EXPECT_DOUBLE_EQ(test6_coefficient(2.0, 4.0), 1.0);  // second quadrant rule
  EXPECT_DOUBLE_EQ(test6_coefficient(2.0, 1.0), 0.5);
  // Literal edge handling: non-strict on t = pi/2 and x = pi in the first
  // rule, strict exclusion of x = 2 pi in the second.
  EXPECT_DOUBLE_EQ(test6_coefficient(pi / 2.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(test6_coefficient(0.3, pi), 1.0);
  EXPECT_DOUBLE_EQ(test6_coefficient(2.0, 2.0 * pi), 0.5);
  EXPECT_DOUBLE_EQ(test6_coefficient(0.0, 1.0), 0.5);  // t = 0 excluded
}

TEST(Test6Operator, MatchesDirectTwoBranchMinimum) {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> ps(-3.0, 3.0);
  std::uniform_real_distribution<double> ts(0.0, 3.1);
  std::uniform_real_distribution<double> xs(0.0, 2.0 * pi);
  for (int i = 0; i < 200; ++i) {
    const double p = ps(gen), t = ts(gen), x = xs(gen);
    const double k = test6_coefficient(t, x) * std::cos(t) * std::sin(x) -
                     std::sin(t) * std::sin(x);
    const double direct = -std::min(1.0 * p + k, 0.5 * p + k);
    EXPECT_DOUBLE_EQ(evaluate_test6_operator(p, t, x), direct);
  }
}

TEST(Test6Operator, RecoversOptimalControlAlongExactSolution) {
  const TestCase& tc = get_test_case("test6");
  const auto& ex = tc.exact[0];
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> ts(0.0, tc.final_time);
  std::uniform_real_distribution<double> xs(tc.xa, tc.xb);
  for (int i = 0; i < 100; ++i) {
    const double t = ts(gen), x = xs(gen);
    const int expected = test6_coefficient(t, x) == 1.0 ? 1 : 2;
    EXPECT_EQ(test6_minimizer(ex.uxx(x, t)), expected)
        << "t=" << t << " x=" << x;
  }
}

TEST(Test5Operator, LogWallReportsNonFinite) {
  const TestCase& tc = get_test_case("test5");
  const MomentOperator op(tc.op, tc.recommended.alpha);
  EXPECT_THROW(op.value(0.0, -2.0, 0.0, 1.0, 1.0, 0.1, 0.5),
               NonFiniteEvaluation);
  // Just inside the domain the value is finite.
  EXPECT_TRUE(std::isfinite(op.value(0.0, -0.9, 0.0, 1.0, 1.0, 0.1, 0.5)));
}

}  // namespace
}  // namespace mipdg
