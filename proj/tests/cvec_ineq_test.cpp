#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace magpl;
using magpl::testing::random_cvec;

namespace {

constexpr int kTrials = 100000;
const cplx I{0.0, 1.0};

}  // namespace

TEST(Inner, OrthogonalBasisVectors) { EXPECT_EQ(inner(CVec{1.0, 0.0}, CVec{0.0, 1.0}), cplx(0.0, 0.0)); }

TEST(Inner, HandExpansionOfRealAndImaginaryParts) {
  // a_R b_R + a_I b_I + i (a_I b_R - a_R b_I) with a = i, b = 1
  EXPECT_EQ(inner(CVec{I}, CVec{1.0}), I);
}

TEST(Inner, ConjugateSymmetryAndRealSelfProduct) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 1000; ++t) {
    const CVec u = random_cvec(rng, 3), v = random_cvec(rng, 3);
    const cplx uv = inner(u, v), vu = inner(v, u);
    EXPECT_NEAR(uv.real(), vu.real(), 1e-12 * std::abs(uv) + 1e-300);
    EXPECT_NEAR(uv.imag(), -vu.imag(), 1e-12 * std::abs(uv) + 1e-300);
    const cplx uu = inner(u, u);
    EXPECT_EQ(uu.imag(), 0.0);
    EXPECT_GE(uu.real(), 0.0);
  }
}

TEST(Inner, RejectsDimensionMismatch) { EXPECT_THROW(inner(CVec{1.0}, CVec{1.0, 2.0}), std::invalid_argument); }

TEST(CVecType, RejectsNonFiniteAndEmpty) {
  EXPECT_THROW(CVec({cplx(std::nan(""), 0.0)}), std::invalid_argument);
  EXPECT_THROW(CVec(std::vector<cplx>{}), std::invalid_argument);
}

TEST(MonotoneForm, VanishesOnEqualArguments) {
  std::mt19937_64 rng(3);
  const CVec a = random_cvec(rng, 4);
  for (double p : {1.3, 2.0, 3.5}) EXPECT_EQ(monotone_form(a, a, p), 0.0);
}

TEST(MonotoneForm, PEqualsTwoIsSquaredDistance) { EXPECT_DOUBLE_EQ(monotone_form(CVec{1.0}, CVec{I}, 2.0), 2.0); }

TEST(MonotoneForm, ZeroArgumentGivesPowerOfOther) {
  const CVec b{cplx(3.0, -1.0), cplx(0.5, 2.0)};
  const double nb = norm(b);
  for (double p : {1.1, 1.5, 2.0, 3.7}) {
    EXPECT_NEAR(monotone_form(CVec{0.0, 0.0}, b, p), std::pow(nb, p), 1e-13 * std::pow(nb, p)) << "p=" << p;
    EXPECT_NEAR(monotone_form(b, CVec{0.0, 0.0}, p), std::pow(nb, p), 1e-13 * std::pow(nb, p)) << "p=" << p;
  }
}

TEST(MonotoneForm, RejectsPAtMostOne) {
  EXPECT_THROW(monotone_form(CVec{1.0}, CVec{2.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(monotone_form(CVec{1.0}, CVec{2.0}, 0.5), std::invalid_argument);
}

class MonotoneSweep : public ::testing::TestWithParam<double> {};

TEST_P(MonotoneSweep, StrictlyPositiveOnDistinctPairs) {
  const double p = GetParam();
  std::mt19937_64 rng(1000 + static_cast<int>(10 * p));
  int nonpositive = 0;
  for (int t = 0; t < kTrials; ++t) {
    const CVec a = random_cvec(rng, 3), b = random_cvec(rng, 3);
    if (!(monotone_form(a, b, p) > 0.0)) ++nonpositive;
  }
  EXPECT_EQ(nonpositive, 0);
}

INSTANTIATE_TEST_SUITE_P(PValues, MonotoneSweep, ::testing::Values(1.3, 1.5, 2.0, 2.7, 3.5));

TEST(Simon, LiteralOrientationFailsOnCollinearPair) {
  // p = 3, a = 1, b = -1: |a-b|^3 = 8 and M = 4. With 2^{2-p} multiplying M
  // the bound would read 8 <= 2; the certified form |a-b|^p <= 2^{p-2} M is tight.
  const CVec a{1.0}, b{-1.0};
  const double m = monotone_form(a, b, 3.0);
  EXPECT_DOUBLE_EQ(m, 4.0);
  EXPECT_GT(8.0, std::pow(2.0, 2.0 - 3.0) * m);
  const IneqReport r = simon_check(a, b, 3.0);
  EXPECT_DOUBLE_EQ(r.lhs, 8.0);
  EXPECT_DOUBLE_EQ(r.rhs, 8.0);
  EXPECT_DOUBLE_EQ(r.constant_used, 2.0);
  EXPECT_TRUE(r.holds);
}

TEST(Simon, DegenerateEqualArguments) {
  const CVec a{cplx(1.0, 2.0), cplx(-3.0, 0.5)};
  for (double p : {1.5, 2.0, 3.0}) {
    const IneqReport r = simon_check(a, a, p);
    EXPECT_EQ(r.lhs, 0.0);
    EXPECT_EQ(r.rhs, 0.0);
    EXPECT_TRUE(r.holds);
  }
}

TEST(Simon, ConstantsOfBothBranches) {
  EXPECT_DOUBLE_EQ(simon_constant(2.0), 1.0);
  EXPECT_DOUBLE_EQ(simon_constant(4.0), 4.0);
  EXPECT_DOUBLE_EQ(simon_constant(1.5), std::pow(0.5, -0.75));
  EXPECT_THROW(simon_check(CVec{1.0}, CVec{0.0}, 1.0), std::invalid_argument);
}

TEST(Simon, PEqualsTwoIsEquality) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < kTrials; ++t) {
    const CVec a = random_cvec(rng, 3), b = random_cvec(rng, 3);
    const IneqReport r = simon_check(a, b, 2.0);
    ASSERT_LE(std::abs(r.slack), 1e-12 * r.lhs);
  }
}

class SimonSweep : public ::testing::TestWithParam<double> {};

TEST_P(SimonSweep, HoldsOnRandomPairs) {
  const double p = GetParam();
  std::mt19937_64 rng(2000 + static_cast<int>(10 * p));
  int failures = 0;
  double worst = 0.0;
  for (int t = 0; t < kTrials; ++t) {
    const CVec a = random_cvec(rng, 3), b = random_cvec(rng, 3);
    const IneqReport r = simon_check(a, b, p);
    if (!r.holds) ++failures;
    if (r.rhs > 0.0) worst = std::max(worst, r.lhs / r.rhs);
  }
  EXPECT_EQ(failures, 0);
  EXPECT_LE(worst, 1.0 + 1e-12);
}

INSTANTIATE_TEST_SUITE_P(PValues, SimonSweep, ::testing::Values(1.1, 1.3, 1.5, 1.9, 2.0, 2.7, 3.5, 6.0));

TEST(VI, DegenerateAndQuadraticCases) {
  const CVec a{cplx(1.0, 1.0)}, b{cplx(-2.0, 0.5)};
  const IneqReport same = vi_check(a, a, 3.0);
  EXPECT_EQ(same.lhs, 0.0);
  EXPECT_EQ(same.rhs, 0.0);
  EXPECT_TRUE(same.holds);
  const IneqReport quad = vi_check(a, b, 2.0);
  EXPECT_DOUBLE_EQ(quad.lhs, norm(b - a));
  EXPECT_DOUBLE_EQ(quad.rhs, 2.0 * norm(b - a));
}

TEST(VI, RejectsPBelowTwo) { EXPECT_THROW(vi_check(CVec{1.0}, CVec{2.0}, 1.9), std::invalid_argument); }

class VISweep : public ::testing::TestWithParam<double> {};

TEST_P(VISweep, HoldsOnRandomPairs) {
  const double p = GetParam();
  std::mt19937_64 rng(3000 + static_cast<int>(10 * p));
  int failures = 0;
  for (int t = 0; t < kTrials; ++t) {
    const CVec a = random_cvec(rng, 3), b = random_cvec(rng, 3);
    if (!vi_check(a, b, p).holds) ++failures;
  }
  EXPECT_EQ(failures, 0);
}

INSTANTIATE_TEST_SUITE_P(PValues, VISweep, ::testing::Values(2.0, 2.5, 3.0, 3.5, 4.0));

TEST(WeightedPowerBound, Examples) {
  const IneqReport r = weighted_power_bound(1.0, 1.0, 2.0, 2.0, 2.0);
  EXPECT_DOUBLE_EQ(r.lhs, 4.0);
  EXPECT_DOUBLE_EQ(r.rhs, 8.0);
  EXPECT_TRUE(r.holds);
  EXPECT_TRUE(weighted_power_bound(3.7, 0.0, 1.7, 2.0, 2.0).holds);
  const IneqReport z = weighted_power_bound(3.0, 5.0, 0.0, 2.0, 2.0);
  EXPECT_DOUBLE_EQ(z.lhs, 1.0);
  EXPECT_DOUBLE_EQ(z.rhs, 2.0);
}

TEST(WeightedPowerBound, RejectsConjugacyViolation) {
  EXPECT_THROW(weighted_power_bound(1.0, 1.0, 2.0, 2.0, 3.0), std::invalid_argument);
  EXPECT_THROW(weighted_power_bound(-1.0, 1.0, 2.0, 2.0, 2.0), std::invalid_argument);
}

TEST(WeightedPowerBound, HoldsOnSampledDomain) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20000; ++t) {
    const double alpha = 1.0 + std::pow(10.0, -3.0 + 5.0 * u(rng));
    const double beta = alpha / (alpha - 1.0);
    const double x = std::pow(10.0, -3.0 + 6.0 * u(rng)), y = std::pow(10.0, -3.0 + 6.0 * u(rng));
    const double gamma = 6.0 * u(rng);
    ASSERT_TRUE(weighted_power_bound(x, y, gamma, alpha, beta).holds) << x << " " << y << " " << gamma << " " << alpha;
  }
}

TEST(SplitPower, Examples) {
  EXPECT_DOUBLE_EQ(split_power(1.0, 1.0, 2.0), 4.0);
  EXPECT_DOUBLE_EQ(split_power(2.5, 4.0, 1.0), 6.5);
  EXPECT_DOUBLE_EQ(split_power(3.0, 0.0, 0.5), std::sqrt(3.0));
}

TEST(SplitPower, DominatesPowerOfSum) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20000; ++t) {
    const double a = std::pow(10.0, -3.0 + 6.0 * u(rng)), b = std::pow(10.0, -3.0 + 6.0 * u(rng));
    const double g = 0.05 + 5.0 * u(rng);
    const double lhs = std::pow(a + b, g);
    ASSERT_GE(split_power(a, b, g), lhs * (1.0 - 1e-12));
  }
}

TEST(ConvexityTailBound, Examples) {
  const IneqReport one = convexity_tail_bound(2.0, 3.0, 1.0);
  EXPECT_DOUBLE_EQ(one.lhs, one.rhs);
  const IneqReport two = convexity_tail_bound(1.0, 1.0, 2.0);
  EXPECT_DOUBLE_EQ(two.lhs, 4.0);
  EXPECT_DOUBLE_EQ(two.rhs, 5.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double b : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double s = convexity_tail_bound(1.0, b, 3.0).slack;
    EXPECT_GE(s, 0.0);
    EXPECT_LT(s, prev);
    prev = s;
  }
  EXPECT_LT(prev, 1e-7);
  EXPECT_THROW(convexity_tail_bound(1.0, 1.0, 0.9), std::invalid_argument);
}

TEST(ConvexityTailBound, HoldsOnSampledDomain) {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20000; ++t) {
    const double a = std::pow(10.0, -3.0 + 6.0 * u(rng)), b = std::pow(10.0, -3.0 + 6.0 * u(rng));
    const double r = 1.0 + 5.0 * u(rng);
    ASSERT_TRUE(convexity_tail_bound(a, b, r).holds) << a << " " << b << " " << r;
  }
}

TEST(TMaxClosedForm, UnitCoefficients) {
  const auto r = tmax_closed_form(1.0, 1.0, 2.0, 4.0);
  EXPECT_DOUBLE_EQ(r.t_star, 1.0);
  EXPECT_DOUBLE_EQ(r.value, 0.25);
  EXPECT_DOUBLE_EQ(critical_ray_profile(1.0, 1.0, 1.0, 2.0, 4.0), 0.25);
}

TEST(TMaxClosedForm, EqualCoefficientsAndHomogeneity) {
  for (auto [p, n] : {std::pair{2.0, 3.0}, {1.5, 3.0}, {3.0, 4.0}, {2.0, 5.0}}) {
    const double d = 2.7;
    EXPECT_NEAR(tmax_closed_form(d, d, p, n).value, d / n, 1e-14);
    const double base = tmax_closed_form(1.3, 0.4, p, n).value;
    EXPECT_NEAR(tmax_closed_form(5.0 * 1.3, 0.4, p, n).value, std::pow(5.0, n / p) * base, 1e-12 * std::pow(5.0, n / p) * base);
  }
}

TEST(TMaxClosedForm, DominatesProfileOnGrid) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const double n = 2.0 + std::floor(4.0 * u(rng));
    const double p = 1.05 + (n - 1.1) * u(rng);
    const double d1 = std::pow(10.0, -2.0 + 4.0 * u(rng)), d2 = std::pow(10.0, -2.0 + 4.0 * u(rng));
    const auto cf = tmax_closed_form(d1, d2, p, n);
    EXPECT_NEAR(critical_ray_profile(cf.t_star, d1, d2, p, n), cf.value, 1e-10 * cf.value);
    for (int j = 0; j <= 10000; ++j) {
      const double s = 3.0 * cf.t_star * j / 10000.0;
      ASSERT_GE((cf.value - critical_ray_profile(s, d1, d2, p, n)) / cf.value, -1e-12);
    }
  }
}

TEST(TMaxClosedForm, RejectsInvalidInputs) {
  EXPECT_THROW(tmax_closed_form(0.0, 1.0, 2.0, 4.0), std::invalid_argument);
  EXPECT_THROW(tmax_closed_form(1.0, -1.0, 2.0, 4.0), std::invalid_argument);
  EXPECT_THROW(tmax_closed_form(1.0, 1.0, 4.0, 4.0), std::invalid_argument);
}
