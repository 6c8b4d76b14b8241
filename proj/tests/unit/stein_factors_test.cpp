#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "pmd/stein_factors.hpp"
#include "support/oracles.hpp"

using pmd::Real;

namespace {

void expect_rel(Real got, Real want, Real tol) {
  EXPECT_LE(std::fabs(got - want), tol * std::fabs(want)) << "got " << static_cast<double>(got)
                                                          << " want " << static_cast<double>(want);
}

}  // namespace

TEST(SteinFactors, LambdaOneKTwo) {
  const auto f = pmd::stein_factors(1, 2);
  expect_rel(f.c0, 2, 1e-15L);
  expect_rel(f.c1_minus, 1, 1e-15L);
  expect_rel(f.c1_plus, 0.78442238235466562875L, 1e-14L);
  expect_rel(f.c1, 1, 1e-15L);
  expect_rel(f.c2, 1.78442238235466562875L, 1e-14L);
}

TEST(SteinFactors, LambdaOneKThree) {
  const auto f = pmd::stein_factors(1, 3);
  expect_rel(f.c0, 5, 1e-15L);
  expect_rel(f.c1_minus, 3, 1e-15L);
  expect_rel(f.c1, 3, 1e-15L);
  expect_rel(f.c1_plus, 1.4530834639268121105L, 1e-14L);
}

TEST(SteinFactors, KEqualsOneUsesEmptyLowerTail) {
  const auto f = pmd::stein_factors(0.5L, 1);
  expect_rel(f.c0, 2, 1e-15L);
  EXPECT_EQ(f.c1_minus, f.c0);
  expect_rel(f.c1_plus, 1.0829881650735965683L, 1e-14L);
}

TEST(SteinFactors, MatchesBigFloatOnGrid) {
  for (Real lambda : {0.5L, 1.0L, 5.0L, 10.0L, 25.0L}) {
    const long k0 = static_cast<long>(std::floor(lambda)) + 1;
    for (long k = k0; k < k0 + 30; ++k) {
      const auto f = pmd::stein_factors(lambda, k);
      const auto o = oracle::stein_factors(lambda, k);
      EXPECT_LT(oracle::rel_err(f.c0, o.c0), 1e-13L);
      EXPECT_LT(oracle::rel_err(f.c1_minus, o.c1_minus), 1e-11L);
      EXPECT_LT(oracle::rel_err(f.c1_plus, o.c1_plus), 1e-11L);
    }
  }
}

TEST(SteinFactors, StructuralIdentities) {
  for (Real lambda : {0.3L, 2.0L, 9.5L, 40.0L}) {
    const long k0 = static_cast<long>(std::floor(lambda)) + 1;
    for (long k = k0; k < k0 + 25; ++k) {
      const auto f = pmd::stein_factors(lambda, k);
      EXPECT_EQ(f.c1, std::max(f.c1_minus, f.c1_plus));
      EXPECT_LE(std::fabs(f.c2 - (f.c1_minus + f.c1_plus)), 1e-12L * f.c2);
      EXPECT_GE(f.c1_minus, 0);
      EXPECT_GE(f.c1_plus, 0);
      EXPECT_LE(f.c1_minus, f.c0 * (1 + 1e-15L));
      EXPECT_LE(f.c1_plus, f.c0 * (1 + 1e-15L));
      EXPECT_LE(f.c1, f.naive);
      EXPECT_LE(f.c2, 2 * f.naive);
    }
  }
}

TEST(SteinFactors, RejectsOutsideRegime) {
  EXPECT_THROW(pmd::stein_factors(1, 1), pmd::PreconditionError);
  EXPECT_THROW(pmd::stein_factors(5, 4), pmd::PreconditionError);
  EXPECT_THROW(pmd::stein_factors(0.5L, 0), pmd::DomainError);
  EXPECT_THROW(pmd::stein_factors(0, 3), pmd::DomainError);
}

TEST(SteinFactors, FarTailStaysFinite) {
  const auto f = pmd::stein_factors(10, 200);
  EXPECT_TRUE(std::isfinite(f.c0));
  EXPECT_TRUE(std::isfinite(f.c2));
  EXPECT_LT(f.log_tail.value, -400);
}

TEST(SteinSolution, LambdaOneKTwoValues) {
  const auto s = pmd::solve_stein_equation(1, 2);
  const Real tail = 1 - 2 / std::exp(1.0L);
  expect_rel(s.f[2], -2 * tail, 1e-14L);
  expect_rel(s.f[2] - s.f[1], -tail, 1e-14L);
  EXPECT_NEAR(static_cast<double>(s.f[2]), -0.5284822353142307, 1e-15);
  EXPECT_EQ(s.f[0], s.f[1]);
}

TEST(SteinSolution, BothRoutesAgree) {
  const auto s = pmd::solve_stein_equation(10, 15, 200);
  EXPECT_LE(s.max_relative_discrepancy, 1e-10L);
  ASSERT_EQ(s.f.size(), 201u);
  for (std::size_t i = 0; i < s.f.size(); ++i) EXPECT_LE(s.f[i], 0);
}

TEST(SteinSolution, SatisfiesSteinIdentity) {
  const Real lambda = 3.7L;
  const long k = 8;
  const auto s = pmd::solve_stein_equation(lambda, k, 80);
  const Real tail = pmd::log_poisson_sf(lambda, k).prob();
  for (long j = 1; j < 79; ++j) {
    const Real lhs = lambda * s.f[j + 1] - j * s.f[j];
    const Real rhs = (j >= k ? 1 : 0) - tail;
    EXPECT_NEAR(static_cast<double>(lhs), static_cast<double>(rhs), 1e-13) << "j=" << j;
  }
}

TEST(SteinSolution, RejectsShortRange) {
  EXPECT_THROW(pmd::solve_stein_equation(1, 2, 5), pmd::PreconditionError);
}

TEST(SolutionChecks, NamedCasesPass) {
  EXPECT_TRUE(pmd::verify_lemma_properties(1, 2, 60).all_passed());
  EXPECT_TRUE(pmd::verify_lemma_properties(10, 15, 200).all_passed());
  EXPECT_TRUE(pmd::verify_lemma_properties(0.5L, 1, 40).all_passed());
}

TEST(SolutionChecks, ReportNamesEveryCheck) {
  const auto r = pmd::verify_lemma_properties(2, 4);
  std::vector<std::string> names;
  for (const auto& c : r.checks) names.push_back(c.name);
  for (const char* want : {"f_nonpositive", "delta_f_negative_below_k", "delta_f_positive_from_k", "norm_f",
                           "norm_delta_f", "norm_delta2_f", "delta2_f_nonpositive_except_k_minus_1"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), want), names.end()) << want;
  }
  EXPECT_TRUE(r.failures().empty());
}

TEST(ConjectureScan, SmallLambdaGaps) {
  const std::vector<Real> lambdas{1};
  const auto rows = pmd::conjecture_scan(lambdas, 2);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].k, 2);
  EXPECT_NEAR(static_cast<double>(rows[0].gap), 0.21557761764533437125, 1e-14);
  EXPECT_NEAR(static_cast<double>(rows[1].gap), 1.5469165360731878895, 1e-13);
  EXPECT_FALSE(rows[0].flagged);
}

TEST(ConjectureScan, LambdaTenGapsPositive) {
  const std::vector<Real> lambdas{10};
  for (const auto& r : pmd::conjecture_scan(lambdas, 33)) {
    EXPECT_GT(r.gap, 0) << "k=" << r.k;
    EXPECT_FALSE(r.flagged);
  }
}
