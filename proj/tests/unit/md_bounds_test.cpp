#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "pmd/compensated_sum.hpp"
#include "pmd/exact_oracles.hpp"
#include "pmd/md_bounds.hpp"

using pmd::Real;

namespace {

Real term_sum(const pmd::BoundBreakdown& b) {
  pmd::CompensatedSum s;
  for (const auto& t : b.terms) s.add(t.value);
  return s.value();
}

}  // namespace

TEST(LocalDependenceBound, ZeroIngredientsGiveZero) {
  const auto b = pmd::theorem1_bound({0, 0, 0}, pmd::make_query(3, 0, 5));
  EXPECT_EQ(b.total, 0);
}

TEST(LocalDependenceBound, UnitLambdaSigmaGap) {
  const auto b = pmd::theorem1_bound({0, 1, 0}, pmd::make_query(1, 0, 2));
  EXPECT_NEAR(static_cast<double>(b.total), 1.0, 1e-15);
  EXPECT_EQ(*b.term(pmd::kC1LambdaSigmaTerm), b.total);
}

TEST(LocalDependenceBound, RejectsKNotAboveLambda) {
  EXPECT_THROW(pmd::make_query(3, 0, 3), pmd::PreconditionError);
  EXPECT_THROW(pmd::make_query(3, 3, 1), pmd::PreconditionError);
}

TEST(LocalDependenceBound, ReproducesShiftedTwoRunsBound) {
  const long n = 50;
  const Real p = 0.2L;
  const long k = 6;
  const auto direct = pmd::two_runs_bound_shifted(n, p, k);
  const auto m = pmd::two_runs_params(n, p);
  const long a = pmd::two_runs_shift(n, p);
  const auto q = pmd::make_query(m.mu, a, k);
  const Real main = 9.2L * n * p * p * (1 + 5 * p) / std::sqrt((n - 8) * std::pow(1 - p, 3));
  const auto via = pmd::theorem1_bound({main, std::min<Real>(1, q.lambda), 0}, q);
  EXPECT_EQ(direct.total, via.total);
  EXPECT_GT(direct.total, 0);
  EXPECT_TRUE(std::isfinite(direct.total));
}

TEST(IndependentSummandsBound, BernoulliSummandsAgreeWithShiftedBound) {
  const std::vector<Real> p{0.1L, 0.4L, 0.25L, 0.7L, 0.05L, 0.33L};
  const auto m = pmd::poisson_binomial_params(p);
  const Real theta = pmd::pb_theta(p);
  std::vector<pmd::SummandMoments> s;
  Real want = 0;
  for (Real pi : p) {
    // E[X(X-p)] = p(1-p) and X(X-1) = 0 for indicators.
    s.push_back({theta, pi, pi * (1 - pi), 0});
    want += theta * pi * pi * (1 - pi);
  }
  const long k = 4;
  const auto q = pmd::make_query(m.mu, static_cast<long>(std::floor(*m.mu2)), k);
  const auto cor = pmd::corollary1_bound(s, q, m.sigma2, 0);
  const auto shifted = pmd::pb_bound_shifted(p, k);
  EXPECT_NEAR(static_cast<double>(*cor.term(pmd::kMainC2Term)),
              static_cast<double>(cor.factors.c2 * want), 1e-15);
  EXPECT_EQ(*cor.term(pmd::kMainC2Term), *shifted.term(pmd::kMainC2Term));
  EXPECT_EQ(*cor.term(pmd::kC1LambdaSigmaTerm), *shifted.term(pmd::kC1LambdaSigmaTerm));
}

TEST(IndependentSummandsBound, EqualsLocalDependenceWithSummandsAsNeighbourhoods) {
  // Z_i = Z_i' = X_i turns the theorem's summand into theta_i{mu_i|E X_i(X_i - mu_i)| + E|X_i - mu_i| X_i(X_i-1)/2}.
  const std::vector<pmd::SummandMoments> s{{0.8L, 0.3L, 0.21L, 0}, {0.8L, 1.2L, 0.9L, 0.4L}};
  const auto q = pmd::make_query(1.5L, 0, 4);
  const Real sum = 0.8L * (0.3L * 0.21L) + 0.8L * (1.2L * 0.9L + 0.2L);
  const auto a = pmd::corollary1_bound(s, q, 1.1L, 0.01L);
  const auto b = pmd::theorem1_bound({sum, std::fabs(1.5L - 1.1L), 0.01L}, q);
  EXPECT_NEAR(static_cast<double>(a.total), static_cast<double>(b.total), 1e-15);
}

TEST(LeftTail, PlugIn) {
  EXPECT_NEAR(static_cast<double>(pmd::left_tail_bound(10, 0, 10)), std::exp(-7.2), 1e-16);
  EXPECT_THROW(pmd::left_tail_bound(2, 2, 1), pmd::DomainError);
  EXPECT_THROW(pmd::left_tail_bound(2, 0, 0), pmd::DomainError);
}

TEST(SizeBiasBound, ZeroShiftDropsMeanGap) {
  const auto q = pmd::make_query(2.5L, 0, 5);
  const auto b = pmd::theorem12_bound(2.5L, {0.1L, pmd::CouplingKind::custom}, q, 0);
  EXPECT_NEAR(static_cast<double>(b.total), static_cast<double>(b.factors.c1 * 2.5L * 0.1L), 1e-15);
}

TEST(SizeBiasBound, MatchingUsesTwoOverN) {
  const auto b = pmd::matching_bound(10, 3);
  EXPECT_NEAR(static_cast<double>(b.total), 0.6, 1e-15);
  EXPECT_THROW(pmd::matching_bound(10, 1), pmd::PreconditionError);
}

TEST(ZeroBiasBound, Degenerate) {
  const auto q = pmd::make_query(4, 0, 7);
  EXPECT_EQ(pmd::theorem2_bound(4, 0, q, 0.125L).total, 0.125L);
}

TEST(ZeroBiasBound, MiddleTermCarriesInverseLambda) {
  const auto q = pmd::make_query(4, 0, 7);
  const auto b = pmd::theorem2_bound(3, 0, q, 0);
  EXPECT_NEAR(static_cast<double>(b.total), static_cast<double>(b.factors.c1 / 4), 1e-15);
}

TEST(ZeroBiasBound, PoissonBinomialMainTermMatchesIndependentSummands) {
  const std::vector<Real> p{0.2L, 0.5L, 0.6L, 0.15L};
  const auto m = pmd::poisson_binomial_params(p);
  Real s = 0;
  for (Real pi : p) s += pi * pi * (1 - pi);
  const long k = 4;
  const auto shifted = pmd::pb_bound_shifted(p, k);
  const auto b = pmd::theorem2_bound(m.sigma2, pmd::pb_theta(p) * s / m.sigma2, shifted.query, 0);
  EXPECT_NEAR(static_cast<double>(*b.term(pmd::kMainC2Term)), static_cast<double>(*shifted.term(pmd::kMainC2Term)),
              1e-15);
}

TEST(SizeBias, ClosedForms) {
  EXPECT_NEAR(static_cast<double>(pmd::size_bias_e_abs(pmd::CouplingKind::negatively_related, 3, 3 * 0.7L, 0)),
              0.3, 1e-15);
  const long n = 7;
  const long l = 9;
  const auto occ = pmd::occupancy_params(n, l);
  EXPECT_NEAR(static_cast<double>(pmd::size_bias_e_abs(pmd::CouplingKind::negatively_related, occ.mu, occ.sigma2, 0)),
              static_cast<double>(occ.mu - (n - 1) * std::pow(1 - 1.0L / (n - 1), l)), 1e-14);
  const Real p = 0.3L;
  const auto tri = pmd::triangles_params(n, p);
  const Real p3 = p * p * p;
  EXPECT_NEAR(static_cast<double>(pmd::size_bias_e_abs(pmd::CouplingKind::positively_related, tri.mu, tri.sigma2,
                                                       tri.mu * p3)),
              static_cast<double>(3 * (n - 3) * p * p * (1 - p) + p3), 1e-14);
  EXPECT_THROW(pmd::size_bias_e_abs(pmd::CouplingKind::negatively_related, 1, 2, 0), pmd::ConsistencyError);
  EXPECT_THROW(pmd::size_bias_e_abs(pmd::CouplingKind::custom, 1, 1, 0), pmd::PreconditionError);
}

TEST(PoissonBinomialBounds, SingleCoinNoShift) {
  const std::vector<Real> p{0.5L};
  const auto b = pmd::pb_bound_a0(p, 1);
  EXPECT_NEAR(static_cast<double>(b.total), static_cast<double>(pmd::stein_factors(0.5L, 1).c1 * 0.25L), 1e-15);
}

TEST(PoissonBinomialBounds, RecordsHundredIsFinite) {
  const auto m = pmd::records_params(100);
  const long k = static_cast<long>(std::ceil(m.mu + 3 * std::sqrt(m.sigma2)));
  const auto b = pmd::pb_bound_a0(pmd::records_probabilities(100), k);
  EXPECT_GT(b.total, 0);
  EXPECT_TRUE(std::isfinite(b.total));
}

TEST(PoissonBinomialBounds, ThetaDenominator) {
  const std::vector<Real> half(4, 0.5L);
  EXPECT_NEAR(static_cast<double>(1 / pmd::pb_theta(half)), std::sqrt(1.75 * std::numbers::pi / 2), 1e-15);
  EXPECT_NEAR(static_cast<double>(1 / pmd::pb_theta(half)), 1.65798, 1e-5);
  const std::vector<Real> tiny{0.1L, 0.1L};
  EXPECT_EQ(pmd::pb_theta(tiny), 1);
}

TEST(PoissonBinomialBounds, ShiftedLeftTailTerm) {
  // mu2 >= 1 gives a = 1, so the Gaussian left-tail term is present.
  const std::vector<Real> p(6, 0.45L);
  const auto m = pmd::poisson_binomial_params(p);
  const auto b = pmd::pb_bound_shifted(p, 5);
  EXPECT_EQ(b.query.a, 1);
  const Real lambda = m.mu - 1;
  EXPECT_NEAR(static_cast<double>(*b.term(pmd::kLeftTailTerm)),
              std::exp(-static_cast<double>((lambda + 2) * (lambda + 2) / (2 * m.mu))), 1e-15);
}

TEST(OneSidedBracket, BranchesOfM) {
  const auto lo = pmd::make_pb_lower_inputs(0.5L, 0.1L, 3);
  EXPECT_NEAR(static_cast<double>(lo.M), std::exp(0.5), 1e-15);
  const auto at_one = pmd::make_pb_lower_inputs(1, 0.2L, 3);
  EXPECT_NEAR(static_cast<double>(at_one.M),
              std::exp(13.0 / 12) * std::sqrt(2 * std::numbers::pi) / std::sqrt(0.8), 1e-14);
  EXPECT_THROW(pmd::make_pb_lower_inputs(2, 2, 5), pmd::DomainError);
  EXPECT_THROW(pmd::pb_lower_bound(pmd::make_pb_lower_inputs(4, 1, 5)), pmd::PreconditionError);
}

TEST(OneSidedBracket, UpperSideFailsAtKOneForSmallMean) {
  // For any Bernoulli sum P(W >= 1) = 1 - prod(1-p_i) >= 1 - e^{-mu}, so the
  // ratio at k = 1 is at least one; x >= 1 admits k = 1 whenever mu <= 0.38.
  const std::vector<Real> p{0.25L};
  const auto t = pmd::poisson_binomial_table(p);
  const Real ratio = t.tail(1) / pmd::log_poisson_sf(0.25L, 1).prob();
  EXPECT_GT(ratio, 1);
  EXPECT_GE(pmd::make_pb_lower_inputs(0.25L, 0.0625L, 1).x, 1);
}

TEST(Records, ClosedFormIsARelaxation) {
  for (long n : {100L, 1000L, 10000L}) {
    const auto m = pmd::records_params(n);
    const auto p = pmd::records_probabilities(n);
    const Real mu2 = *pmd::poisson_binomial_params(p).mu2;
    const long k = static_cast<long>(std::ceil(m.mu + 3 * std::sqrt(m.mu)));
    const Real width = pmd::records_bound(n, k);
    EXPECT_GT(width, 0);
    EXPECT_TRUE(std::isfinite(width));
    const Real sharp = -pmd::pb_lower_bound(pmd::make_pb_lower_inputs(m.mu, mu2, k)).first;
    EXPECT_GE(width, sharp) << n;
  }
}

TEST(Records, PrefactorDecreasesInN) {
  Real previous = std::numeric_limits<Real>::infinity();
  for (long n : {10L, 100L, 1000L, 10000L, 100000L}) {
    const auto m = pmd::records_params(n);
    const long k = static_cast<long>(std::ceil(m.mu + 2 * std::sqrt(m.mu)));
    const Real x = (k - m.mu) / std::sqrt(m.mu);
    const Real h = std::log(static_cast<Real>(n)) + std::numbers::egamma_v<Real>;
    const Real prefactor = pmd::records_bound(n, k) / (x * x + 1 + 4 * x / std::sqrt(h - 1));
    EXPECT_LT(prefactor, previous);
    previous = prefactor;
  }
}

TEST(Applications, ClosedForms) {
  const Real p = 0.4L;
  const Real p3 = p * p * p;
  const auto tri = pmd::triangles_bound(3, p, 1);
  EXPECT_NEAR(static_cast<double>(tri.total), static_cast<double>(pmd::stein_factors(p3, 1).c1 * p3 * p3), 1e-15);

  const auto occ = pmd::occupancy_bound(5, 7, 2);
  const Real mu = 5 * std::pow(0.8L, 7);
  const Real bracket = mu - 4 * std::pow(0.75L, 7);
  EXPECT_NEAR(static_cast<double>(occ.total), static_cast<double>(pmd::stein_factors(mu, 2).c1 * mu * bracket), 1e-14);

  const auto bd = pmd::birthday_bound(365, 10, 1);
  const Real bmu = 45.0L / 365;
  EXPECT_NEAR(static_cast<double>(bd.total), static_cast<double>(pmd::stein_factors(bmu, 1).c1 * bmu * 21 / 365), 1e-15);

  const auto tr = pmd::two_runs_bound_a0(20, 0.3L, 3);
  EXPECT_NEAR(static_cast<double>(tr.total),
              static_cast<double>(pmd::stein_factors(1.8L, 3).c1 * 20 * 0.027L * 1.7L), 1e-14);
}

TEST(Applications, ShiftedTwoRunsPreconditions) {
  for (Real p : {0.05L, 0.3L, 0.6L}) EXPECT_LE(pmd::two_runs_shift(50, p), 0);
  EXPECT_THROW(pmd::two_runs_bound_shifted(8, 0.3L, 5), pmd::PreconditionError);
  EXPECT_THROW(pmd::two_runs_bound_shifted(20, 0.7L, 20), pmd::PreconditionError);
  const auto b = pmd::two_runs_bound_shifted(50, 0.2L, 5);
  EXPECT_GE(b.query.lambda, 50 * 0.04L);
  EXPECT_EQ(*b.term(pmd::kLeftTailTerm), 0);
}

TEST(Breakdown, TotalsEqualTermSums) {
  const std::vector<pmd::BoundBreakdown> all{
      pmd::matching_bound(8, 4),         pmd::occupancy_bound(6, 5, 3),      pmd::birthday_bound(30, 8, 2),
      pmd::triangles_bound(6, 0.3L, 2),  pmd::two_runs_bound_a0(50, 0.2L, 4), pmd::two_runs_bound_shifted(50, 0.2L, 4),
      pmd::pb_bound_shifted(std::vector<Real>(9, 0.4L), 6)};
  for (const auto& b : all) {
    EXPECT_NEAR(static_cast<double>(b.total), static_cast<double>(term_sum(b)), 1e-14);
    EXPECT_GE(b.total, 0);
  }
}

TEST(Breakdown, OverflowingFactorGivesInfiniteTotal) {
  const auto b = pmd::theorem12_bound(1e-3L, {0.5L, pmd::CouplingKind::custom}, pmd::make_query(1e-3L, 0, 3000), 0);
  EXPECT_TRUE(std::isinf(b.total));
  EXPECT_GT(b.total, 0);
}
