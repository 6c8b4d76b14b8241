#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "pmd/exact_oracles.hpp"
#include "pmd/md_bounds.hpp"
#include "pmd/stein_factors.hpp"
#include "support/oracles.hpp"

using pmd::Real;

namespace {

std::vector<Real> random_probabilities(oracle::Gen& g, long n, Real pmax) {
  std::vector<Real> p(static_cast<std::size_t>(n));
  for (auto& v : p) v = g.open(pmax);
  return p;
}

Real log_uniform(oracle::Gen& g, Real lo, Real hi) {
  return std::exp(g.uniform(std::log(lo), std::log(hi)));
}

}  // namespace

TEST(PoissonProperties, TailAndCdfAreComplementary) {
  for (Real lambda : {0.1L, 1.0L, 5.0L, 10.0L, 50.0L}) {
    for (long k = 0; k <= static_cast<long>(3 * lambda) + 10; ++k) {
      const Real s = pmd::log_poisson_sf(lambda, k).prob() + pmd::log_poisson_cdf(lambda, k - 1).prob();
      EXPECT_NEAR(static_cast<double>(s), 1.0, 1e-13) << static_cast<double>(lambda) << " " << k;
    }
  }
}

TEST(PoissonProperties, PmfRecurrence) {
  oracle::Gen g(11);
  for (int i = 0; i < 200; ++i) {
    const Real lambda = log_uniform(g, 0.01L, 500);
    const long k = g.integer(0, 2000);
    const Real step = pmd::log_poisson_pmf(lambda, k + 1).value - pmd::log_poisson_pmf(lambda, k).value;
    EXPECT_NEAR(static_cast<double>(step), static_cast<double>(std::log(lambda / (k + 1))), 1e-9);
  }
}

TEST(PoissonProperties, TailMonotoneInKAndLambda) {
  oracle::Gen g(12);
  for (int i = 0; i < 200; ++i) {
    const Real lambda = log_uniform(g, 0.05L, 300);
    const long k = g.integer(1, 1200);
    const auto here = pmd::log_poisson_sf(lambda, k).value;
    EXPECT_LE(pmd::log_poisson_sf(lambda, k + 1).value, here);
    EXPECT_GE(pmd::log_poisson_sf(lambda * 1.01L, k).value, here);
  }
}

TEST(PoissonProperties, RandomTailsAgreeWithBigFloat) {
  oracle::Gen g(13);
  int checked = 0;
  while (checked < 100) {
    const Real lambda = log_uniform(g, 0.05L, 200);
    const long k = g.integer(0, static_cast<long>(lambda + 25 * std::sqrt(lambda)) + 40);
    const oracle::Big want = oracle::poisson_sf(lambda, k);
    if (want < oracle::Big(1e-280) || want > 1) continue;
    ++checked;
    EXPECT_LT(oracle::rel_err(pmd::log_poisson_sf(lambda, k).prob(), want), 1e-10L)
        << static_cast<double>(lambda) << " " << k;
  }
}

TEST(SteinProperties, RandomFactorsRespectOrdering) {
  oracle::Gen g(14);
  for (int i = 0; i < 300; ++i) {
    const Real lambda = log_uniform(g, 0.01L, 100);
    const long k = static_cast<long>(std::floor(lambda)) + g.integer(1, 60);
    const auto f = pmd::stein_factors(lambda, k);
    EXPECT_EQ(f.c1, std::max(f.c1_minus, f.c1_plus));
    EXPECT_LE(f.c1, f.naive) << static_cast<double>(lambda) << " " << k;
    EXPECT_LE(f.c1_minus, f.c0 * (1 + 1e-15L));
    EXPECT_LE(f.c1_plus, f.c0 * (1 + 1e-15L));
  }
}

TEST(TableProperties, PoissonBinomialMomentsAndUnimodality) {
  oracle::Gen g(15);
  for (int i = 0; i < 60; ++i) {
    const auto p = random_probabilities(g, g.integer(1, 300), 1);
    const auto t = pmd::poisson_binomial_table(p);
    const auto m = pmd::poisson_binomial_params(p);
    EXPECT_NEAR(static_cast<double>(t.total_mass()), 1.0, 1e-13);
    EXPECT_NEAR(static_cast<double>(t.mean()), static_cast<double>(m.mu), 1e-10 * (1 + static_cast<double>(m.mu)));
    EXPECT_NEAR(static_cast<double>(t.variance()), static_cast<double>(m.sigma2),
                1e-9 * (1 + static_cast<double>(m.sigma2)));
    // Bernoulli sums are log-concave, so the pmf rises then falls.
    bool falling = false;
    for (long w = t.min_support() + 1; w <= t.max_support(); ++w) {
      const Real prev = t.pmf(w - 1);
      const Real cur = t.pmf(w);
      if (cur < prev * (1 - 1e-12L)) falling = true;
      if (falling) {
        EXPECT_LE(cur, prev * (1 + 1e-12L)) << "w=" << w;
      }
    }
  }
}

TEST(TableProperties, ApplicationTablesMatchTheirMoments) {
  oracle::Gen g(16);
  for (int i = 0; i < 40; ++i) {
    const long n = g.integer(3, 12);
    const long l = g.integer(1, 12);
    const auto occ = pmd::occupancy_table(n, l);
    const auto om = pmd::occupancy_params(n, l);
    EXPECT_NEAR(static_cast<double>(occ.total_mass()), 1.0, 1e-12);
    EXPECT_NEAR(static_cast<double>(occ.mean()), static_cast<double>(om.mu), 1e-11);
    EXPECT_NEAR(static_cast<double>(occ.variance()), static_cast<double>(om.sigma2), 1e-10);

    const long r = g.integer(3, 60);
    const Real q = g.open(1);
    const auto runs = pmd::two_runs_table(r, q);
    const auto rm = pmd::two_runs_params(r, q);
    EXPECT_NEAR(static_cast<double>(runs.total_mass()), 1.0, 1e-12);
    EXPECT_NEAR(static_cast<double>(runs.mean()), static_cast<double>(rm.mu), 1e-10 * r);
    EXPECT_NEAR(static_cast<double>(runs.variance()), static_cast<double>(rm.sigma2), 1e-9 * r);

    const auto match = pmd::matching_table(g.integer(1, 40));
    EXPECT_NEAR(static_cast<double>(match.total_mass()), 1.0, 1e-12);
  }
}

TEST(BoundProperties, RandomPoissonBinomialRatiosStayInsideBounds) {
  oracle::Gen g(17);
  int checked = 0;
  for (int i = 0; i < 150; ++i) {
    const auto p = random_probabilities(g, g.integer(1, 150), 0.6L);
    const auto m = pmd::poisson_binomial_params(p);
    const auto t = pmd::poisson_binomial_table(p);
    const long k = static_cast<long>(std::floor(m.mu)) + g.integer(1, 12);
    const Real poisson = pmd::log_poisson_sf(m.mu, k).prob();
    if (t.tail(k) == 0) continue;
    const Real gap = std::fabs(t.tail(k) / poisson - 1);
    EXPECT_LE(gap, pmd::pb_bound_a0(p, k).total * (1 + 1e-9L) + 1e-12L);

    const long a = static_cast<long>(std::floor(*m.mu2));
    const Real lambda = m.mu - a;
    if (static_cast<Real>(k) > lambda && lambda > 0) {
      const Real shifted = t.tail(k + a) / pmd::log_poisson_sf(lambda, k).prob();
      if (std::isfinite(shifted)) {
        EXPECT_LE(std::fabs(shifted - 1), pmd::pb_bound_shifted(p, k).total * (1 + 1e-9L) + 1e-12L);
      }
    }
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(BoundProperties, RandomOccupancyAndTwoRunsWithinBounds) {
  oracle::Gen g(18);
  for (int i = 0; i < 80; ++i) {
    const long n = g.integer(3, 10);
    const long l = g.integer(1, 10);
    const auto m = pmd::occupancy_params(n, l);
    const auto t = pmd::occupancy_table(n, l);
    for (long k = static_cast<long>(std::floor(m.mu)) + 1; k <= t.max_support(); ++k) {
      const Real gap = std::fabs(t.tail(k) / pmd::log_poisson_sf(m.mu, k).prob() - 1);
      EXPECT_LE(gap, pmd::occupancy_bound(n, l, k).total + 1e-10L) << n << " " << l << " " << k;
    }
    const long r = g.integer(9, 80);
    const Real q = g.open(0.6L);
    const auto rm = pmd::two_runs_params(r, q);
    const auto rt = pmd::two_runs_table(r, q);
    for (long k = static_cast<long>(std::floor(rm.mu)) + 1; k <= std::min(rt.max_support(), 20L); ++k) {
      const Real gap = std::fabs(rt.tail(k) / pmd::log_poisson_sf(rm.mu, k).prob() - 1);
      EXPECT_LE(gap, pmd::two_runs_bound_a0(r, q, k).total + 1e-10L) << r << " " << static_cast<double>(q) << " " << k;
    }
  }
}
