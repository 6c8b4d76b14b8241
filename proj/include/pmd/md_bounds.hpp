#pragma once

// Relative-error bounds |P(W - a >= k) / P(Y >= k) - 1|, Y ~ Pn(lambda),
// lambda = mu - a. The generic evaluators take precomputed ingredient scalars;
// the application functions plug in each model's closed forms.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pmd/special_functions.hpp"
#include "pmd/stein_factors.hpp"

namespace pmd {

struct TailShiftQuery {
  long a = 0;
  Real lambda = 0;  // mu - a
  long k = 0;
};

/// Throws PreconditionError unless mu - a > 0 and k > mu - a.
TailShiftQuery make_query(Real mu, long a, long k);

struct Theorem1Ingredients {
  Real sum_term = 0;
  Real abs_lambda_minus_sigma2 = 0;
  Real left_tail = 0;  // P(W - a < -1) or an upper bound for it
};

struct BoundTerm {
  std::string name;
  Real value = 0;
};

struct BoundBreakdown {
  Real total = 0;  // +inf when a term overflows
  std::vector<BoundTerm> terms;
  TailShiftQuery query;
  SteinFactorSet factors;

  std::optional<Real> term(const std::string& name) const;
};

inline constexpr const char* kMainC2Term = "main_c2_term";
inline constexpr const char* kC1LambdaSigmaTerm = "c1_lambda_sigma_term";
inline constexpr const char* kLeftTailTerm = "left_tail_term";
inline constexpr const char* kC1MuTerm = "c1_mu_term";

BoundBreakdown theorem1_bound(const Theorem1Ingredients& ing, const TailShiftQuery& q);

// Moments of one non-negative integer summand.
struct SummandMoments {
  Real theta = 1;
  Real mu = 0;
  Real e_x_x_minus_mu = 0;             // E[X (X - mu)]
  Real e_abs_x_minus_mu_falling2 = 0;  // E[|X - mu| X (X - 1)]
};

BoundBreakdown corollary1_bound(std::span<const SummandMoments> summands, const TailShiftQuery& q,
                                Real sigma2, Real left_tail);

/// exp(-(mu - a + 2)^2 / (2 sum E X_i^2)).
Real left_tail_bound(Real mu, long a, Real sum_e_x2);

enum class CouplingKind { negatively_related, positively_related, custom };

struct SizeBiasSummary {
  Real e_abs = 0;  // E|W + 1 - W^s|
  CouplingKind coupling_kind = CouplingKind::custom;
};

BoundBreakdown theorem12_bound(Real mu, const SizeBiasSummary& sb, const TailShiftQuery& q,
                               Real left_tail);
BoundBreakdown theorem2_bound(Real sigma2, Real e_abs_r_theta_r, const TailShiftQuery& q,
                              Real left_tail);

/// Bound on E|W + 1 - W^s| from the monotone coupling.
Real size_bias_e_abs(CouplingKind kind, Real mu, Real sigma2, Real sum_pi2);

/// 1 and sqrt(2/pi) (sum p_i ^ (1 - p_i) - 1/4)^{-1/2}, whichever is smaller.
Real pb_theta(std::span<const Real> p);

BoundBreakdown pb_bound_a0(std::span<const Real> p, long k);
BoundBreakdown pb_bound_shifted(std::span<const Real> p, long k);

struct ProdBinLowerBoundInputs {
  Real mu = 0;
  Real mu2 = 0;
  Real x = 0;  // (k - mu) / sqrt(mu)
  Real M = 0;
};

ProdBinLowerBoundInputs make_pb_lower_inputs(Real mu, Real mu2, long k);
/// (lower, 0): the interval that contains ratio - 1.
std::pair<Real, Real> pb_lower_bound(const ProdBinLowerBoundInputs& in);

/// Width of the records bracket using only ln n + gamma.
Real records_bound(long n, long k);

BoundBreakdown matching_bound(long n, long k);
BoundBreakdown occupancy_bound(long boxes, long balls, long k);
BoundBreakdown birthday_bound(long boxes, long balls, long k);
BoundBreakdown triangles_bound(long vertices, Real p, long k);
BoundBreakdown two_runs_bound_a0(long n, Real p, long k);
BoundBreakdown two_runs_bound_shifted(long n, Real p, long k);
long two_runs_shift(long n, Real p);

}  // namespace pmd
