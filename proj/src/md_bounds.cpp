#include "pmd/md_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pmd/compensated_sum.hpp"
#include "pmd/exact_oracles.hpp"

namespace pmd {

namespace {

constexpr Real kInf = std::numeric_limits<Real>::infinity();

BoundBreakdown assemble(const TailShiftQuery& q, const SteinFactorSet& f,
                        std::vector<BoundTerm> terms) {
  BoundBreakdown b;
  b.query = q;
  b.factors = f;
  CompensatedSum sum;
  bool finite = true;
  for (const auto& t : terms) {
    if (!std::isfinite(t.value)) finite = false;
    sum.add(t.value);
  }
  b.terms = std::move(terms);
  b.total = finite ? sum.value() : kInf;
  return b;
}

void check_non_negative(Real v, const char* what) {
  if (!(v >= 0)) throw PreconditionError(std::string(what) + " must be non-negative");
}

// Product that treats 0 * inf as 0: a vanishing ingredient kills the term.
Real scaled(Real factor, Real ingredient) { return ingredient == 0 ? 0 : factor * ingredient; }

std::vector<Real> as_vector(std::span<const Real> p) { return {p.begin(), p.end()}; }

}  // namespace

std::optional<Real> BoundBreakdown::term(const std::string& name) const {
  for (const auto& t : terms) {
    if (t.name == name) return t.value;
  }
  return std::nullopt;
}

TailShiftQuery make_query(Real mu, long a, long k) {
  const Real lambda = mu - static_cast<Real>(a);
  if (!(lambda > 0)) throw PreconditionError("shift a must be below the mean");
  if (!(static_cast<Real>(k) > lambda)) {
    throw PreconditionError("k = " + std::to_string(k) + " must exceed lambda = " +
                            std::to_string(static_cast<double>(lambda)));
  }
  return {a, lambda, k};
}

BoundBreakdown theorem1_bound(const Theorem1Ingredients& ing, const TailShiftQuery& q) {
  check_non_negative(ing.sum_term, "sum_term");
  check_non_negative(ing.abs_lambda_minus_sigma2, "|lambda - sigma2|");
  check_non_negative(ing.left_tail, "left_tail");
  const SteinFactorSet f = stein_factors(q.lambda, q.k);
  return assemble(q, f,
                  {{kMainC2Term, scaled(f.c2, ing.sum_term)},
                   {kC1LambdaSigmaTerm, scaled(f.c1, ing.abs_lambda_minus_sigma2)},
                   {kLeftTailTerm, ing.left_tail}});
}

BoundBreakdown corollary1_bound(std::span<const SummandMoments> summands, const TailShiftQuery& q,
                                Real sigma2, Real left_tail) {
  CompensatedSum sum;
  for (const auto& s : summands) {
    check_non_negative(s.theta, "theta_i");
    sum.add(s.theta * (s.mu * std::fabs(s.e_x_x_minus_mu) + 0.5L * s.e_abs_x_minus_mu_falling2));
  }
  return theorem1_bound({sum.value(), std::fabs(q.lambda - sigma2), left_tail}, q);
}

Real left_tail_bound(Real mu, long a, Real sum_e_x2) {
  if (!(mu > static_cast<Real>(a))) throw DomainError("left tail bound needs a < mu");
  if (!(sum_e_x2 > 0)) throw DomainError("sum of E X_i^2 must be positive");
  const Real d = mu - static_cast<Real>(a) + 2;
  return std::exp(-d * d / (2 * sum_e_x2));
}

BoundBreakdown theorem12_bound(Real mu, const SizeBiasSummary& sb, const TailShiftQuery& q,
                               Real left_tail) {
  check_non_negative(sb.e_abs, "E|W+1-W^s|");
  check_non_negative(left_tail, "left_tail");
  const SteinFactorSet f = stein_factors(q.lambda, q.k);
  const Real ingredient = mu * sb.e_abs + std::fabs(mu - q.lambda);
  return assemble(q, f, {{kC1MuTerm, scaled(f.c1, ingredient)}, {kLeftTailTerm, left_tail}});
}

BoundBreakdown theorem2_bound(Real sigma2, Real e_abs_r_theta_r, const TailShiftQuery& q,
                              Real left_tail) {
  check_non_negative(sigma2, "sigma2");
  check_non_negative(e_abs_r_theta_r, "E|R| theta_R");
  check_non_negative(left_tail, "left_tail");
  const SteinFactorSet f = stein_factors(q.lambda, q.k);
  return assemble(q, f,
                  {{kMainC2Term, scaled(f.c2, sigma2 * e_abs_r_theta_r)},
                   {kC1LambdaSigmaTerm, scaled(f.c1, std::fabs(q.lambda - sigma2) / q.lambda)},
                   {kLeftTailTerm, left_tail}});
}

Real size_bias_e_abs(CouplingKind kind, Real mu, Real sigma2, Real sum_pi2) {
  if (!(mu > 0)) throw DomainError("size bias needs mu > 0");
  Real v = 0;
  switch (kind) {
    case CouplingKind::negatively_related:
      v = (mu - sigma2) / mu;
      break;
    case CouplingKind::positively_related:
      v = (sigma2 - mu + 2 * sum_pi2) / mu;
      break;
    case CouplingKind::custom:
      throw PreconditionError("custom couplings supply E|W+1-W^s| directly");
  }
  if (v < 0) throw ConsistencyError("E|W+1-W^s| came out negative; moments are inconsistent");
  return v;
}

Real pb_theta(std::span<const Real> p) {
  CompensatedSum s;
  for (Real pi : p) s.add(std::min(pi, 1.0L - pi));
  const Real excess = s.value() - 0.25L;
  if (excess <= 0) return 1;
  return std::min<Real>(1, std::sqrt(2 / std::numbers::pi_v<Real>) / std::sqrt(excess));
}

BoundBreakdown pb_bound_a0(std::span<const Real> p, long k) {
  const MomentSummary m = poisson_binomial_params(as_vector(p));
  const TailShiftQuery q = make_query(m.mu, 0, k);
  // Independent summands are negatively related: mu E|W+1-W^s| = mu2.
  return theorem12_bound(m.mu, {*m.mu2 / m.mu, CouplingKind::negatively_related}, q, 0);
}

BoundBreakdown pb_bound_shifted(std::span<const Real> p, long k) {
  const MomentSummary m = poisson_binomial_params(as_vector(p));
  const long a = static_cast<long>(std::floor(*m.mu2));
  const TailShiftQuery q = make_query(m.mu, a, k);
  const Real theta = pb_theta(p);
  std::vector<SummandMoments> summands;
  summands.reserve(p.size());
  for (Real pi : p) summands.push_back({theta, pi, pi * (1.0L - pi), 0});
  // W >= 0, so a <= 0 leaves the event W - a < -1 empty.
  const Real left = a <= 0 ? 0 : left_tail_bound(m.mu, a, m.mu);
  return corollary1_bound(summands, q, m.sigma2, left);
}

ProdBinLowerBoundInputs make_pb_lower_inputs(Real mu, Real mu2, long k) {
  if (!(mu > 0)) throw DomainError("mu must be positive");
  ProdBinLowerBoundInputs in;
  in.mu = mu;
  in.mu2 = mu2;
  in.x = (static_cast<Real>(k) - mu) / std::sqrt(mu);
  if (mu < 1) {
    in.M = std::exp(mu);
  } else {
    if (!(mu2 < mu)) throw DomainError("M needs mu2 < mu");
    in.M = std::exp(13.0L / 12.0L) * std::sqrt(2 * std::numbers::pi_v<Real>) /
           std::sqrt(1 - mu2 / mu);
  }
  return in;
}

std::pair<Real, Real> pb_lower_bound(const ProdBinLowerBoundInputs& in) {
  if (!(in.x >= 1)) throw PreconditionError("bracket needs x = (k - mu)/sqrt(mu) >= 1");
  if (!(in.mu2 < in.mu)) throw DomainError("bracket needs mu2 < mu");
  const Real x = in.x;
  const Real lower = -2 * in.M * (in.mu2 / in.mu) *
                     (x * x + 1 + 4 * x * std::sqrt(-std::expm1(-in.mu) / in.mu));
  return {lower, 0};
}

Real records_bound(long n, long k) {
  const MomentSummary m = records_params(n);
  const Real x = (static_cast<Real>(k) - m.mu) / std::sqrt(m.mu);
  if (!(x >= 1)) throw PreconditionError("records bound needs x >= 1");
  const Real h = std::log(static_cast<Real>(n)) + std::numbers::egamma_v<Real>;
  const Real zeta2 = std::numbers::pi_v<Real> * std::numbers::pi_v<Real> / 6;
  if (!(h - zeta2 > 0)) throw PreconditionError("records bound needs ln n + gamma > pi^2/6");
  return 2 * std::exp(13.0L / 12.0L) * std::sqrt(2 * std::numbers::pi_v<Real>) * (zeta2 - 1) /
         std::sqrt((h - 1) * (h - zeta2)) * (x * x + 1 + 4 * x / std::sqrt(h - 1));
}

BoundBreakdown matching_bound(long n, long k) {
  if (n < 1) throw DomainError("matching n must be >= 1");
  if (k < 2) throw PreconditionError("matching bound needs k >= 2");
  // mu = 1 and E|W+1-W^s| = 2/n.
  return theorem12_bound(1, {2.0L / static_cast<Real>(n), CouplingKind::custom},
                         make_query(1, 0, k), 0);
}

BoundBreakdown occupancy_bound(long boxes, long balls, long k) {
  const MomentSummary m = occupancy_params(boxes, balls);
  const Real n = static_cast<Real>(boxes);
  const Real e_abs = m.mu - (n - 1) * std::pow(1 - 1 / (n - 1), static_cast<Real>(balls));
  return theorem12_bound(m.mu, {e_abs, CouplingKind::negatively_related},
                         make_query(m.mu, 0, k), 0);
}

BoundBreakdown birthday_bound(long boxes, long balls, long k) {
  const Real mu = birthday_mu(boxes, balls);
  const Real e_abs = (1 + 2 * static_cast<Real>(balls)) / static_cast<Real>(boxes);
  return theorem12_bound(mu, {e_abs, CouplingKind::custom}, make_query(mu, 0, k), 0);
}

BoundBreakdown triangles_bound(long vertices, Real p, long k) {
  const MomentSummary m = triangles_params(vertices, p);
  const Real n = static_cast<Real>(vertices);
  const Real e_abs = 3 * (n - 3) * p * p * (1 - p) + p * p * p;
  return theorem12_bound(m.mu, {e_abs, CouplingKind::positively_related},
                         make_query(m.mu, 0, k), 0);
}

BoundBreakdown two_runs_bound_a0(long n, Real p, long k) {
  const MomentSummary m = two_runs_params(n, p);
  return theorem12_bound(m.mu, {p * (2 - p), CouplingKind::custom}, make_query(m.mu, 0, k), 0);
}

long two_runs_shift(long n, Real p) {
  return static_cast<long>(std::floor(static_cast<Real>(n) * p * p * p * (3 * p - 2)));
}

BoundBreakdown two_runs_bound_shifted(long n, Real p, long k) {
  if (n < 9) throw PreconditionError("shifted 2-runs bound needs n >= 9");
  if (!(p < 2.0L / 3.0L)) throw PreconditionError("shifted 2-runs bound needs p < 2/3");
  const MomentSummary m = two_runs_params(n, p);
  const TailShiftQuery q = make_query(m.mu, two_runs_shift(n, p), k);
  const Real nn = static_cast<Real>(n);
  const Real q1 = 1 - p;
  const Real main = 9.2L * nn * p * p * (1 + 5 * p) / std::sqrt((nn - 8) * q1 * q1 * q1);
  // a <= 0 makes P(W - a < -1) = 0.
  return theorem1_bound({main, std::min<Real>(1, q.lambda), 0}, q);
}

}  // namespace pmd
