#pragma once

// Log-domain probability primitives: Poisson pmf/cdf/survival via the
// regularized incomplete gamma function, the normal survival function and
// log-sum-exp arithmetic. Everything here is a pure function.

#include <compare>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace pmd {

using Real = long double;

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Natural log of a probability. -inf encodes probability zero.
struct LogProb {
  Real value = -std::numeric_limits<Real>::infinity();

  static constexpr LogProb zero() { return {}; }
  static constexpr LogProb one() { return {0.0L}; }
  static LogProb from_prob(Real p);

  Real prob() const { return std::exp(value); }
  bool is_zero() const { return value == -std::numeric_limits<Real>::infinity(); }

  friend auto operator<=>(const LogProb&, const LogProb&) = default;
};

inline LogProb operator*(LogProb a, LogProb b) { return {a.value + b.value}; }
inline LogProb operator/(LogProb a, LogProb b) { return {a.value - b.value}; }

LogProb log_add_exp(LogProb a, LogProb b);
LogProb log_sum_exp(std::span<const LogProb> xs);
// ln(e^a - e^b); requires a >= b.
LogProb log_diff_exp(LogProb a, LogProb b);
// ln(1 - e^a) for a <= 0.
LogProb log1m_exp(LogProb a);

/// Regularized incomplete gamma functions in log domain, shape a > 0, x >= 0.
/// The lower series is used for x < a + 1 and the upper continued fraction
/// otherwise; the complementary value comes from log1m_exp.
Real log_gamma_p(Real a, Real x);
Real log_gamma_q(Real a, Real x);

LogProb log_poisson_pmf(Real lambda, long long k);
/// ln P(Y >= k), Y ~ Pn(lambda). k <= 0 gives probability one.
LogProb log_poisson_sf(Real lambda, long long k);
/// ln P(Y <= k). k < 0 gives probability zero.
LogProb log_poisson_cdf(Real lambda, long long k);

/// pi_k, F(k-1) and Fbar(k) for one (lambda, k).
struct PoissonTailTriple {
  Real lambda;
  long long k;
  LogProb log_pmf_k;
  LogProb log_cdf_km1;
  LogProb log_sf_k;
};

PoissonTailTriple poisson_tail_triple(Real lambda, long long k);

/// ln P(N(mu, sigma^2) >= x).
LogProb log_normal_sf(Real mu, Real sigma, Real x);

}  // namespace pmd
