#include "pmd/special_functions.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

namespace pmd {

namespace {

constexpr Real kEps = std::numeric_limits<Real>::epsilon();
constexpr Real kTiny = std::numeric_limits<Real>::min() / kEps;
constexpr Real kNegInf = -std::numeric_limits<Real>::infinity();
constexpr int kMaxIterations = 200000;

// lgammal writes the global signgam; the reentrant form keeps this pure.
Real log_gamma(Real x) {
  int sign = 0;
  return lgammal_r(x, &sign);
}

void check_lambda(Real lambda) {
  if (!(lambda > 0) || !std::isfinite(lambda)) {
    throw DomainError("Poisson mean must be positive and finite, got " +
                      std::to_string(static_cast<double>(lambda)));
  }
}

// ln P(a, x) by the power series, used for x < a + 1.
Real log_gamma_p_series(Real a, Real x) {
  Real ap = a;
  Real term = 1.0L / a;
  Real sum = term;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0L;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) {
      return std::log(sum) - x + a * std::log(x) - log_gamma(a);
    }
  }
  throw std::runtime_error("incomplete gamma series did not converge");
}

// ln Q(a, x) by the Lentz continued fraction, used for x >= a + 1.
Real log_gamma_q_fraction(Real a, Real x) {
  Real b = x + 1.0L - a;
  Real c = 1.0L / kTiny;
  Real d = 1.0L / b;
  Real h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const Real an = -i * (i - a);
    b += 2.0L;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0L / d;
    const Real delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0L) < kEps) {
      return std::log(h) - x + a * std::log(x) - log_gamma(a);
    }
  }
  throw std::runtime_error("incomplete gamma continued fraction did not converge");
}

void check_gamma_args(Real a, Real x) {
  if (!(a > 0) || !(x >= 0) || !std::isfinite(a) || std::isnan(x)) {
    throw DomainError("incomplete gamma requires a > 0 and x >= 0");
  }
}

}  // namespace

LogProb LogProb::from_prob(Real p) {
  if (!(p >= 0) || p > 1) throw DomainError("probability outside [0, 1]");
  return {std::log(p)};
}

LogProb log_add_exp(LogProb a, LogProb b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const Real hi = std::max(a.value, b.value);
  const Real lo = std::min(a.value, b.value);
  return {hi + std::log1p(std::exp(lo - hi))};
}

LogProb log_sum_exp(std::span<const LogProb> xs) {
  Real hi = kNegInf;
  for (const auto& x : xs) hi = std::max(hi, x.value);
  if (hi == kNegInf) return LogProb::zero();
  if (hi == std::numeric_limits<Real>::infinity()) return {hi};
  // Neumaier summation of the scaled terms.
  Real sum = 0.0L;
  Real comp = 0.0L;
  for (const auto& x : xs) {
    const Real term = std::exp(x.value - hi);
    const Real t = sum + term;
    if (std::fabs(sum) >= std::fabs(term)) {
      comp += (sum - t) + term;
    } else {
      comp += (term - t) + sum;
    }
    sum = t;
  }
  return {hi + std::log(sum + comp)};
}

LogProb log1m_exp(LogProb a) {
  if (a.value > 0) throw DomainError("log1m_exp argument must be <= 0");
  if (a.value == 0) return LogProb::zero();
  if (a.value > -std::numbers::ln2_v<Real>) return {std::log(-std::expm1(a.value))};
  return {std::log1p(-std::exp(a.value))};
}

LogProb log_diff_exp(LogProb a, LogProb b) {
  if (b.value > a.value) {
    throw DomainError("log_diff_exp would produce a negative probability");
  }
  if (b.is_zero()) return a;
  if (a.value == b.value) return LogProb::zero();
  return {a.value + log1m_exp({b.value - a.value}).value};
}

Real log_gamma_p(Real a, Real x) {
  check_gamma_args(a, x);
  if (x == 0) return kNegInf;
  if (x < a + 1.0L) return log_gamma_p_series(a, x);
  return log1m_exp({log_gamma_q_fraction(a, x)}).value;
}

Real log_gamma_q(Real a, Real x) {
  check_gamma_args(a, x);
  if (x == 0) return 0.0L;
  if (x < a + 1.0L) return log1m_exp({log_gamma_p_series(a, x)}).value;
  return log_gamma_q_fraction(a, x);
}

LogProb log_poisson_pmf(Real lambda, long long k) {
  check_lambda(lambda);
  if (k < 0) throw DomainError("Poisson support index must be non-negative");
  if (k == 0) return {-lambda};
  const Real kk = static_cast<Real>(k);
  return {kk * std::log(lambda) - lambda - log_gamma(kk + 1.0L)};
}

// P(Y >= k) = P(k, lambda), P(Y <= k) = Q(k + 1, lambda).
LogProb log_poisson_sf(Real lambda, long long k) {
  check_lambda(lambda);
  if (k < 0) throw DomainError("Poisson tail index must be non-negative");
  if (k == 0) return LogProb::one();
  return {log_gamma_p(static_cast<Real>(k), lambda)};
}

LogProb log_poisson_cdf(Real lambda, long long k) {
  check_lambda(lambda);
  if (k < 0) return LogProb::zero();
  return {log_gamma_q(static_cast<Real>(k) + 1.0L, lambda)};
}

PoissonTailTriple poisson_tail_triple(Real lambda, long long k) {
  return {lambda, k, log_poisson_pmf(lambda, k), log_poisson_cdf(lambda, k - 1),
          log_poisson_sf(lambda, k)};
}

LogProb log_normal_sf(Real mu, Real sigma, Real x) {
  if (!(sigma > 0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive");
  if (std::isnan(mu) || std::isnan(x)) throw DomainError("normal survival of NaN");
  const Real z = (x - mu) / sigma;
  if (z == std::numeric_limits<Real>::infinity()) return LogProb::zero();
  if (z == -std::numeric_limits<Real>::infinity()) return LogProb::one();
  constexpr Real inv_sqrt2 = 1.0L / std::numbers::sqrt2_v<Real>;
  if (z < 0) return {std::log1p(-0.5L * std::erfc(-z * inv_sqrt2))};
  if (z <= 60) return {std::log(0.5L * std::erfc(z * inv_sqrt2))};
  // Mills ratio continued fraction R(z) = 1/(z + 1/(z + 2/(z + ...))).
  Real t = z;
  for (int n = 80; n >= 1; --n) t = z + n / t;
  const Real log_phi = -0.5L * z * z - 0.5L * std::log(2.0L * std::numbers::pi_v<Real>);
  return {log_phi - std::log(t)};
}

}  // namespace pmd
