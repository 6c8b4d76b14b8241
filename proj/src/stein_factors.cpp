#include "pmd/stein_factors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pmd {

namespace {

void check_regime(Real lambda, long k) {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive");
  if (k < 1) throw DomainError("k must be a positive integer");
  if (static_cast<Real>(k) <= lambda) {
    throw PreconditionError("Stein factors require k > lambda (lambda=" +
                            std::to_string(static_cast<double>(lambda)) +
                            ", k=" + std::to_string(k) + ")");
  }
}

Real relative_error(Real observed, Real expected) {
  if (expected == 0) return std::fabs(observed);
  return std::fabs(observed - expected) / std::fabs(expected);
}

}  // namespace

SteinFactorSet stein_factors(Real lambda, long k) {
  check_regime(lambda, k);
  const LogProb cdf_km1 = log_poisson_cdf(lambda, k - 1);
  const LogProb cdf_km2 = log_poisson_cdf(lambda, k - 2);
  const LogProb pmf_k = log_poisson_pmf(lambda, k);
  const LogProb sf_k = log_poisson_sf(lambda, k);
  const LogProb sf_kp1 = log_poisson_sf(lambda, k + 1);

  const Real kk = static_cast<Real>(k);
  SteinFactorSet out;
  out.lambda = lambda;
  out.k = k;
  out.log_tail = sf_k;
  out.c0 = std::exp(cdf_km1.value - std::log(kk) - pmf_k.value);

  // F(-1) = 0 kills the k = 1 term before the 0/0.
  const Real r_minus =
      k == 1 ? 0.0L : std::exp(cdf_km2.value - cdf_km1.value) * lambda / (kk - 1.0L);
  const Real r_plus = std::exp(sf_kp1.value - sf_k.value) * kk / lambda;

  out.c1_minus = out.c0 * (1.0L - r_minus);
  out.c1_plus = out.c0 * (1.0L - r_plus);
  out.c1 = std::max(out.c1_minus, out.c1_plus);
  out.c2 = out.c1_minus + out.c1_plus;
  out.naive = -std::expm1(-lambda) / lambda * std::exp(-sf_k.value);
  return out;
}

long default_i_max(Real lambda, long k) {
  return k + static_cast<long>(std::ceil(10.0L + 10.0L * std::sqrt(lambda)));
}

SteinSolution solve_stein_equation(Real lambda, long k, std::optional<long> i_max,
                                   Real tolerance) {
  check_regime(lambda, k);
  const long top = i_max.value_or(default_i_max(lambda, k));
  if (top < k + 10) throw PreconditionError("i_max must be at least k + 10");

  const LogProb log_tail = log_poisson_sf(lambda, k);
  const LogProb log_head = log_poisson_cdf(lambda, k - 1);
  const Real log_lambda = std::log(lambda);

  SteinSolution sol;
  sol.lambda = lambda;
  sol.k = k;
  sol.i_max = top;
  sol.f.assign(top + 1, 0.0L);
  sol.f_recursion.assign(top + 1, 0.0L);

  // f(i) = -tau+_{i-1} Fbar(k) for i <= k and -tau-_i F(k-1) for i > k, with
  // tau+_j = F(j) / (lambda pi_j) and tau-_j = Fbar(j) / (j pi_j).
  for (long i = 1; i <= k; ++i) {
    sol.f[i] = -std::exp(log_poisson_cdf(lambda, i - 1).value - log_lambda -
                         log_poisson_pmf(lambda, i - 1).value + log_tail.value);
  }
  for (long i = k + 1; i <= top; ++i) {
    sol.f[i] = -std::exp(log_poisson_sf(lambda, i).value - std::log(static_cast<Real>(i)) -
                         log_poisson_pmf(lambda, i).value + log_head.value);
  }
  sol.f[0] = sol.f[1];

  // Below k the forward recursion f(j+1) = (j f(j) - Fbar(k)) / lambda is
  // stable. Above k the bounded solution is the recessive one, so the same
  // identity is run downward from far past i_max, where the starting error
  // is damped by prod lambda / j.
  const Real tail = log_tail.prob();
  const Real head = log_head.prob();
  auto& fr = sol.f_recursion;
  fr[1] = -tail / lambda;
  for (long j = 1; j < k; ++j) fr[j + 1] = (static_cast<Real>(j) * fr[j] - tail) / lambda;

  long start = top;
  Real damping = 1.0L;
  while (damping > 1e-40L && start < top + 1000000) {
    ++start;
    damping *= lambda / static_cast<Real>(start);
  }
  Real g = -head / static_cast<Real>(start);
  for (long j = start - 1; j > k; --j) {
    g = (lambda * g - head) / static_cast<Real>(j);
    if (j <= top) fr[j] = g;
  }
  fr[0] = fr[1];
  const Real f_k_from_above = (lambda * fr[k + 1] - head) / static_cast<Real>(k);

  Real worst = relative_error(f_k_from_above, fr[k]);
  for (long i = 0; i <= top; ++i) worst = std::max(worst, relative_error(fr[i], sol.f[i]));
  sol.max_relative_discrepancy = worst;
  if (!(worst <= tolerance)) {
    throw ConsistencyError("Stein solution routes disagree: relative discrepancy " +
                           std::to_string(static_cast<double>(worst)) + " at lambda=" +
                           std::to_string(static_cast<double>(lambda)) +
                           ", k=" + std::to_string(k));
  }
  return sol;
}

bool LemmaReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

std::vector<std::string> LemmaReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks) {
    if (!c.passed) out.push_back(c.name);
  }
  return out;
}

LemmaReport verify_lemma_properties(Real lambda, long k, std::optional<long> i_max,
                                    Real tolerance) {
  const SteinSolution sol = solve_stein_equation(lambda, k, i_max, tolerance);
  const SteinFactorSet fac = stein_factors(lambda, k);
  const Real tail = fac.log_tail.prob();
  const long top = sol.i_max;

  LemmaReport report;
  report.lambda = lambda;
  report.k = k;
  report.i_max = top;
  auto add = [&](std::string name, bool passed, Real observed, Real expected) {
    report.checks.push_back({std::move(name), passed, observed, expected});
  };
  auto add_norm = [&](std::string name, Real observed, Real expected) {
    add(std::move(name), relative_error(observed, expected) <= tolerance, observed, expected);
  };

  // At k = 1 the lower side of the lattice is the single point 0, where the
  // closed form (with F(-1) = 0) gives f(0) = 0 rather than f(1).
  std::vector<Real> g = sol.f;
  if (k == 1) g[0] = 0.0L;

  std::vector<Real> d(top);
  for (long i = 0; i < top; ++i) d[i] = g[i + 1] - g[i];
  std::vector<Real> d2(top - 1);
  for (long i = 0; i + 1 < top; ++i) d2[i] = d[i + 1] - d[i];

  const Real f_max = *std::max_element(sol.f.begin(), sol.f.end());
  add("f_nonpositive", f_max <= 0, f_max, 0);
  const auto f_min = std::min_element(sol.f.begin(), sol.f.end());
  add("f_minimized_at_k", sol.f[k] <= *f_min, static_cast<Real>(f_min - sol.f.begin()),
      static_cast<Real>(k));

  bool neg = true;
  for (long i = (k == 1 ? 0 : 1); i <= k - 1; ++i) neg = neg && d[i] < 0;
  if (k >= 2) neg = neg && d[0] <= 0;
  add("delta_f_negative_below_k", neg, 0, 0);

  bool dec_lo = true;
  for (long i = 0; i + 1 <= k - 1; ++i) dec_lo = dec_lo && d[i + 1] <= d[i];
  add("delta_f_decreasing_below_k", dec_lo, 0, 0);

  bool pos = true;
  for (long i = k; i < top; ++i) pos = pos && d[i] > 0;
  add("delta_f_positive_from_k", pos, 0, 0);

  bool dec_hi = true;
  for (long i = k; i + 1 < top; ++i) dec_hi = dec_hi && d[i + 1] <= d[i];
  add("delta_f_decreasing_from_k", dec_hi, 0, 0);

  Real sup_f = 0;
  for (Real v : sol.f) sup_f = std::max(sup_f, std::fabs(v));
  Real sup_lo = 0;
  for (long i = 0; i <= k - 1; ++i) sup_lo = std::max(sup_lo, std::fabs(d[i]));
  Real sup_hi = 0;
  for (long i = k; i < top; ++i) sup_hi = std::max(sup_hi, std::fabs(d[i]));
  Real sup_d2 = 0;
  for (Real v : d2) sup_d2 = std::max(sup_d2, std::fabs(v));

  add_norm("norm_f", sup_f, fac.c0 * tail);
  add_norm("norm_delta_f_below_k", sup_lo, fac.c1_minus * tail);
  add_norm("norm_delta_f_from_k", sup_hi, fac.c1_plus * tail);
  add_norm("norm_delta_f", std::max(sup_lo, sup_hi), fac.c1 * tail);
  add_norm("norm_delta2_f", sup_d2, fac.c2 * tail);

  bool d2_sign = d2[k - 1] > 0;
  for (long i = 0; i + 1 < top; ++i) {
    if (i != k - 1) d2_sign = d2_sign && d2[i] <= 0;
  }
  add("delta2_f_nonpositive_except_k_minus_1", d2_sign, d2[k - 1], 0);
  return report;
}

std::vector<ConjectureRow> conjecture_scan(std::span<const Real> lambdas, long k_max_offset) {
  std::vector<ConjectureRow> rows;
  for (Real lambda : lambdas) {
    const long base = static_cast<long>(std::floor(lambda));
    Real previous = std::numeric_limits<Real>::quiet_NaN();
    for (long k = base + 1; k <= base + k_max_offset; ++k) {
      const SteinFactorSet fac = stein_factors(lambda, k);
      ConjectureRow row;
      row.lambda = lambda;
      row.k = k;
      row.gap = fac.c1_minus - fac.c1_plus;
      row.flagged = !(row.gap > 0);
      row.log_gap = row.flagged ? std::numeric_limits<Real>::quiet_NaN() : std::log(row.gap);
      row.log_gap_increasing = std::isnan(previous) || row.log_gap > previous;
      previous = row.log_gap;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace pmd
