#pragma once

// Norms of the solution of the Poisson Stein equation
//   lambda f(j+1) - j f(j) = 1[j >= k] - P(Y >= k),   Y ~ Pn(lambda),
// for k > lambda. The constants are
//   c0       = F(k-1) / (k pi_k)
//   c1_minus = c0 (1 - F(k-2)/F(k-1) * lambda/(k-1))
//   c1_plus  = c0 (1 - Fbar(k+1)/Fbar(k) * k/lambda)
//   c1       = max(c1_minus, c1_plus),  c2 = c1_minus + c1_plus
// so that |f| <= c0 P(Y>=k), |Delta f| <= c1 P(Y>=k), |Delta^2 f| <= c2 P(Y>=k).

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmd/special_functions.hpp"

namespace pmd {

struct ConsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SteinFactorSet {
  Real lambda = 0;
  long k = 0;
  Real c0 = 0;
  Real c1_minus = 0;
  Real c1_plus = 0;
  Real c1 = 0;
  Real c2 = 0;
  // (1 - e^{-lambda}) / (lambda P(Y >= k)), the total-variation comparator.
  Real naive = 0;
  LogProb log_tail;  // ln P(Y >= k)
};

SteinFactorSet stein_factors(Real lambda, long k);

// f on 0..i_max with f(0) = f(1); f(j) = 0 for j < 0 is implicit.
struct SteinSolution {
  Real lambda = 0;
  long k = 0;
  long i_max = 0;
  std::vector<Real> f;            // closed form through the mean hitting times
  std::vector<Real> f_recursion;  // the Stein identity iterated directly
  Real max_relative_discrepancy = 0;
};

long default_i_max(Real lambda, long k);

/// Solves the Stein equation for h = 1[k, inf) two ways and throws
/// ConsistencyError if they disagree by more than `tolerance` (relative).
SteinSolution solve_stein_equation(Real lambda, long k, std::optional<long> i_max = std::nullopt,
                                   Real tolerance = 1e-10L);

struct PropertyCheck {
  std::string name;
  bool passed = false;
  Real observed = 0;
  Real expected = 0;
};

struct LemmaReport {
  Real lambda = 0;
  long k = 0;
  long i_max = 0;
  std::vector<PropertyCheck> checks;

  bool all_passed() const;
  std::vector<std::string> failures() const;
};

/// Checks the sign pattern, monotonicity and sup-norm identities of the
/// solution against the closed-form factors.
LemmaReport verify_lemma_properties(Real lambda, long k, std::optional<long> i_max = std::nullopt,
                                    Real tolerance = 1e-10L);

struct ConjectureRow {
  Real lambda = 0;
  long k = 0;
  Real gap = 0;      // c1_minus - c1_plus
  Real log_gap = 0;  // NaN when gap <= 0
  bool flagged = false;
  bool log_gap_increasing = true;  // relative to the previous k at the same lambda
};

/// For each lambda, k runs over floor(lambda)+1 .. floor(lambda)+k_max_offset.
std::vector<ConjectureRow> conjecture_scan(std::span<const Real> lambdas, long k_max_offset);

}  // namespace pmd
