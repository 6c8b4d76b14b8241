#pragma once

// Exact laws of the count W for each application, plus Monte Carlo for the
// instances too large to enumerate.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pmd/distribution_table.hpp"
#include "pmd/special_functions.hpp"

namespace pmd {

struct SizeGuardError : std::length_error {
  using std::length_error::length_error;
};

namespace model {
struct Records { long n; };
struct PoissonBinomial { std::vector<Real> p; };
struct Matching { long n; };
struct Occupancy { long boxes; long balls; };
struct Birthday { long boxes; long balls; };
struct Triangles { long vertices; Real p; };
struct TwoRuns { long n; Real p; };
}  // namespace model

using AppModel = std::variant<model::Records, model::PoissonBinomial, model::Matching,
                              model::Occupancy, model::Birthday, model::Triangles,
                              model::TwoRuns>;

/// Throws DomainError if the model parameters are outside their domains.
void validate_model(const AppModel& m);
std::string describe(const AppModel& m);

struct MomentSummary {
  Real mu = 0;
  Real sigma2 = 0;
  std::optional<Real> mu2;  // sum p_i^2, Poisson-binomial laws only
};

struct PoissonBinomialOptions {
  // When set, the window grows until truncated_mass <= relative_residual * P(W >= k).
  std::optional<long> target_k;
  Real relative_residual = 1e-15L;
  // Initial upper window edge in standard deviations above the mean.
  Real window_sd = 60;
};

DistributionTable poisson_binomial_table(std::span<const Real> p,
                                         const PoissonBinomialOptions& opts = {});
MomentSummary poisson_binomial_params(std::span<const Real> p);

/// Success probabilities 1/i, i = 2..n, of the record indicators.
std::vector<Real> records_probabilities(long n);
MomentSummary records_params(long n);

DistributionTable matching_table(long n);

DistributionTable occupancy_table(long boxes, long balls);
MomentSummary occupancy_params(long boxes, long balls);

DistributionTable birthday_table_small(long boxes, long balls);
Real birthday_mu(long boxes, long balls);
MomentSummary birthday_params(long boxes, long balls);

DistributionTable triangles_table_small(long vertices, Real p);
MomentSummary triangles_params(long vertices, Real p);

DistributionTable two_runs_table(long n, Real p);
MomentSummary two_runs_params(long n, Real p);

/// Exact table for models that have one at this size; throws SizeGuardError otherwise.
DistributionTable exact_table(const AppModel& m);

struct MonteCarloEstimate {
  Real p_hat = 0;
  Real stderr_ = 0;
  long n_samples = 0;
  std::uint64_t seed = 0;
  Real ci95_low = 0;
  Real ci95_high = 0;
};

// Sample counts of W, indexed by value.
struct MonteCarloHistogram {
  std::vector<long> counts;
  long n_samples = 0;
  std::uint64_t seed = 0;
};

/// Deterministic for a given (model, n_samples, seed) regardless of `workers`.
MonteCarloHistogram monte_carlo_histogram(const AppModel& m, long n_samples, std::uint64_t seed,
                                          unsigned workers = 0);
/// Estimate of P(W >= threshold) from a histogram.
MonteCarloEstimate tail_estimate(const MonteCarloHistogram& h, long threshold);
/// Estimate of P(W - a >= k).
MonteCarloEstimate monte_carlo_tail(const AppModel& m, long a, long k, long n_samples,
                                    std::uint64_t seed);

}  // namespace pmd
