#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "pmd/special_functions.hpp"

namespace pmd {

// Exact pmf of an integer random variable on offset .. offset + size - 1.
// Mass outside the stored window is bounded above by truncated_mass.
struct DistributionTable {
  long offset = 0;
  std::vector<LogProb> log_pmf;
  Real truncated_mass = 0;
  // Upper bound on the relative rounding error of each stored entry.
  Real rounding_rel_bound = 0;

  long min_support() const { return offset; }
  long max_support() const { return offset + static_cast<long>(log_pmf.size()) - 1; }

  Real pmf(long w) const;
  LogProb log_pmf_at(long w) const;
  /// ln P(W >= k) over the stored window (the lower end of the bracket).
  LogProb log_tail(long k) const;
  Real tail(long k) const { return log_tail(k).prob(); }
  /// [P(W >= k) lower, upper] accounting for truncated mass.
  std::pair<Real, Real> tail_bracket(long k) const;
  /// P(W < k) over the stored window.
  Real lower_tail(long k) const;

  Real total_mass() const;
  Real mean() const;
  Real variance() const;
};

/// Linear-domain pmf to table; entries must be non-negative.
DistributionTable table_from_pmf(long offset, const std::vector<Real>& pmf,
                                 Real truncated_mass = 0, Real rounding_rel_bound = 0);

/// Total variation distance over the union of supports.
Real total_variation(const DistributionTable& a, const DistributionTable& b);

/// CSV with columns k, pmf, log_pmf. `header_lines` are written as '#' comments.
void write_table_csv(std::ostream& out, const DistributionTable& table,
                     const std::vector<std::string>& header_lines);

}  // namespace pmd
