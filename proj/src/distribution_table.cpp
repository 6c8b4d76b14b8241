#include "pmd/distribution_table.hpp"

#include <algorithm>
#include <ostream>

#include "pmd/compensated_sum.hpp"
#include "pmd/csv.hpp"

namespace pmd {

LogProb DistributionTable::log_pmf_at(long w) const {
  if (w < offset || w > max_support()) return LogProb::zero();
  return log_pmf[static_cast<std::size_t>(w - offset)];
}

Real DistributionTable::pmf(long w) const { return log_pmf_at(w).prob(); }

LogProb DistributionTable::log_tail(long k) const {
  const long first = std::max(k, offset);
  if (first > max_support()) return LogProb::zero();
  return log_sum_exp(std::span(log_pmf).subspan(static_cast<std::size_t>(first - offset)));
}

std::pair<Real, Real> DistributionTable::tail_bracket(long k) const {
  const Real t = tail(k);
  return {t, t + truncated_mass};
}

Real DistributionTable::lower_tail(long k) const {
  CompensatedSum sum;
  for (long w = offset; w < k && w <= max_support(); ++w) sum.add(pmf(w));
  return sum.value();
}

Real DistributionTable::total_mass() const {
  CompensatedSum sum;
  for (const auto& lp : log_pmf) sum.add(lp.prob());
  return sum.value();
}

Real DistributionTable::mean() const {
  CompensatedSum sum;
  for (long w = offset; w <= max_support(); ++w) sum.add(static_cast<Real>(w) * pmf(w));
  return sum.value();
}

Real DistributionTable::variance() const {
  const Real m = mean();
  CompensatedSum sum;
  for (long w = offset; w <= max_support(); ++w) {
    const Real d = static_cast<Real>(w) - m;
    sum.add(d * d * pmf(w));
  }
  return sum.value();
}

DistributionTable table_from_pmf(long offset, const std::vector<Real>& pmf,
                                 Real truncated_mass, Real rounding_rel_bound) {
  DistributionTable t;
  t.offset = offset;
  t.truncated_mass = truncated_mass;
  t.rounding_rel_bound = rounding_rel_bound;
  t.log_pmf.reserve(pmf.size());
  for (Real p : pmf) {
    if (p < 0) throw DomainError("negative probability in table");
    t.log_pmf.push_back(p == 0 ? LogProb::zero() : LogProb{std::log(p)});
  }
  return t;
}

Real total_variation(const DistributionTable& a, const DistributionTable& b) {
  const long lo = std::min(a.min_support(), b.min_support());
  const long hi = std::max(a.max_support(), b.max_support());
  CompensatedSum sum;
  for (long w = lo; w <= hi; ++w) sum.add(std::fabs(a.pmf(w) - b.pmf(w)));
  return 0.5L * sum.value();
}

void write_table_csv(std::ostream& out, const DistributionTable& table,
                     const std::vector<std::string>& header_lines) {
  csv::Writer w(out);
  for (const auto& line : header_lines) w.comment(line);
  w.comment("truncated_mass=" + csv::format_real(table.truncated_mass));
  w.comment("units: k count; pmf probability; log_pmf natural log of probability");
  w.columns({"k", "pmf", "log_pmf"});
  for (long k = table.min_support(); k <= table.max_support(); ++k) {
    const LogProb lp = table.log_pmf_at(k);
    w.row({csv::format_int(k), csv::format_real(lp.prob()), csv::format_real(lp.value)});
  }
}

}  // namespace pmd
