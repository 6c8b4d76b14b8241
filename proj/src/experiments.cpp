#include "pmd/experiments.hpp"

#include <cmath>
#include <sstream>

#include "pmd/csv.hpp"
#include "pmd/exact_oracles.hpp"
#include "pmd/parallel.hpp"
#include "pmd/stein_factors.hpp"

namespace pmd {

namespace {

constexpr Real kNaN = std::numeric_limits<Real>::quiet_NaN();

std::string join_longs(const std::vector<long>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string join_reals(const std::vector<Real>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + csv::format_real(v[i]);
  return s;
}

void write_header(csv::Writer& w, const std::string& command, const std::string& config,
                  const std::string& units) {
  w.comment(std::string("tool: ") + kToolVersion);
  w.comment("command: " + command);
  w.comment("config: " + config);
  w.comment("units: " + units);
}

Real ratio_from_logs(LogProb num, LogProb den) {
  if (num.is_zero() || den.is_zero()) return kNaN;
  return std::exp(num.value - den.value);
}

long parse_long(const std::string& s, const std::string& key) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError("grid key '" + key + "': bad integer '" + s + "'");
  return v;
}

Real parse_real(const std::string& s, const std::string& key) {
  std::size_t used = 0;
  Real v = 0;
  try {
    v = std::stold(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError("grid key '" + key + "': bad number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

}  // namespace

GridSpec parse_grid(const std::string& text) {
  GridSpec g;
  if (text.empty()) return g;
  for (const auto& item : split(text, ';')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("grid item '" + item + "' is not key=values");
    const std::string key = item.substr(0, eq);
    if (eq + 1 == item.size()) throw ConfigError("grid key '" + key + "' has no values");
    auto& values = g[key];
    for (const auto& tok : split(item.substr(eq + 1), ',')) {
      if (tok.empty()) throw ConfigError("grid key '" + key + "' has an empty value");
      const auto colon = tok.find(':');
      if (colon == std::string::npos) {
        values.push_back(tok);
        continue;
      }
      const long lo = parse_long(tok.substr(0, colon), key);
      const long hi = parse_long(tok.substr(colon + 1), key);
      if (hi < lo || hi - lo > 1'000'000) throw ConfigError("grid key '" + key + "': bad range " + tok);
      for (long v = lo; v <= hi; ++v) values.push_back(std::to_string(v));
    }
  }
  return g;
}

std::vector<long> grid_longs(const GridSpec& g, const std::string& key, std::vector<long> fallback) {
  const auto it = g.find(key);
  if (it == g.end()) return fallback;
  std::vector<long> out;
  for (const auto& s : it->second) out.push_back(parse_long(s, key));
  return out;
}

std::vector<Real> grid_reals(const GridSpec& g, const std::string& key, std::vector<Real> fallback) {
  const auto it = g.find(key);
  if (it == g.end()) return fallback;
  std::vector<Real> out;
  for (const auto& s : it->second) out.push_back(parse_real(s, key));
  return out;
}

std::vector<RatioCurvePoint> records_ratio_curve(const RecordsFiguresConfig& cfg) {
  for (long n : cfg.n_grid) {
    if (n < 3 || n > 100000) throw ConfigError("records n must lie in [3, 1e5], got " + std::to_string(n));
  }
  if (!(cfg.x > 0)) throw ConfigError("x must be positive");
  return parallel_map(cfg.n_grid.size(), [&](std::size_t i) {
    RatioCurvePoint pt;
    pt.n = cfg.n_grid[i];
    const MomentSummary m = records_params(pt.n);
    const Real sd = std::sqrt(m.sigma2);
    pt.lambda = m.mu;
    pt.sigma2 = m.sigma2;
    pt.v_n = m.mu + cfg.x * sd;
    pt.k = static_cast<long>(std::ceil(pt.v_n));
    PoissonBinomialOptions opts;
    opts.target_k = pt.k;
    const DistributionTable table = poisson_binomial_table(records_probabilities(pt.n), opts);
    const LogProb exact = table.log_tail(pt.k);
    pt.exact_lo = exact.prob();
    pt.exact_hi = pt.exact_lo + table.truncated_mass;
    if (exact.is_zero()) {
      pt.degenerate = true;
      pt.ratio_pn_lambda = pt.ratio_normal = pt.ratio_normal_corrected = pt.ratio_pn_sigma2 = kNaN;
      return pt;
    }
    if (table.truncated_mass > 1e-12L * pt.exact_lo) {
      throw AccuracyError("records n=" + std::to_string(pt.n) + ": truncated mass " +
                          csv::format_real(table.truncated_mass) + " exceeds 1e-12 of tail " +
                          csv::format_real(pt.exact_lo));
    }
    pt.ratio_pn_lambda = ratio_from_logs(exact, log_poisson_sf(m.mu, pt.k));
    pt.ratio_normal = ratio_from_logs(exact, log_normal_sf(m.mu, sd, pt.v_n));
    pt.ratio_normal_corrected =
        ratio_from_logs(exact, log_normal_sf(m.mu, sd, static_cast<Real>(pt.k) - 0.5L));
    pt.ratio_pn_sigma2 = ratio_from_logs(exact, log_poisson_sf(m.sigma2, pt.k));
    return pt;
  });
}

CommandOutput cmd_records_figures(const RecordsFiguresConfig& cfg) {
  const auto points = records_ratio_curve(cfg);
  std::ostringstream out;
  csv::Writer w(out);
  write_header(w, "records-figures", "n_grid=" + join_longs(cfg.n_grid) + ";x=" + csv::format_real(cfg.x),
               "n,k counts; lambda,sigma2,v_n in records; exact_tail_* probability; ratio_* "
               "dimensionless (exact tail over comparator tail); degenerate 0/1");
  w.columns({"n", "lambda", "sigma2", "v_n", "k", "exact_tail_lo", "exact_tail_hi", "ratio_pn_lambda",
             "ratio_normal", "ratio_normal_corrected", "ratio_pn_sigma2", "degenerate"});
  CommandOutput result;
  for (const auto& p : points) {
    w.row({csv::format_int(p.n), csv::format_real(p.lambda), csv::format_real(p.sigma2),
           csv::format_real(p.v_n), csv::format_int(p.k), csv::format_real(p.exact_lo),
           csv::format_real(p.exact_hi), csv::format_real(p.ratio_pn_lambda),
           csv::format_real(p.ratio_normal), csv::format_real(p.ratio_normal_corrected),
           csv::format_real(p.ratio_pn_sigma2), p.degenerate ? "1" : "0"});
    if (p.degenerate) {
      result.diagnostics.push_back("n=" + std::to_string(p.n) + ": P(S_n >= " + std::to_string(p.k) +
                                   ") = 0, ratios undefined");
    }
  }
  result.csv = out.str();
  return result;
}

std::vector<Figure5Row> figure5_rows(const Figure5Config& cfg) {
  if (!(cfg.lambda > 0)) throw ConfigError("lambda must be positive");
  if (static_cast<Real>(cfg.k_first) <= cfg.lambda || cfg.k_last < cfg.k_first) {
    throw ConfigError("k range must satisfy lambda < k_first <= k_last");
  }
  std::vector<Figure5Row> rows;
  for (long k = cfg.k_first; k <= cfg.k_last; ++k) {
    const SteinFactorSet f = stein_factors(cfg.lambda, k);
    rows.push_back({k, f.log_tail.value, f.c1, f.c2, f.naive, f.c1 / f.naive, f.c2 / f.naive});
  }
  return rows;
}

CommandOutput cmd_figure5(const Figure5Config& cfg) {
  const auto rows = figure5_rows(cfg);
  std::ostringstream out;
  csv::Writer w(out);
  write_header(w, "figure5",
               "lambda=" + csv::format_real(cfg.lambda) + ";k=" + std::to_string(cfg.k_first) + ":" +
                   std::to_string(cfg.k_last),
               "k count; log_tail natural log of P(Y>=k); c1,c2,naive factors; ratio1,ratio2 "
               "dimensionless");
  w.columns({"k", "log_tail", "c1", "c2", "naive", "ratio1", "ratio2"});
  CommandOutput result;
  for (const auto& r : rows) {
    w.row({csv::format_int(r.k), csv::format_real(r.log_tail), csv::format_real(r.c1),
           csv::format_real(r.c2), csv::format_real(r.naive), csv::format_real(r.ratio1),
           csv::format_real(r.ratio2)});
    if (!(r.ratio1 < 1)) {
      result.diagnostics.push_back("property ratio1_below_one failed at k=" + std::to_string(r.k));
    }
    if (!(r.ratio2 < 1)) {
      result.diagnostics.push_back("property ratio2_below_one failed at k=" + std::to_string(r.k));
    }
  }
  if (!result.diagnostics.empty()) result.exit_code = kExitValidation;
  result.csv = out.str();
  return result;
}

std::vector<Example2Row> example2_rows(const Example2Config& cfg) {
  if (!(cfg.p > 0 && cfg.p < 1)) throw ConfigError("p must lie in (0, 1)");
  if (!(cfg.x > 0)) throw ConfigError("x must be positive");
  for (long n : cfg.n_grid) {
    if (n < 1) throw ConfigError("n must be positive");
  }
  const Real lim = std::exp(log_normal_sf(0, 1, cfg.x).value -
                            log_normal_sf(0, 1, cfg.x * std::sqrt(1 - cfg.p)).value);
  return parallel_map(cfg.n_grid.size(), [&](std::size_t i) {
    Example2Row r;
    r.n = cfg.n_grid[i];
    const Real n = static_cast<Real>(r.n);
    const Real mean = n * cfg.p;
    const Real var = mean * (1 - cfg.p);
    r.k = static_cast<long>(std::ceil(mean + cfg.x * std::sqrt(var)));
    r.k_poisson_sd = static_cast<long>(std::ceil(mean + cfg.x * std::sqrt(mean)));
    r.k_shifted = static_cast<long>(std::ceil(var + cfg.x * std::sqrt(var)));
    PoissonBinomialOptions opts;
    opts.target_k = r.k;
    const std::vector<Real> p(static_cast<std::size_t>(r.n), cfg.p);
    const LogProb exact = poisson_binomial_table(p, opts).log_tail(r.k);
    r.exact_tail = exact.prob();
    r.ratio_same_k = ratio_from_logs(exact, log_poisson_sf(mean, r.k));
    r.ratio_poisson_sd = ratio_from_logs(exact, log_poisson_sf(mean, r.k_poisson_sd));
    r.ratio_shifted = ratio_from_logs(exact, log_poisson_sf(var, r.k_shifted));
    r.limit_same_k = lim;
    return r;
  });
}

CommandOutput cmd_example2(const Example2Config& cfg) {
  const auto rows = example2_rows(cfg);
  std::ostringstream out;
  csv::Writer w(out);
  write_header(w, "example2",
               "n_grid=" + join_longs(cfg.n_grid) + ";p=" + csv::format_real(cfg.p) +
                   ";x=" + csv::format_real(cfg.x),
               "n,k* counts; exact_tail probability; ratio_* dimensionless; limit_same_k is the "
               "normal-tail limit of ratio_same_k");
  w.columns({"n", "k", "exact_tail", "ratio_same_k", "k_poisson_sd", "ratio_poisson_sd", "k_shifted",
             "ratio_shifted", "limit_same_k"});
  for (const auto& r : rows) {
    w.row({csv::format_int(r.n), csv::format_int(r.k), csv::format_real(r.exact_tail),
           csv::format_real(r.ratio_same_k), csv::format_int(r.k_poisson_sd),
           csv::format_real(r.ratio_poisson_sd), csv::format_int(r.k_shifted),
           csv::format_real(r.ratio_shifted), csv::format_real(r.limit_same_k)});
  }
  CommandOutput result;
  result.csv = out.str();
  return result;
}

CommandOutput cmd_conjecture(const ConjectureConfig& cfg) {
  if (cfg.lambdas.empty() || cfg.k_max_offset < 1) throw ConfigError("need lambdas and k_max_offset >= 1");
  for (Real l : cfg.lambdas) {
    if (!(l > 0)) throw ConfigError("lambdas must be positive");
  }
  const auto rows = conjecture_scan(cfg.lambdas, cfg.k_max_offset);
  std::ostringstream out;
  csv::Writer w(out);
  write_header(w, "conjecture",
               "lambdas=" + join_reals(cfg.lambdas) + ";k_max_offset=" + std::to_string(cfg.k_max_offset),
               "k count; gap = c1_minus - c1_plus; log_gap natural log (nan when gap <= 0); flags 0/1");
  w.columns({"lambda", "k", "gap", "log_gap", "gap_non_positive", "log_gap_increasing"});
  CommandOutput result;
  long flagged = 0;
  long non_increasing = 0;
  for (const auto& r : rows) {
    w.row({csv::format_real(r.lambda), csv::format_int(r.k), csv::format_real(r.gap),
           csv::format_real(r.log_gap), r.flagged ? "1" : "0", r.log_gap_increasing ? "1" : "0"});
    flagged += r.flagged;
    non_increasing += !r.log_gap_increasing;
  }
  result.diagnostics.push_back(std::to_string(flagged) + " non-positive gaps, " +
                               std::to_string(non_increasing) + " non-increasing log-gap steps out of " +
                               std::to_string(rows.size()) + " rows");
  result.csv = out.str();
  return result;
}

CommandOutput cmd_stein_factors(const SteinFactorsConfig& cfg) {
  const SteinFactorSet f = stein_factors(cfg.lambda, cfg.k);
  const LemmaReport report = verify_lemma_properties(cfg.lambda, cfg.k);
  std::ostringstream out;
  csv::Writer w(out);
  write_header(w, "stein-factors",
               "lambda=" + csv::format_real(cfg.lambda) + ";k=" + std::to_string(cfg.k),
               "c* and naive are dimensionless factors; log_tail natural log of P(Y>=k); "
               "solution_checks_passed 0/1");
  w.columns({"lambda", "k", "c0", "c1_minus", "c1_plus", "c1", "c2", "naive", "log_tail",
             "solution_checks_passed"});
  w.row({csv::format_real(f.lambda), csv::format_int(f.k), csv::format_real(f.c0),
         csv::format_real(f.c1_minus), csv::format_real(f.c1_plus), csv::format_real(f.c1),
         csv::format_real(f.c2), csv::format_real(f.naive), csv::format_real(f.log_tail.value),
         report.all_passed() ? "1" : "0"});
  CommandOutput result;
  for (const auto& name : report.failures()) result.diagnostics.push_back("check failed: " + name);
  if (!report.all_passed()) result.exit_code = kExitValidation;
  result.csv = out.str();
  return result;
}

}  // namespace pmd
