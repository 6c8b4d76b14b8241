#include "pmd/exact_oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "pmd/compensated_sum.hpp"

namespace pmd {

namespace {

constexpr Real kEps = std::numeric_limits<Real>::epsilon();

void check_probability(Real p, const char* what) {
  if (!(p > 0 && p < 1)) {
    throw DomainError(std::string(what) + " must lie in (0, 1), got " +
                      std::to_string(static_cast<double>(p)));
  }
}

void check_at_least(long v, long lo, const char* what) {
  if (v < lo) {
    throw DomainError(std::string(what) + " must be >= " + std::to_string(lo) + ", got " +
                      std::to_string(v));
  }
}

Real binomial(long n, long m) {
  if (m < 0 || m > n) return 0;
  m = std::min(m, n - m);
  Real c = 1;
  for (long i = 1; i <= m; ++i) c = c * static_cast<Real>(n - m + i) / static_cast<Real>(i);
  return c < 1e18L ? std::round(c) : c;
}

struct PbRun {
  std::vector<Real> pmf;
  Real truncated = 0;
};

// Convolution DP on the window 0..hi; mass pushed past hi is accumulated.
PbRun run_pb_dp(std::span<const Real> p, long hi) {
  PbRun run;
  run.pmf.assign(static_cast<std::size_t>(hi) + 1, 0.0L);
  auto& cur = run.pmf;
  cur[0] = 1;
  CompensatedSum lost;
  long top = 0;
  for (Real pi : p) {
    const Real qi = 1.0L - pi;
    if (top == hi) {
      lost.add(cur[hi] * pi);
    } else {
      ++top;
    }
    for (long j = top; j >= 1; --j) cur[j] = cur[j] * qi + cur[j - 1] * pi;
    cur[0] *= qi;
  }
  run.truncated = lost.value();
  return run;
}

}  // namespace

void validate_model(const AppModel& m) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, model::Records>) {
          check_at_least(v.n, 2, "records n");
        } else if constexpr (std::is_same_v<T, model::PoissonBinomial>) {
          for (Real p : v.p) check_probability(p, "Bernoulli probability");
        } else if constexpr (std::is_same_v<T, model::Matching>) {
          check_at_least(v.n, 1, "matching n");
        } else if constexpr (std::is_same_v<T, model::Occupancy>) {
          check_at_least(v.boxes, 2, "occupancy boxes");
          check_at_least(v.balls, 1, "occupancy balls");
        } else if constexpr (std::is_same_v<T, model::Birthday>) {
          check_at_least(v.boxes, 1, "birthday boxes");
          check_at_least(v.balls, 1, "birthday balls");
        } else if constexpr (std::is_same_v<T, model::Triangles>) {
          check_at_least(v.vertices, 1, "graph vertices");
          check_probability(v.p, "edge probability");
        } else {
          check_at_least(v.n, 3, "2-runs n");
          check_probability(v.p, "success probability");
        }
      },
      m);
}

std::string describe(const AppModel& m) {
  auto num = [](Real x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(x));
    return std::string(buf);
  };
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, model::Records>) {
          return "records(n=" + std::to_string(v.n) + ")";
        } else if constexpr (std::is_same_v<T, model::PoissonBinomial>) {
          return "poisson_binomial(n=" + std::to_string(v.p.size()) + ")";
        } else if constexpr (std::is_same_v<T, model::Matching>) {
          return "matching(n=" + std::to_string(v.n) + ")";
        } else if constexpr (std::is_same_v<T, model::Occupancy>) {
          return "occupancy(n=" + std::to_string(v.boxes) + ";l=" + std::to_string(v.balls) + ")";
        } else if constexpr (std::is_same_v<T, model::Birthday>) {
          return "birthday(n=" + std::to_string(v.boxes) + ";l=" + std::to_string(v.balls) + ")";
        } else if constexpr (std::is_same_v<T, model::Triangles>) {
          return "triangles(n=" + std::to_string(v.vertices) + ";p=" + num(v.p) + ")";
        } else {
          return "two_runs(n=" + std::to_string(v.n) + ";p=" + num(v.p) + ")";
        }
      },
      m);
}

DistributionTable poisson_binomial_table(std::span<const Real> p,
                                         const PoissonBinomialOptions& opts) {
  for (Real pi : p) check_probability(pi, "Bernoulli probability");
  const long n = static_cast<long>(p.size());
  const MomentSummary moments = poisson_binomial_params(p);
  const Real sd = std::sqrt(moments.sigma2);
  // Each DP step rounds an entry at most four times.
  const Real rounding = 4.0L * static_cast<Real>(n + 1) * kEps;

  Real width = opts.window_sd;
  for (;;) {
    const long hi = std::min<long>(n, static_cast<long>(std::ceil(moments.mu + width * sd + 10)));
    PbRun run = run_pb_dp(p, hi);
    DistributionTable table = table_from_pmf(0, run.pmf, run.truncated, rounding);
    if (!opts.target_k || hi == n || run.truncated == 0) return table;
    const Real target = table.tail(*opts.target_k);
    if (run.truncated <= opts.relative_residual * target) return table;
    width *= 2;
  }
}

MomentSummary poisson_binomial_params(std::span<const Real> p) {
  CompensatedSum mu;
  CompensatedSum var;
  CompensatedSum mu2;
  for (Real pi : p) {
    mu.add(pi);
    var.add(pi * (1.0L - pi));
    mu2.add(pi * pi);
  }
  return {mu.value(), var.value(), mu2.value()};
}

std::vector<Real> records_probabilities(long n) {
  check_at_least(n, 2, "records n");
  std::vector<Real> p;
  p.reserve(static_cast<std::size_t>(n - 1));
  for (long i = 2; i <= n; ++i) p.push_back(1.0L / static_cast<Real>(i));
  return p;
}

MomentSummary records_params(long n) {
  check_at_least(n, 2, "records n");
  CompensatedSum mu;
  CompensatedSum var;
  for (long i = 2; i <= n; ++i) {
    const Real q = 1.0L / static_cast<Real>(i);
    mu.add(q);
    var.add(q * (1.0L - q));
  }
  return {mu.value(), var.value(), std::nullopt};
}

DistributionTable matching_table(long n) {
  check_at_least(n, 1, "matching n");
  // P(W = k) = (1/k!) sum_{j=0}^{n-k} (-1)^j / j!
  std::vector<Real> alt(static_cast<std::size_t>(n) + 1);
  CompensatedSum partial;
  Real term = 1;
  for (long j = 0; j <= n; ++j) {
    if (j > 0) term /= static_cast<Real>(j);
    partial.add(j % 2 == 0 ? term : -term);
    alt[static_cast<std::size_t>(j)] = partial.value();
  }
  std::vector<Real> pmf(static_cast<std::size_t>(n) + 1);
  Real inv_fact = 1;
  for (long k = 0; k <= n; ++k) {
    if (k > 0) inv_fact /= static_cast<Real>(k);
    pmf[static_cast<std::size_t>(k)] = std::max<Real>(0, inv_fact * alt[static_cast<std::size_t>(n - k)]);
  }
  return table_from_pmf(0, pmf, 0, 4.0L * static_cast<Real>(n + 1) * kEps);
}

DistributionTable occupancy_table(long boxes, long balls) {
  check_at_least(boxes, 2, "occupancy boxes");
  check_at_least(balls, 1, "occupancy balls");
  using boost::multiprecision::cpp_int;
  using Big = boost::multiprecision::cpp_bin_float_50;
  const long n = boxes;
  const long l = balls;
  std::vector<Real> pmf(static_cast<std::size_t>(n), 0.0L);
  for (long m = 0; m < n; ++m) {
    const long occupied = n - m;
    if (occupied > l) continue;  // l balls cannot fill more than l boxes
    // P(W = m) = C(n,m) sum_j (-1)^j C(n-m, j) (1 - (m+j)/n)^l
    CompensatedSum sum;
    Real largest = 0;
    for (long j = 0; j <= occupied; ++j) {
      const Real term = binomial(occupied, j) *
                        std::pow(1.0L - static_cast<Real>(m + j) / static_cast<Real>(n),
                                 static_cast<Real>(l));
      largest = std::max(largest, term);
      sum.add(j % 2 == 0 ? term : -term);
    }
    const Real s = sum.value();
    if (s > 0 && largest / s <= 1e6L) {
      pmf[static_cast<std::size_t>(m)] = binomial(n, m) * s;
      continue;
    }
    // Cancellation: redo the alternating sum on integers and divide at 50 digits.
    cpp_int numer = 0;
    cpp_int choose = 1;
    for (long j = 0; j <= occupied; ++j) {
      if (j > 0) choose = choose * (occupied - j + 1) / j;
      cpp_int power = boost::multiprecision::pow(cpp_int(occupied - j), static_cast<unsigned>(l));
      numer += (j % 2 == 0 ? choose : cpp_int(-choose)) * power;
    }
    cpp_int outer = 1;
    for (long i = 1; i <= m; ++i) outer = outer * (n - m + i) / i;
    const cpp_int denom = boost::multiprecision::pow(cpp_int(n), static_cast<unsigned>(l));
    const Big value = Big(outer * numer) / Big(denom);
    pmf[static_cast<std::size_t>(m)] = value.convert_to<Real>();
  }
  return table_from_pmf(0, pmf, 0, 8.0L * static_cast<Real>(n + 1) * kEps * 1e6L);
}

MomentSummary occupancy_params(long boxes, long balls) {
  check_at_least(boxes, 2, "occupancy boxes");
  check_at_least(balls, 1, "occupancy balls");
  const Real n = static_cast<Real>(boxes);
  const Real l = static_cast<Real>(balls);
  const Real p = std::pow(1.0L - 1.0L / n, l);
  const Real mu = n * p;
  const Real sigma2 = mu - mu * mu + mu * (n - 1.0L) * std::pow(1.0L - 1.0L / (n - 1.0L), l);
  return {mu, sigma2, std::nullopt};
}

DistributionTable birthday_table_small(long boxes, long balls) {
  check_at_least(boxes, 1, "birthday boxes");
  check_at_least(balls, 1, "birthday balls");
  if (static_cast<Real>(balls) * std::log10(static_cast<Real>(boxes)) > 8.0L + 1e-12L) {
    throw SizeGuardError("birthday enumeration needs n^l <= 1e8; use monte_carlo_tail");
  }
  const long max_pairs = balls * (balls - 1) / 2;
  std::vector<std::uint64_t> hist(static_cast<std::size_t>(max_pairs) + 1, 0);
  std::vector<long> counts(static_cast<std::size_t>(boxes), 0);
  // Box labels are exchangeable, so ball 0 goes to box 0 and the count is scaled by n.
  counts[0] = 1;
  std::function<void(long, long)> place = [&](long ball, long pairs) {
    if (ball == balls) {
      ++hist[static_cast<std::size_t>(pairs)];
      return;
    }
    for (long b = 0; b < boxes; ++b) {
      auto& c = counts[static_cast<std::size_t>(b)];
      const long added = c;
      ++c;
      place(ball + 1, pairs + added);
      --c;
    }
  };
  place(1, 0);
  const Real total = std::pow(static_cast<Real>(boxes), static_cast<Real>(balls - 1));
  std::vector<Real> pmf(hist.size());
  for (std::size_t w = 0; w < hist.size(); ++w) pmf[w] = static_cast<Real>(hist[w]) / total;
  return table_from_pmf(0, pmf, 0, 2.0L * kEps);
}

Real birthday_mu(long boxes, long balls) {
  check_at_least(boxes, 1, "birthday boxes");
  check_at_least(balls, 1, "birthday balls");
  return static_cast<Real>(balls) * static_cast<Real>(balls - 1) / 2.0L /
         static_cast<Real>(boxes);
}

// The pair indicators are pairwise independent, so the variance is C(l,2) p (1-p).
MomentSummary birthday_params(long boxes, long balls) {
  const Real mu = birthday_mu(boxes, balls);
  return {mu, mu * (1.0L - 1.0L / static_cast<Real>(boxes)), std::nullopt};
}

DistributionTable triangles_table_small(long vertices, Real p) {
  check_at_least(vertices, 1, "graph vertices");
  check_probability(p, "edge probability");
  const long edges = vertices * (vertices - 1) / 2;
  if (edges > 24) {
    throw SizeGuardError("triangle enumeration needs C(n,2) <= 24; use monte_carlo_tail");
  }
  std::vector<std::vector<int>> edge_id(vertices, std::vector<int>(vertices, -1));
  int next = 0;
  for (long i = 0; i < vertices; ++i) {
    for (long j = i + 1; j < vertices; ++j) edge_id[i][j] = next++;
  }
  std::vector<std::uint32_t> triangle_masks;
  for (long a = 0; a < vertices; ++a) {
    for (long b = a + 1; b < vertices; ++b) {
      for (long c = b + 1; c < vertices; ++c) {
        triangle_masks.push_back((1u << edge_id[a][b]) | (1u << edge_id[a][c]) |
                                 (1u << edge_id[b][c]));
      }
    }
  }
  const std::size_t max_w = triangle_masks.size();
  // counts[e][w]: graphs with e edges and w triangles.
  std::vector<std::vector<std::uint64_t>> counts(edges + 1, std::vector<std::uint64_t>(max_w + 1));
  const std::uint32_t n_graphs = 1u << edges;
  for (std::uint32_t g = 0; g < n_graphs; ++g) {
    std::size_t w = 0;
    for (auto t : triangle_masks) w += (g & t) == t;
    ++counts[std::popcount(g)][w];
  }
  std::vector<Real> pmf(max_w + 1, 0.0L);
  for (long e = 0; e <= edges; ++e) {
    const Real weight = std::pow(p, static_cast<Real>(e)) *
                        std::pow(1.0L - p, static_cast<Real>(edges - e));
    for (std::size_t w = 0; w <= max_w; ++w) pmf[w] += static_cast<Real>(counts[e][w]) * weight;
  }
  return table_from_pmf(0, pmf, 0, 8.0L * static_cast<Real>(edges + 1) * kEps);
}

MomentSummary triangles_params(long vertices, Real p) {
  check_at_least(vertices, 1, "graph vertices");
  check_probability(p, "edge probability");
  const Real n = static_cast<Real>(vertices);
  const Real c3 = n * (n - 1) * (n - 2) / 6.0L;
  const Real p2 = p * p;
  const Real p3 = p2 * p;
  const Real mu = c3 * p3;
  return {mu, mu * (1.0L - p3 + 3.0L * (n - 3.0L) * (p2 - p3)), std::nullopt};
}

DistributionTable two_runs_table(long n, Real p) {
  check_at_least(n, 3, "2-runs n");
  check_probability(p, "success probability");
  const Real q = 1.0L - p;
  const std::size_t width = static_cast<std::size_t>(n) + 1;
  std::vector<Real> pmf(width, 0.0L);
  // Condition on xi_1, carry (current bit, run count), close the cycle with xi_n xi_1.
  for (int first = 0; first <= 1; ++first) {
    std::vector<std::vector<Real>> dp(2, std::vector<Real>(width, 0.0L));
    dp[first][0] = first ? p : q;
    for (long i = 2; i <= n; ++i) {
      std::vector<std::vector<Real>> nxt(2, std::vector<Real>(width, 0.0L));
      for (int b = 0; b <= 1; ++b) {
        for (long c = 0; c < i - 1; ++c) {
          const Real mass = dp[b][c];
          if (mass == 0) continue;
          nxt[0][c] += mass * q;
          nxt[1][c + b] += mass * p;
        }
      }
      dp = std::move(nxt);
    }
    for (int b = 0; b <= 1; ++b) {
      for (long c = 0; c < n; ++c) pmf[c + (b & first)] += dp[b][c];
    }
  }
  return table_from_pmf(0, pmf, 0, 4.0L * static_cast<Real>(n + 1) * kEps);
}

MomentSummary two_runs_params(long n, Real p) {
  check_at_least(n, 3, "2-runs n");
  check_probability(p, "success probability");
  const Real nn = static_cast<Real>(n);
  const Real mu = nn * p * p;
  return {mu, mu * (1.0L - p) * (3.0L * p + 1.0L), std::nullopt};
}

DistributionTable exact_table(const AppModel& m) {
  validate_model(m);
  return std::visit(
      [](const auto& v) -> DistributionTable {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, model::Records>) {
          return poisson_binomial_table(records_probabilities(v.n));
        } else if constexpr (std::is_same_v<T, model::PoissonBinomial>) {
          return poisson_binomial_table(v.p);
        } else if constexpr (std::is_same_v<T, model::Matching>) {
          return matching_table(v.n);
        } else if constexpr (std::is_same_v<T, model::Occupancy>) {
          return occupancy_table(v.boxes, v.balls);
        } else if constexpr (std::is_same_v<T, model::Birthday>) {
          return birthday_table_small(v.boxes, v.balls);
        } else if constexpr (std::is_same_v<T, model::Triangles>) {
          return triangles_table_small(v.vertices, v.p);
        } else {
          return two_runs_table(v.n, v.p);
        }
      },
      m);
}

}  // namespace pmd
