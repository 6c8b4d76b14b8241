#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <thread>

#include "pmd/exact_oracles.hpp"

namespace pmd {

namespace {

__extension__ using Wide = unsigned __int128;

constexpr long kBlock = 1L << 16;
constexpr Real kZ95 = 1.959964L;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// splitmix64: output i of a stream is mix64(base + i * golden).
class Stream {
 public:
  explicit Stream(std::uint64_t base) : state_(base) {}
  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }
  // Uniform on 0..range-1 by multiply-high; the bias is below range / 2^64.
  std::uint64_t below(std::uint64_t range) {
    return static_cast<std::uint64_t>((static_cast<Wide>(next()) * range) >> 64);
  }
  bool bernoulli(std::uint64_t threshold) { return next() < threshold; }

 private:
  std::uint64_t state_;
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t threshold_of(Real p) {
  return static_cast<std::uint64_t>(std::ldexp(p, 64));
}

// Per-model sampling state shared read-only across workers.
class Sampler {
 public:
  explicit Sampler(const AppModel& m) : model_(m) {
    std::visit(
        [this](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, model::Records>) {
            for (Real p : records_probabilities(v.n)) thresholds_.push_back(threshold_of(p));
          } else if constexpr (std::is_same_v<T, model::PoissonBinomial>) {
            for (Real p : v.p) thresholds_.push_back(threshold_of(p));
          } else if constexpr (std::is_same_v<T, model::Triangles>) {
            if (v.vertices > 64) throw DomainError("triangle sampling supports at most 64 vertices");
            thresholds_.push_back(threshold_of(v.p));
          } else if constexpr (std::is_same_v<T, model::TwoRuns>) {
            thresholds_.push_back(threshold_of(v.p));
          }
        },
        model_);
  }

  long draw(Stream& s, std::vector<long>& scratch) const {
    return std::visit(
        [&](const auto& v) -> long {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, model::Records> ||
                        std::is_same_v<T, model::PoissonBinomial>) {
            long w = 0;
            for (auto t : thresholds_) w += s.bernoulli(t);
            return w;
          } else if constexpr (std::is_same_v<T, model::Matching>) {
            scratch.resize(static_cast<std::size_t>(v.n));
            for (long i = 0; i < v.n; ++i) scratch[i] = i;
            long fixed = 0;
            for (long i = v.n - 1; i >= 0; --i) {
              const auto j = static_cast<long>(s.below(static_cast<std::uint64_t>(i) + 1));
              std::swap(scratch[i], scratch[j]);
              fixed += scratch[i] == i;
            }
            return fixed;
          } else if constexpr (std::is_same_v<T, model::Occupancy>) {
            scratch.assign(static_cast<std::size_t>(v.boxes), 0);
            for (long b = 0; b < v.balls; ++b) ++scratch[s.below(v.boxes)];
            return static_cast<long>(std::count(scratch.begin(), scratch.end(), 0L));
          } else if constexpr (std::is_same_v<T, model::Birthday>) {
            scratch.assign(static_cast<std::size_t>(v.boxes), 0);
            long pairs = 0;
            for (long b = 0; b < v.balls; ++b) pairs += scratch[s.below(v.boxes)]++;
            return pairs;
          } else if constexpr (std::is_same_v<T, model::Triangles>) {
            std::uint64_t adj[64] = {};
            const auto t = thresholds_[0];
            for (long i = 0; i < v.vertices; ++i) {
              for (long j = i + 1; j < v.vertices; ++j) {
                if (s.bernoulli(t)) {
                  adj[i] |= 1ULL << j;
                  adj[j] |= 1ULL << i;
                }
              }
            }
            long w = 0;
            for (long i = 0; i < v.vertices; ++i) {
              std::uint64_t later = adj[i] & ~((2ULL << i) - 1);
              while (later) {
                const int j = std::countr_zero(later);
                later &= later - 1;
                const std::uint64_t above = j >= 63 ? 0 : ~((2ULL << j) - 1);
                w += std::popcount(adj[i] & adj[j] & above);
              }
            }
            return w;
          } else {
            const auto t = thresholds_[0];
            const bool first = s.bernoulli(t);
            bool prev = first;
            long w = 0;
            for (long i = 1; i < v.n; ++i) {
              const bool cur = s.bernoulli(t);
              w += prev && cur;
              prev = cur;
            }
            return w + (prev && first);
          }
        },
        model_);
  }

 private:
  const AppModel& model_;
  std::vector<std::uint64_t> thresholds_;
};

void add_count(std::vector<long>& counts, long w) {
  if (static_cast<std::size_t>(w) >= counts.size()) counts.resize(static_cast<std::size_t>(w) + 1, 0);
  ++counts[static_cast<std::size_t>(w)];
}

}  // namespace

MonteCarloHistogram monte_carlo_histogram(const AppModel& m, long n_samples, std::uint64_t seed,
                                          unsigned workers) {
  if (n_samples < 10000) throw PreconditionError("Monte Carlo needs at least 1e4 samples");
  validate_model(m);
  const Sampler sampler(m);
  const std::uint64_t key = mix64(seed ^ mix64(fnv1a(describe(m))));
  const long n_blocks = (n_samples + kBlock - 1) / kBlock;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<long>(workers, n_blocks));

  std::vector<std::vector<long>> partial(workers);
  auto run = [&](unsigned id) {
    std::vector<long> scratch;
    for (long b = id; b < n_blocks; b += workers) {
      Stream s(mix64(key + static_cast<std::uint64_t>(b) * 0xD1B54A32D192ED03ULL));
      const long size = std::min(kBlock, n_samples - b * kBlock);
      for (long i = 0; i < size; ++i) add_count(partial[id], sampler.draw(s, scratch));
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned id = 0; id < workers; ++id) pool.emplace_back(run, id);
  }

  MonteCarloHistogram h;
  h.n_samples = n_samples;
  h.seed = seed;
  for (const auto& part : partial) {
    if (part.size() > h.counts.size()) h.counts.resize(part.size(), 0);
    for (std::size_t w = 0; w < part.size(); ++w) h.counts[w] += part[w];
  }
  return h;
}

MonteCarloEstimate tail_estimate(const MonteCarloHistogram& h, long threshold) {
  long hits = 0;
  for (std::size_t w = 0; w < h.counts.size(); ++w) {
    if (static_cast<long>(w) >= threshold) hits += h.counts[w];
  }
  MonteCarloEstimate e;
  e.n_samples = h.n_samples;
  e.seed = h.seed;
  const Real n = static_cast<Real>(h.n_samples);
  e.p_hat = static_cast<Real>(hits) / n;
  e.stderr_ = std::sqrt(e.p_hat * (1.0L - e.p_hat) / n);
  e.ci95_low = std::clamp(e.p_hat - kZ95 * e.stderr_, 0.0L, 1.0L);
  e.ci95_high = std::clamp(e.p_hat + kZ95 * e.stderr_, 0.0L, 1.0L);
  return e;
}

MonteCarloEstimate monte_carlo_tail(const AppModel& m, long a, long k, long n_samples,
                                    std::uint64_t seed) {
  return tail_estimate(monte_carlo_histogram(m, n_samples, seed), a + k);
}

}  // namespace pmd
