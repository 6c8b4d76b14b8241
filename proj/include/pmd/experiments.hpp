#pragma once

// Figure data, validation sweeps and scans behind the command-line tool.
// Every command renders deterministic CSV text; nothing here touches files.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmd/special_functions.hpp"

namespace pmd {

inline constexpr const char* kToolVersion = "pmd 1.0.0";

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitConfig = 2, kExitAccuracy = 3 };

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when an exact tail cannot be bracketed tightly enough.
struct AccuracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommandOutput {
  std::string csv;
  int exit_code = kExitOk;
  std::vector<std::string> diagnostics;
};

/// "key=v1,v2;key2=a:b" with integer ranges a:b expanded. Throws ConfigError.
using GridSpec = std::map<std::string, std::vector<std::string>>;
GridSpec parse_grid(const std::string& text);
std::vector<long> grid_longs(const GridSpec& g, const std::string& key, std::vector<long> fallback);
std::vector<Real> grid_reals(const GridSpec& g, const std::string& key, std::vector<Real> fallback);

// ---- records ratio curves

struct RecordsFiguresConfig {
  std::vector<long> n_grid{3, 5, 10, 30, 100, 300, 1000, 3000, 10000, 30000, 100000};
  Real x = 3;
};

struct RatioCurvePoint {
  long n = 0;
  Real lambda = 0;
  Real sigma2 = 0;
  Real v_n = 0;
  long k = 0;
  Real exact_lo = 0;
  Real exact_hi = 0;
  Real ratio_pn_lambda = 0;
  Real ratio_normal = 0;
  Real ratio_normal_corrected = 0;
  Real ratio_pn_sigma2 = 0;
  bool degenerate = false;  // zero exact tail; ratios are NaN
};

/// Throws AccuracyError when truncated mass exceeds 1e-12 of the tail.
std::vector<RatioCurvePoint> records_ratio_curve(const RecordsFiguresConfig& cfg);
CommandOutput cmd_records_figures(const RecordsFiguresConfig& cfg);

// ---- Stein factor ratios against the naive factor

struct Figure5Config {
  Real lambda = 10;
  long k_first = 11;
  long k_last = 43;
};

struct Figure5Row {
  long k = 0;
  Real log_tail = 0;
  Real c1 = 0;
  Real c2 = 0;
  Real naive = 0;
  Real ratio1 = 0;
  Real ratio2 = 0;
};

std::vector<Figure5Row> figure5_rows(const Figure5Config& cfg);
CommandOutput cmd_figure5(const Figure5Config& cfg);

// ---- binomial adjusted ratios

struct Example2Config {
  std::vector<long> n_grid{10, 30, 100, 300, 1000, 3000, 10000};
  Real p = 0.3L;
  Real x = 2;
};

struct Example2Row {
  long n = 0;
  long k = 0;  // ceil(np + x sqrt(np(1-p)))
  Real exact_tail = 0;
  Real ratio_same_k = 0;
  long k_poisson_sd = 0;  // ceil(np + x sqrt(np))
  Real ratio_poisson_sd = 0;
  long k_shifted = 0;  // ceil(np(1-p) + x sqrt(np(1-p)))
  Real ratio_shifted = 0;
  Real limit_same_k = 0;
};

std::vector<Example2Row> example2_rows(const Example2Config& cfg);
CommandOutput cmd_example2(const Example2Config& cfg);

// ---- bound validation

struct ValidateConfig {
  std::string app;
  GridSpec grid;
  std::uint64_t seed = 20240601;
  long samples = 10'000'000;
};

struct ValidationRow {
  std::string app;
  std::string params;
  std::string bound;
  long a = 0;
  long k = 0;
  Real lambda = 0;
  std::string method;  // exact or monte_carlo
  Real tail = 0;       // exact value or estimate of P(W - a >= k)
  Real stderr_ = 0;
  Real ci_low = 0;
  Real ci_high = 0;
  Real poisson_tail = 0;
  Real ratio_minus_1 = 0;
  Real bound_lower = 0;  // -bound_total, or the bracket's lower end
  Real bound_upper = 0;
  Real slack = 0;
  bool pass = false;
  std::string flag;
};

std::vector<std::string> validate_apps();
std::vector<ValidationRow> validate_rows(const ValidateConfig& cfg);
CommandOutput cmd_validate(const ValidateConfig& cfg);

// ---- scans

struct ConjectureConfig {
  std::vector<Real> lambdas{1, 5, 10};
  long k_max_offset = 30;
};

CommandOutput cmd_conjecture(const ConjectureConfig& cfg);

struct SteinFactorsConfig {
  Real lambda = 1;
  long k = 2;
};

CommandOutput cmd_stein_factors(const SteinFactorsConfig& cfg);

}  // namespace pmd
