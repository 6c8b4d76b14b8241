#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "pmd/exact_oracles.hpp"
#include "pmd/experiments.hpp"
#include "pmd/stein_factors.hpp"

namespace {

// A bare list "3,5,10" is shorthand for "n=3,5,10".
std::vector<long> n_grid_from(const std::string& text, std::vector<long> fallback) {
  if (text.empty()) return fallback;
  const auto spec = pmd::parse_grid(text.find('=') == std::string::npos ? "n=" + text : text);
  return pmd::grid_longs(spec, "n", fallback);
}

int emit(const pmd::CommandOutput& out, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << out.csv;
  } else {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
      std::cerr << "cannot open " << path << " for writing\n";
      return pmd::kExitConfig;
    }
    f << out.csv;
  }
  for (const auto& d : out.diagnostics) std::cerr << d << "\n";
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stein factors, moderate-deviation bounds and their validation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pmd::kToolVersion);

  std::string out_path;
  std::uint64_t seed = 20240601;
  long samples = 10'000'000;
  std::string grid;
  app.add_option("--out", out_path, "Output CSV path (stdout when omitted)");
  app.add_option("--seed", seed, "Seed for random instances and Monte Carlo");
  app.add_option("--samples", samples, "Monte Carlo sample count")->check(CLI::Range(10000L, 1L << 40));
  app.add_option("--grid", grid, "Grid spec: 'key=a:b;key=v1,v2' or a comma list of n");

  pmd::RecordsFiguresConfig records_cfg;
  auto* records = app.add_subcommand("records-figures", "Exact record-count tails against four comparators");
  records->add_option("--x", records_cfg.x, "Standard deviations above the mean")->capture_default_str();

  pmd::Figure5Config f5;
  auto* figure5 = app.add_subcommand("figure5", "Stein factors relative to the naive factor");
  figure5->add_option("--lambda", f5.lambda)->capture_default_str();
  figure5->add_option("--k-first", f5.k_first)->capture_default_str();
  figure5->add_option("--k-last", f5.k_last)->capture_default_str();

  pmd::Example2Config ex2;
  auto* example2 = app.add_subcommand("example2", "Binomial tails against plain and adjusted Poisson tails");
  example2->add_option("--p", ex2.p)->capture_default_str();
  example2->add_option("--x", ex2.x)->capture_default_str();

  pmd::ValidateConfig val;
  auto* validate = app.add_subcommand("validate", "Check every bound of one application against exact or sampled tails");
  validate->add_option("app", val.app, "Application")
      ->required()
      ->check(CLI::IsMember(pmd::validate_apps()));

  pmd::ConjectureConfig conj;
  auto* conjecture = app.add_subcommand("conjecture", "Scan c1_minus - c1_plus over k");
  conjecture->add_option("--lambdas", conj.lambdas)->delimiter(',');
  conjecture->add_option("--k-max-offset", conj.k_max_offset)->capture_default_str();

  pmd::SteinFactorsConfig sf;
  auto* stein = app.add_subcommand("stein-factors", "Stein factors at one (lambda, k)");
  stein->add_option("lambda", sf.lambda)->required();
  stein->add_option("k", sf.k)->required();

  for (auto* sub : {records, figure5, example2, validate, conjecture, stein}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pmd::kExitConfig;
  }

  try {
    if (*records) {
      records_cfg.n_grid = n_grid_from(grid, records_cfg.n_grid);
      return emit(pmd::cmd_records_figures(records_cfg), out_path);
    }
    if (*figure5) return emit(pmd::cmd_figure5(f5), out_path);
    if (*example2) {
      ex2.n_grid = n_grid_from(grid, ex2.n_grid);
      return emit(pmd::cmd_example2(ex2), out_path);
    }
    if (*validate) {
      val.grid = pmd::parse_grid(grid);
      val.seed = seed;
      val.samples = samples;
      return emit(pmd::cmd_validate(val), out_path);
    }
    if (*conjecture) return emit(pmd::cmd_conjecture(conj), out_path);
    if (*stein) return emit(pmd::cmd_stein_factors(sf), out_path);
  } catch (const pmd::AccuracyError& e) {
    std::cerr << "accuracy error: " << e.what() << "\n";
    return pmd::kExitAccuracy;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return pmd::kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return pmd::kExitConfig;
  } catch (const std::length_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return pmd::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pmd::kExitValidation;
  }
  return pmd::kExitOk;
}
