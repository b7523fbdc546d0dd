#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "run_config.hpp"
#include "dbdtc/report.hpp"

namespace {

using dbdtc::cli::RunConfig;

void add_population_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--synthetic", cfg.synthetic, "Uniform [0,1]^p population, e.g. N=1000,p=5");
  cmd->add_option("--input", cfg.input, "Population CSV with a header line");
  cmd->add_option("--aux", cfg.aux, "Auxiliary columns of --input")->delimiter(',');
  cmd->add_option("--targets", cfg.targets, "Target columns of --input (estimation studies)")->delimiter(',');
  cmd->add_option("--id", cfg.id_column, "Unit id column of --input");
  cmd->add_option("--stratum", cfg.stratum_column, "Stratum label column of --input");
  cmd->add_flag("--standardize", cfg.standardize, "Center and scale aux columns to unit variance");
}

void add_anneal_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--iters", cfg.iterations, "Annealing iterations R");
  cmd->add_option("--init", cfg.init, "Initialization: cyclic or lpm");
  cmd->add_option("--T0", cfg.T0, "Initial temperature (default: median |dE| / ln 2 over probe moves)");
  cmd->add_option("--alpha", cfg.alpha, "Cooling rate (default: (1e-8)^(1/R))");
  cmd->add_flag("--metropolis", cfg.metropolis, "Standard Metropolis acceptance instead of the best-state rule");
  cmd->add_option("--workers", cfg.workers, "Column pairs per parallel sweep (1 = sequential)");
  cmd->add_flag("--compress", cfg.compress, "Pre-select N* = M* n units with LPM");
  cmd->add_option("--M-star", cfg.M_star, "Number of columns after compression (implies --compress)");
  cmd->add_option("--compress-ratio", cfg.compress_ratio, "Scale the default M* = floor(N/n), in (0, 1]");
  cmd->add_option("--compress-ceiling", cfg.compress_ceiling, "Compress automatically when minimum M exceeds this");
}

void add_evaluation_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--reps", cfg.reps, "Monte Carlo replicates for srs, systematic and lpm");
  cmd->add_option("--level", cfg.level, "Nominal confidence level for coverage");
  cmd->add_option("--neighbors", cfg.neighbors, "Group size k of the local-mean variance estimator");
  cmd->add_option("--order-key", cfg.order_key, "Aux column (0-based) ordering systematic sampling");
  cmd->add_flag("--estimate-aux", cfg.estimate_aux, "Also report estimators for the aux columns");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Distributionally balanced sampling designs from minimum tactical configurations"};
  app.set_version_flag("--version", "dbdtc format " + std::to_string(dbdtc::kFormatVersion));
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--seed", cfg.seed, "Master seed; every random stream derives from it");
  app.add_option("--threads", cfg.threads, "Threads for replicates and parallel sweeps");
  app.add_option("--out", cfg.out, "Output directory");
  app.add_flag("-q,--quiet", cfg.quiet, "No progress messages on stderr");

  auto* generate = app.add_subcommand("generate", "Write a population CSV (synthetic or standardized input)");
  add_population_options(generate, cfg);

  auto* optimize = app.add_subcommand("optimize", "Build and anneal a DBD-TC design");
  add_population_options(optimize, cfg);
  optimize->add_option("--n", cfg.n, "Sample size");
  optimize->add_option("--strata", cfg.strata, "Per-stratum sample sizes, e.g. north=5,south=8");
  add_anneal_options(optimize, cfg);

  auto* draw = app.add_subcommand("draw", "Draw samples from a configuration or design.json");
  draw->add_option("file", cfg.design_file, "Configuration file or design.json written by optimize")->required();
  draw->add_option("--count", cfg.count, "Number of samples (separated by blank lines)");

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate designs on one population");
  add_population_options(evaluate, cfg);
  evaluate->add_option("--n", cfg.n, "Sample size");
  evaluate->add_option("--design,--designs", cfg.designs, "srs, systematic, lpm, circular, dbdtc")->delimiter(',');
  evaluate->add_option("--config", cfg.design_file, "Evaluate a stored dbdtc configuration or design.json");
  add_anneal_options(evaluate, cfg);
  add_evaluation_options(evaluate, cfg);

  auto* benchmark = app.add_subcommand("benchmark", "Sweep designs over dimensions and sample sizes");
  add_population_options(benchmark, cfg);
  benchmark->add_option("--N", cfg.N, "Synthetic population size");
  benchmark->add_option("--p", cfg.p_list, "Dimensions of the synthetic populations")->delimiter(',');
  benchmark->add_option("--n", cfg.n_list, "Sample sizes")->delimiter(',');
  benchmark->add_option("--designs,--design", cfg.designs, "srs, systematic, lpm, circular, dbdtc")->delimiter(',');
  add_anneal_options(benchmark, cfg);
  add_evaluation_options(benchmark, cfg);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) cfg.subcommand = "generate";
    if (*optimize) cfg.subcommand = "optimize";
    if (*draw) cfg.subcommand = "draw";
    if (*evaluate) {
      cfg.subcommand = "evaluate";
      if (cfg.designs.empty()) cfg.designs = {"dbdtc"};
    }
    if (*benchmark) {
      cfg.subcommand = "benchmark";
      if (cfg.designs.empty()) cfg.designs = dbdtc::cli::kDesignNames;
      if (cfg.p_list.empty() && cfg.input.empty()) cfg.p_list = {2, 5, 10, 20};
      if (cfg.n_list.empty()) cfg.n_list = {50};
    }
    dbdtc::cli::validate(cfg);
    if (cfg.subcommand == "generate") return dbdtc::cli::cmd_generate(cfg);
    if (cfg.subcommand == "optimize") return dbdtc::cli::cmd_optimize(cfg);
    if (cfg.subcommand == "draw") return dbdtc::cli::cmd_draw(cfg);
    if (cfg.subcommand == "evaluate") return dbdtc::cli::cmd_evaluate(cfg);
    return dbdtc::cli::cmd_benchmark(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "dbdtc: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "dbdtc: error: " << e.what() << '\n';
    return 1;
  }
}
