#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbdtc/population.hpp"
#include "dbdtc/scale.hpp"

namespace dbdtc::cli {

// Everything a subcommand needs. Parsed by CLI11, checked by validate() and
// written into every output so a run can be repeated from its files alone.
struct RunConfig {
  std::string subcommand;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::filesystem::path out = ".";
  bool quiet = false;

  // population
  std::string synthetic;  // "N=1000,p=5"
  std::filesystem::path input;
  std::vector<std::string> aux;
  std::vector<std::string> targets;
  std::string id_column;
  std::string stratum_column;
  bool standardize = false;

  // design construction
  std::size_t n = 0;
  std::uint64_t iterations = 1'000'000;
  std::string init = "lpm";
  std::optional<double> T0;
  std::optional<double> alpha;
  bool metropolis = false;
  std::size_t workers = 1;
  bool compress = false;
  std::optional<std::uint64_t> M_star;
  double compress_ratio = 1.0;
  std::uint64_t compress_ceiling = 100'000;
  std::string strata;  // "A=3,B=5"

  // evaluation and benchmarks
  std::vector<std::string> designs;
  std::size_t reps = 10'000;
  double level = 0.95;
  std::size_t neighbors = 2;
  std::size_t order_key = 0;
  bool estimate_aux = false;
  std::size_t N = 1000;
  std::vector<std::size_t> p_list;
  std::vector<std::size_t> n_list;

  // draw / evaluate inputs
  std::filesystem::path design_file;
  std::size_t count = 1;
};

inline const std::vector<std::string> kDesignNames = {"srs", "systematic", "lpm", "circular", "dbdtc"};

// Throws std::invalid_argument on inconsistent or out-of-range settings.
void validate(const RunConfig& cfg);

nlohmann::json to_json(const RunConfig& cfg);

// "N=1000,p=5" -> {N: 1000, p: 5}.
std::map<std::string, std::uint64_t> parse_assignments(const std::string& text, const std::string& what);

Population load_population(const RunConfig& cfg, std::vector<std::string>& warnings);

PipelineOptions pipeline_options(const RunConfig& cfg);

std::map<std::string, std::size_t> strata_sizes(const RunConfig& cfg);

}  // namespace dbdtc::cli
