#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace dbdtc::cli {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

bool known_design(const std::string& name) {
  return std::find(kDesignNames.begin(), kDesignNames.end(), name) != kDesignNames.end();
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::map<std::string, std::uint64_t> parse_assignments(const std::string& text, const std::string& what) {
  std::map<std::string, std::uint64_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    const std::string item = trim(text.substr(pos, end - pos));
    const auto eq = item.find('=');
    require(eq != std::string::npos && eq > 0, what + ": expected key=value, got '" + item + "'");
    const std::string key = trim(item.substr(0, eq));
    const std::string value = trim(item.substr(eq + 1));
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    require(ec == std::errc() && ptr == value.data() + value.size() && !value.empty(),
            what + ": '" + value + "' is not a non-negative integer");
    require(out.emplace(key, v).second, what + ": '" + key + "' given twice");
    pos = end + 1;
  }
  return out;
}

void validate(const RunConfig& cfg) {
  const std::string& cmd = cfg.subcommand;
  require(cfg.threads >= 1, "--threads must be at least 1");
  require(cfg.workers >= 1, "--workers must be at least 1");

  const bool needs_population = cmd == "generate" || cmd == "optimize" || cmd == "evaluate";
  const bool has_synthetic = !cfg.synthetic.empty();
  const bool has_input = !cfg.input.empty();
  require(!(has_synthetic && has_input), "--synthetic and --input are mutually exclusive");
  if (needs_population) require(has_synthetic || has_input, cmd + " needs --synthetic or --input");
  if (cmd == "benchmark") require(!has_synthetic, "benchmark builds its own populations; use --N and --p");
  if (has_input) require(!cfg.aux.empty(), "--input needs --aux with at least one column");
  if (has_synthetic) {
    const auto kv = parse_assignments(cfg.synthetic, "--synthetic");
    for (const auto& [key, value] : kv) {
      require(key == "N" || key == "p", "--synthetic: unknown key '" + key + "' (expected N and p)");
      require(value >= 1, "--synthetic: " + key + " must be at least 1");
    }
    require(kv.count("N") && kv.count("p"), "--synthetic needs both N and p");
    require(cfg.targets.empty() && cfg.stratum_column.empty(), "synthetic populations have no targets or strata");
  }

  if (cmd == "optimize") {
    require(cfg.init == "cyclic" || cfg.init == "lpm", "--init must be 'cyclic' or 'lpm'");
    if (cfg.strata.empty()) require(cfg.n >= 1, "optimize needs --n >= 1");
    if (!cfg.strata.empty()) {
      require(!cfg.stratum_column.empty(), "--strata needs --stratum naming the label column");
      require(cfg.n == 0, "give per-stratum sizes in --strata instead of --n");
      strata_sizes(cfg);
    }
  }
  if (cfg.T0) require(*cfg.T0 > 0.0, "--T0 must be positive");
  if (cfg.alpha) require(*cfg.alpha > 0.0 && *cfg.alpha <= 1.0, "--alpha must lie in (0, 1]");
  require(cfg.compress_ratio > 0.0 && cfg.compress_ratio <= 1.0, "--compress-ratio must lie in (0, 1]");
  if (cfg.M_star) require(*cfg.M_star >= 1, "--M-star must be at least 1");

  if (cmd == "evaluate" || cmd == "benchmark") {
    require(!cfg.designs.empty(), cmd + " needs at least one design");
    for (const auto& d : cfg.designs) {
      require(known_design(d), "unknown design '" + d + "' (expected srs, systematic, lpm, circular or dbdtc)");
    }
    require(cfg.reps >= 1, "--reps must be at least 1");
    require(cfg.level > 0.0 && cfg.level < 1.0, "--level must lie in (0, 1)");
    require(cfg.neighbors >= 2, "--neighbors must be at least 2");
    require(cfg.init == "cyclic" || cfg.init == "lpm", "--init must be 'cyclic' or 'lpm'");
  }
  if (cmd == "evaluate") {
    require(cfg.n >= 1 || !cfg.design_file.empty(), "evaluate needs --n (or --config for dbdtc)");
    if (!cfg.design_file.empty()) {
      require(cfg.designs.size() == 1 && cfg.designs[0] == "dbdtc", "--config only applies to --design dbdtc");
    }
  }
  if (cmd == "benchmark") {
    require(!cfg.n_list.empty(), "benchmark needs --n");
    for (std::size_t n : cfg.n_list) require(n >= 1, "--n entries must be at least 1");
    if (!has_input) {
      require(!cfg.p_list.empty(), "benchmark needs --p");
      for (std::size_t p : cfg.p_list) require(p >= 1, "--p entries must be at least 1");
      require(cfg.N >= 1, "--N must be at least 1");
    }
  }
  if (cmd == "draw") {
    require(!cfg.design_file.empty(), "draw needs a configuration or design file");
    require(cfg.count >= 1, "--count must be at least 1");
  }
}

nlohmann::json to_json(const RunConfig& cfg) {
  using nlohmann::json;
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  json j{{"subcommand", cfg.subcommand},
         {"seed", cfg.seed},
         {"threads", cfg.threads},
         {"out", cfg.out.generic_string()}};
  const std::string& cmd = cfg.subcommand;
  if (cmd != "draw") {
    j["population"] = {{"synthetic", cfg.synthetic},   {"input", cfg.input.generic_string()},
                       {"aux", cfg.aux},               {"targets", cfg.targets},
                       {"id", cfg.id_column},          {"stratum", cfg.stratum_column},
                       {"standardize", cfg.standardize}};
  }
  if (cmd == "optimize" || cmd == "evaluate" || cmd == "benchmark") {
    j["design"] = {{"n", cfg.n},
                   {"iterations", cfg.iterations},
                   {"init", cfg.init},
                   {"T0", opt(cfg.T0)},
                   {"alpha", opt(cfg.alpha)},
                   {"metropolis", cfg.metropolis},
                   {"workers", cfg.workers},
                   {"compress", cfg.compress},
                   {"M_star", opt(cfg.M_star)},
                   {"compress_ratio", cfg.compress_ratio},
                   {"compress_ceiling", cfg.compress_ceiling},
                   {"strata", cfg.strata}};
  }
  if (cmd == "evaluate" || cmd == "benchmark") {
    j["evaluation"] = {{"designs", cfg.designs},     {"reps", cfg.reps},
                       {"level", cfg.level},         {"neighbors", cfg.neighbors},
                       {"order_key", cfg.order_key}, {"estimate_aux", cfg.estimate_aux},
                       {"config", cfg.design_file.generic_string()}};
  }
  if (cmd == "benchmark") j["sweep"] = {{"N", cfg.N}, {"p", cfg.p_list}, {"n", cfg.n_list}};
  if (cmd == "draw") j["draw"] = {{"file", cfg.design_file.generic_string()}, {"count", cfg.count}};
  return j;
}

Population load_population(const RunConfig& cfg, std::vector<std::string>& warnings) {
  std::optional<Population> pop;
  if (!cfg.synthetic.empty()) {
    const auto kv = parse_assignments(cfg.synthetic, "--synthetic");
    pop = synth_uniform(kv.at("N"), kv.at("p"), cfg.seed);
  } else {
    CsvOptions options;
    options.aux_columns = cfg.aux;
    options.target_columns = cfg.targets;
    if (!cfg.id_column.empty()) options.id_column = cfg.id_column;
    if (!cfg.stratum_column.empty()) options.stratum_column = cfg.stratum_column;
    LoadResult loaded = load_csv(cfg.input, options);
    if (loaded.dropped_rows > 0) {
      warnings.push_back("dropped " + std::to_string(loaded.dropped_rows) + " rows with missing values");
    }
    pop = std::move(loaded.population);
  }
  if (cfg.standardize) return standardize(*pop, &warnings);
  return std::move(*pop);
}

PipelineOptions pipeline_options(const RunConfig& cfg) {
  PipelineOptions o;
  o.n = cfg.n;
  o.init = cfg.init == "cyclic" ? InitMethod::cyclic : InitMethod::lpm;
  o.iterations = cfg.iterations;
  o.initial_temperature = cfg.T0;
  o.cooling_rate = cfg.alpha;
  o.metropolis = cfg.metropolis;
  o.workers = cfg.workers;
  o.threads = cfg.threads;
  o.compress = cfg.compress;
  o.M_star = cfg.M_star;
  o.compress_ratio = cfg.compress_ratio;
  o.compress_ceiling = cfg.compress_ceiling;
  return o;
}

std::map<std::string, std::size_t> strata_sizes(const RunConfig& cfg) {
  std::map<std::string, std::size_t> out;
  for (const auto& [label, n] : parse_assignments(cfg.strata, "--strata")) {
    require(n >= 1, "--strata: stratum '" + label + "' needs a sample size of at least 1");
    out[label] = static_cast<std::size_t>(n);
  }
  return out;
}

}  // namespace dbdtc::cli
