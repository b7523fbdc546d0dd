#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "dbdtc/circular.hpp"
#include "dbdtc/geometry.hpp"
#include "dbdtc/metrics.hpp"
#include "dbdtc/report.hpp"
#include "dbdtc/samplers.hpp"
#include "dbdtc/scale.hpp"
#include "dbdtc/tactical.hpp"

namespace dbdtc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Log {
 public:
  explicit Log(const RunConfig& cfg) : quiet_(cfg.quiet), start_(std::chrono::steady_clock::now()) {}

  void operator()(const std::string& message) const {
    if (quiet_) return;
    std::cerr << "[" << std::fixed << std::setprecision(1) << elapsed() << "s] " << message << '\n';
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool quiet_;
  std::chrono::steady_clock::time_point start_;
};

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  return out;
}

void write_json(const fs::path& dir, const std::string& name, const json& j) {
  auto out = open_output(dir, name);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + (dir / name).string());
}

// Report CSVs start with '#' lines carrying the run configuration, so a file
// found on its own still says how it was made.
void write_preamble(std::ostream& out, const json& run) {
  out << "# format_version: " << kFormatVersion << '\n';
  out << "# seed: " << run.at("seed").get<std::uint64_t>() << '\n';
  out << "# run_config: " << run.dump() << '\n';
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
  if (threads == 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t k = t; k < count; k += threads) fn(k);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

DesignSupport support_of(std::vector<Sample> columns) {
  DesignSupport s;
  s.M = columns.size();
  std::sort(columns.begin(), columns.end());
  for (auto& col : columns) {
    if (!s.samples.empty() && s.samples.back() == col) {
      ++s.multiplicity.back();
    } else {
      s.samples.push_back(std::move(col));
      s.multiplicity.push_back(1);
    }
  }
  return s;
}

std::string file_label(const std::string& label) {
  std::string out;
  for (char ch : label) {
    const bool plain = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                       ch == '-' || ch == '_';
    out += plain ? ch : '_';
  }
  return out;
}

TacticalConfiguration read_configuration_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open configuration file " + path.string());
  try {
    return read_configuration(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

// A drawable design: one part per stratum, each a configuration whose unit
// k is the population unit with id ids[k].
struct DesignPart {
  std::string label;
  TacticalConfiguration configuration;
  std::vector<std::string> ids;
  std::size_t stratum_size = 0;
};

std::vector<DesignPart> read_design(const fs::path& path) {
  if (path.extension() != ".json") {
    TacticalConfiguration D = read_configuration_file(path);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < D.population_size(); ++i) ids.push_back(std::to_string(i + 1));
    const std::size_t N = D.population_size();
    std::vector<DesignPart> parts;
    parts.push_back({"", std::move(D), std::move(ids), N});
    return parts;
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open design file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  std::vector<DesignPart> parts;
  try {
    for (const auto& p : j.at("parts")) {
      TacticalConfiguration D = read_configuration_file(path.parent_path() / p.at("configuration").get<std::string>());
      auto ids = p.at("ids").get<std::vector<std::string>>();
      if (ids.size() != D.population_size()) {
        throw std::runtime_error("part '" + p.at("label").get<std::string>() + "' lists " +
                                 std::to_string(ids.size()) + " ids for a configuration over " +
                                 std::to_string(D.population_size()) + " units");
      }
      parts.push_back({p.at("label").get<std::string>(), std::move(D), std::move(ids),
                       p.at("stratum_size").get<std::size_t>()});
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": malformed design file: " + e.what());
  }
  if (parts.empty()) throw std::runtime_error(path.string() + ": design has no parts");
  return parts;
}

std::vector<TargetVariable> targets_for(const RunConfig& cfg, const Population& pop) {
  std::vector<TargetVariable> t = population_targets(pop);
  if (cfg.estimate_aux) {
    for (auto& a : aux_targets(pop)) t.push_back(std::move(a));
  }
  return t;
}

struct Evaluated {
  MetricsReport report;
  Provenance prov;
};

struct EvalInputs {
  const RunConfig& cfg;
  const Population& pop;
  const Geometry& geo;
  std::size_t n;
  std::span<const TargetVariable> targets;
  std::string run_hash;
  const Log& log;
};

AnnealSchedule apply_overrides(AnnealSchedule s, const RunConfig& cfg) {
  if (cfg.T0) s.initial_temperature = *cfg.T0;
  if (cfg.alpha) s.cooling_rate = *cfg.alpha;
  s.metropolis = cfg.metropolis;
  return s;
}

Evaluated evaluate_design(const std::string& name, const EvalInputs& in) {
  const RunConfig& cfg = in.cfg;
  const std::size_t N = in.pop.size();
  const std::size_t n = in.n;
  EvaluationOptions eo;
  eo.nominal_level = cfg.level;
  eo.neighbors = cfg.neighbors;
  Provenance prov{cfg.seed, 0, in.run_hash};

  auto replicates = [&](const std::function<Sample(Rng&)>& draw) {
    in.log(name + ": drawing " + std::to_string(cfg.reps) + " replicates");
    std::vector<Sample> samples(cfg.reps);
    parallel_for(cfg.reps, cfg.threads, [&](std::size_t k) {
      Rng rng = make_stream(cfg.seed, "replicate:" + name, k);
      samples[k] = draw(rng);
    });
    return evaluate_replicates(samples, in.pop, in.geo, in.targets, eo);
  };

  MetricsReport report;
  if (name == "srs") {
    report = replicates([&](Rng& rng) { return srs(N, n, rng); });
  } else if (name == "systematic") {
    if (cfg.order_key >= in.pop.dimension()) {
      throw std::invalid_argument("--order-key " + std::to_string(cfg.order_key) + " exceeds the aux dimension");
    }
    report = replicates([&](Rng& rng) { return systematic(in.pop, cfg.order_key, n, rng); });
  } else if (name == "lpm") {
    const std::vector<double> probs = equal_inclusion(N, n);
    report = replicates([&](Rng& rng) { return lpm(probs, in.geo, rng); });
  } else if (name == "circular") {
    in.log("circular: annealing " + std::to_string(cfg.iterations) + " iterations");
    Rng init_rng = make_stream(cfg.seed, "circular-init");
    std::vector<std::uint32_t> order = random_order(N, init_rng);
    Rng schedule_rng = make_stream(cfg.seed, "schedule");
    const AnnealSchedule schedule =
        apply_overrides(default_circular_schedule(order, n, in.geo, cfg.iterations, schedule_rng), cfg);
    const CircularResult res = circular_anneal(in.geo, n, schedule, cfg.seed, std::move(order));
    const std::vector<Sample> windows = circular_windows(res.best_order, n);
    const std::vector<double> probs(N, 1.0 / static_cast<double>(N));
    report = evaluate_weighted(windows, probs, in.pop, in.geo, in.targets, eo);
    prov.iterations = cfg.iterations;
  } else if (name == "dbdtc") {
    in.log("dbdtc: building and annealing " + std::to_string(cfg.iterations) + " iterations");
    PipelineOptions po = pipeline_options(cfg);
    po.n = n;
    const DesignResult d = build_dbdtc(in.pop, po, cfg.seed);
    report = evaluate_support(support_of(d.global_columns()), in.pop, in.geo, in.targets, eo);
    prov.iterations = cfg.iterations;
    prov.config_hash = hex_hash(configuration_text(d.configuration));
  } else {
    throw std::invalid_argument("unknown design '" + name + "'");
  }
  report.design = name;
  return {std::move(report), std::move(prov)};
}

// Evaluates a stored design against the population. A single part has an
// explicit support; several strata are combined by drawing replicates.
Evaluated evaluate_stored(const fs::path& path, const EvalInputs& in) {
  const RunConfig& cfg = in.cfg;
  const std::vector<DesignPart> parts = read_design(path);
  std::unordered_map<std::string, std::uint32_t> index;
  for (std::size_t i = 0; i < in.pop.size(); ++i) index.emplace(in.pop.ids()[i], static_cast<std::uint32_t>(i));

  std::vector<std::vector<std::uint32_t>> to_pop;
  for (const auto& part : parts) {
    std::vector<std::uint32_t> map;
    map.reserve(part.ids.size());
    for (const auto& id : part.ids) {
      const auto it = index.find(id);
      if (it == index.end()) throw std::runtime_error("design unit id '" + id + "' is not in the population");
      map.push_back(it->second);
    }
    to_pop.push_back(std::move(map));
  }

  EvaluationOptions eo;
  eo.nominal_level = cfg.level;
  eo.neighbors = cfg.neighbors;
  Provenance prov{cfg.seed, 0, {}};
  std::string texts;
  for (const auto& part : parts) texts += configuration_text(part.configuration);
  prov.config_hash = hex_hash(texts);

  MetricsReport report;
  if (parts.size() == 1) {
    const DesignPart& part = parts.front();
    std::vector<Sample> cols;
    for (std::size_t k = 0; k < part.configuration.size(); ++k) {
      Sample s;
      for (std::uint32_t u : part.configuration.column(k)) s.push_back(to_pop[0][u]);
      std::sort(s.begin(), s.end());
      cols.push_back(std::move(s));
    }
    report = evaluate_support(support_of(std::move(cols)), in.pop, in.geo, in.targets, eo);
  } else {
    if (!in.pop.strata()) throw std::invalid_argument("a stratified design needs a population with --stratum");
    std::unordered_map<std::string, double> share;
    for (const auto& part : parts) {
      share[part.label] = static_cast<double>(part.configuration.sample_size()) /
                          static_cast<double>(part.stratum_size);
    }
    std::vector<double> pi(in.pop.size());
    for (std::size_t i = 0; i < in.pop.size(); ++i) {
      const auto it = share.find((*in.pop.strata())[i]);
      if (it == share.end()) throw std::runtime_error("unit " + in.pop.ids()[i] + " lies in no design stratum");
      pi[i] = it->second;
    }
    eo.inclusion = std::move(pi);
    in.log("dbdtc: drawing " + std::to_string(cfg.reps) + " replicates of the stratified design");
    std::vector<Sample> samples(cfg.reps);
    parallel_for(cfg.reps, cfg.threads, [&](std::size_t k) {
      Rng rng = make_stream(cfg.seed, "replicate:dbdtc", k);
      Sample s;
      for (std::size_t p = 0; p < parts.size(); ++p) {
        const auto col = parts[p].configuration.column(uniform_index(rng, parts[p].configuration.size()));
        for (std::uint32_t u : col) s.push_back(to_pop[p][u]);
      }
      std::sort(s.begin(), s.end());
      samples[k] = std::move(s);
    });
    report = evaluate_replicates(samples, in.pop, in.geo, in.targets, eo);
  }
  report.design = "dbdtc";
  return {std::move(report), std::move(prov)};
}

// Caveats attached to reports that contain the affected columns.
json report_notes(const std::vector<std::string>& designs) {
  json notes = {{"lb_variant", "Voronoi-based local balance variant, not the published LB formula"}};
  if (std::find(designs.begin(), designs.end(), "circular") != designs.end()) {
    notes["circular"] = "structural stand-in for circular DBD: random position swaps, same schedule as dbdtc";
  }
  return notes;
}

void log_warnings(const Log& log, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) log("warning: " + w);
}

}  // namespace

int cmd_generate(const RunConfig& cfg) {
  const Log log(cfg);
  const json run = to_json(cfg);
  std::vector<std::string> warnings;
  const Population pop = load_population(cfg, warnings);
  log_warnings(log, warnings);
  fs::create_directories(cfg.out);
  write_csv(pop, cfg.out / "population.csv");
  std::ifstream written(cfg.out / "population.csv");
  std::stringstream body;
  body << written.rdbuf();
  write_json(cfg.out, "population.json",
             {{"format_version", kFormatVersion},
              {"run_config", run},
              {"seed", cfg.seed},
              {"N", pop.size()},
              {"p", pop.dimension()},
              {"aux", pop.aux_names()},
              {"targets", pop.target_names()},
              {"warnings", warnings},
              {"population_hash", hex_hash(body.str())}});
  log("wrote " + (cfg.out / "population.csv").string() + " (N=" + std::to_string(pop.size()) +
      ", p=" + std::to_string(pop.dimension()) + ")");
  return 0;
}

int cmd_optimize(const RunConfig& cfg) {
  const Log log(cfg);
  const json run = to_json(cfg);
  std::vector<std::string> warnings;
  const Population pop = load_population(cfg, warnings);
  log_warnings(log, warnings);
  const PipelineOptions po = pipeline_options(cfg);

  struct Part {
    std::string label;
    std::size_t stratum_size;
    DesignResult design;
    std::vector<std::uint32_t> to_pop;  // configuration unit -> population index
    Population source;                  // what the pipeline ran on
  };
  std::vector<Part> parts;
  const auto started = std::chrono::steady_clock::now();
  if (cfg.strata.empty()) {
    const MinParams mp = min_params(pop.size(), cfg.n);
    log("optimizing N=" + std::to_string(pop.size()) + " n=" + std::to_string(cfg.n) + " (minimum M=" +
        std::to_string(mp.M) + ", c=" + std::to_string(mp.c) + ") for " + std::to_string(cfg.iterations) +
        " iterations");
    DesignResult d = build_dbdtc(pop, po, cfg.seed);
    std::vector<std::uint32_t> map = d.units;
    parts.push_back({"", pop.size(), std::move(d), std::move(map), pop});
  } else {
    log("optimizing " + std::to_string(strata_sizes(cfg).size()) + " strata for " + std::to_string(cfg.iterations) +
        " iterations each");
    StratifiedResult r = stratified_run(pop, strata_sizes(cfg), po, cfg.seed);
    for (auto& s : r.strata) {
      std::vector<std::uint32_t> map;
      for (std::uint32_t u : s.design.units) map.push_back(s.units[u]);
      Population sub = pop.subset(s.units);
      parts.push_back({s.label, s.units.size(), std::move(s.design), std::move(map), std::move(sub)});
    }
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  json design_parts = json::array();
  json summary_parts = json::array();
  for (const auto& part : parts) {
    const std::string suffix = part.label.empty() ? "" : "_" + file_label(part.label);
    const std::string config_name = "configuration" + suffix + ".txt";
    const std::string trajectory_name = "trajectory" + suffix + ".csv";
    const DesignResult& d = part.design;
    const std::string text = configuration_text(d.configuration);
    {
      auto out = open_output(cfg.out, config_name);
      out << text;
    }
    {
      auto out = open_output(cfg.out, trajectory_name);
      write_preamble(out, run);
      write_trajectory_csv(out, d.trajectory);
    }
    std::vector<std::string> ids;
    ids.reserve(part.to_pop.size());
    for (std::uint32_t u : part.to_pop) ids.push_back(pop.ids()[u]);
    design_parts.push_back({{"label", part.label},
                            {"configuration", config_name},
                            {"configuration_hash", hex_hash(text)},
                            {"stratum_size", part.stratum_size},
                            {"ids", std::move(ids)}});
    const TacticalConfiguration& D = d.configuration;
    summary_parts.push_back(
        {{"label", part.label},
         {"configuration", config_name},
         {"trajectory", trajectory_name},
         {"configuration_hash", hex_hash(text)},
         {"N", D.population_size()},
         {"n", D.sample_size()},
         {"M", D.size()},
         {"c", D.multiplicity()},
         {"initial_energy", d.initial_energy},
         {"final_energy", d.best_energy},
         {"schedule", to_json(d.schedule)},
         {"counters", to_json(d.counters)},
         {"compression", d.compression ? to_json(*d.compression, part.source) : json(nullptr)}});
    log((part.label.empty() ? std::string("design") : "stratum " + part.label) + ": mean energy " +
        format_number(d.initial_energy) + " -> " + format_number(d.best_energy) + ", " +
        std::to_string(d.counters.accepted) + " accepted of " + std::to_string(d.counters.admissible) +
        " admissible proposals");
  }
  write_json(cfg.out, "design.json",
             {{"format_version", kFormatVersion}, {"run_config", run}, {"seed", cfg.seed}, {"parts", design_parts}});
  write_json(cfg.out, "summary.json",
             {{"format_version", kFormatVersion},
              {"run_config", run},
              {"seed", cfg.seed},
              {"population", {{"N", pop.size()}, {"p", pop.dimension()}}},
              {"warnings", warnings},
              {"wall_time_seconds", wall},
              {"parts", summary_parts}});
  log("wrote " + cfg.out.string());
  return 0;
}

int cmd_draw(const RunConfig& cfg) {
  const std::vector<DesignPart> parts = read_design(cfg.design_file);
  Rng rng = make_stream(cfg.seed, "draw");
  std::ostringstream out;
  for (std::size_t k = 0; k < cfg.count; ++k) {
    if (k > 0) out << '\n';
    for (const auto& part : parts) {
      const auto col = part.configuration.column(uniform_index(rng, part.configuration.size()));
      for (std::uint32_t u : col) out << part.ids[u] << '\n';
    }
  }
  std::cout << out.str();
  return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
  const Log log(cfg);
  const json run = to_json(cfg);
  std::vector<std::string> warnings;
  const Population pop = load_population(cfg, warnings);
  log_warnings(log, warnings);
  const Geometry geo(pop);
  const std::vector<TargetVariable> targets = targets_for(cfg, pop);
  const EvalInputs in{cfg, pop, geo, cfg.n, targets, hex_hash(run.dump()), log};

  std::vector<Evaluated> results;
  if (!cfg.design_file.empty()) {
    results.push_back(evaluate_stored(cfg.design_file, in));
  } else {
    for (const auto& name : cfg.designs) results.push_back(evaluate_design(name, in));
  }

  {
    auto out = open_output(cfg.out, "metrics.csv");
    write_preamble(out, run);
    write_metrics_csv_header(out);
    for (const auto& r : results) write_metrics_csv_rows(out, r.report, r.prov);
  }
  {
    auto out = open_output(cfg.out, "samples.csv");
    write_preamble(out, run);
    write_sample_rows_header(out);
    for (const auto& r : results) write_sample_rows(out, r.report);
  }
  json reports = json::array();
  for (const auto& r : results) reports.push_back(to_json(r.report, r.prov));
  write_json(cfg.out, "report.json",
             {{"format_version", kFormatVersion},
              {"run_config", run},
              {"seed", cfg.seed},
              {"notes", report_notes(cfg.designs)},
              {"reports", reports}});
  for (const auto& r : results) {
    log(r.report.design + ": energy " + format_number(r.report.energy.mean) + ", BD " +
        format_number(r.report.bd.mean));
  }
  return 0;
}

int cmd_benchmark(const RunConfig& cfg) {
  const Log log(cfg);
  const json run = to_json(cfg);
  const std::string run_hash = hex_hash(run.dump());

  std::ostringstream table;
  std::ostringstream samples;
  std::ostringstream estimators;
  table << "N,p,n,design,mode,samples,energy,energy_sd,sb,sb_sd,lb_variant,lb_variant_sd,bd,bd_sd,seed,iterations,"
           "config_hash,format_version\n";
  write_sample_rows_header(samples, "N,p,n,");
  estimators << "N,p,n,design,target,total,mean_estimate,rmse,rrmse,coverage\n";
  bool any_estimators = false;
  json cells = json::array();

  auto run_cell = [&](const Population& pop) {
    const Geometry geo(pop);
    const std::vector<TargetVariable> targets = targets_for(cfg, pop);
    for (std::size_t n : cfg.n_list) {
      const std::string key = std::to_string(pop.size()) + "," + std::to_string(pop.dimension()) + "," +
                              std::to_string(n) + ",";
      log("cell N=" + std::to_string(pop.size()) + " p=" + std::to_string(pop.dimension()) + " n=" +
          std::to_string(n));
      const EvalInputs in{cfg, pop, geo, n, targets, run_hash, log};
      json reports = json::array();
      for (const auto& name : cfg.designs) {
        const Evaluated e = evaluate_design(name, in);
        const MetricsReport& r = e.report;
        table << key << r.design << ',' << r.mode << ',' << r.rows.size() << ',' << format_number(r.energy.mean)
              << ',' << format_number(r.energy.sd) << ',' << format_number(r.sb.mean) << ','
              << format_number(r.sb.sd) << ',' << format_number(r.lb.mean) << ',' << format_number(r.lb.sd) << ','
              << format_number(r.bd.mean) << ',' << format_number(r.bd.sd) << ',' << e.prov.seed << ','
              << e.prov.iterations << ',' << e.prov.config_hash << ',' << kFormatVersion << '\n';
        write_sample_rows(samples, r, key);
        for (const auto& est : r.estimators) {
          any_estimators = true;
          estimators << key << r.design << ',' << est.target << ',' << format_number(est.total) << ','
                     << format_number(est.mean_estimate) << ',' << format_number(est.rmse) << ','
                     << (est.rrmse ? format_number(*est.rrmse) : std::string("NA")) << ','
                     << format_number(est.coverage) << '\n';
        }
        reports.push_back(to_json(r, e.prov));
        log("  " + name + ": energy " + format_number(r.energy.mean) + ", BD " + format_number(r.bd.mean));
      }
      cells.push_back({{"N", pop.size()}, {"p", pop.dimension()}, {"n", n}, {"reports", std::move(reports)}});
    }
  };

  if (!cfg.input.empty()) {
    std::vector<std::string> warnings;
    const Population pop = load_population(cfg, warnings);
    log_warnings(log, warnings);
    run_cell(pop);
  } else {
    for (std::size_t p : cfg.p_list) {
      Population pop = synth_uniform(cfg.N, p, cfg.seed);
      if (cfg.standardize) pop = standardize(pop);
      run_cell(pop);
    }
  }

  auto emit = [&](const std::string& name, const std::ostringstream& body) {
    auto out = open_output(cfg.out, name);
    write_preamble(out, run);
    out << body.str();
  };
  emit("table.csv", table);
  emit("samples.csv", samples);
  if (any_estimators) emit("estimators.csv", estimators);
  write_json(cfg.out, "benchmark.json",
             {{"format_version", kFormatVersion},
              {"run_config", run},
              {"seed", cfg.seed},
              {"notes", report_notes(cfg.designs)},
              {"cells", cells}});
  log("wrote " + cfg.out.string());
  return 0;
}

}  // namespace dbdtc::cli
