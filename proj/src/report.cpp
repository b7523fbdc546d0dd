#include "dbdtc/report.hpp"

#include <charconv>
#include <cstdio>
#include <ostream>

#include "dbdtc/rng.hpp"

namespace dbdtc {

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string num(double v) { return format_number(v); }

}  // namespace

void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryPoint> points) {
  out << "iteration,expected_energy,best_energy,temperature\n";
  for (const auto& p : points) {
    out << p.iteration << ',' << num(p.expected_energy) << ',' << num(p.best_energy) << ',' << num(p.temperature)
        << '\n';
  }
}

std::string hex_hash(std::string_view text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

std::string rational_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

void write_metrics_csv_header(std::ostream& out) {
  out << "design,mode,metric,mean,sd,count,seed,iterations,config_hash,format_version\n";
}

void write_metrics_csv_rows(std::ostream& out, const MetricsReport& r, const Provenance& prov) {
  auto row = [&](const std::string& metric, double mean, double sd) {
    out << r.design << ',' << r.mode << ',' << metric << ',' << num(mean) << ',' << num(sd) << ',' << r.rows.size()
        << ',' << prov.seed << ',' << prov.iterations << ',' << prov.config_hash << ',' << kFormatVersion << '\n';
  };
  row("energy", r.energy.mean, r.energy.sd);
  row("sb", r.sb.mean, r.sb.sd);
  row("lb_variant", r.lb.mean, r.lb.sd);
  row("bd", r.bd.mean, r.bd.sd);
  for (const auto& e : r.estimators) {
    row("rmse:" + e.target, e.rmse, 0.0);
    if (e.rrmse) row("rrmse:" + e.target, *e.rrmse, 0.0);
    row("coverage:" + e.target, e.coverage, 0.0);
  }
}

void write_sample_rows_header(std::ostream& out, std::string_view prefix) {
  out << prefix << "design,sample,weight,energy,sb,lb_variant,bd\n";
}

void write_sample_rows(std::ostream& out, const MetricsReport& r, std::string_view prefix) {
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    const auto& m = r.rows[k];
    out << prefix << r.design << ',' << k << ',' << num(r.weights[k]) << ',' << num(m.energy) << ',' << num(m.sb) << ','
        << num(m.lb) << ',' << num(m.bd) << '\n';
  }
}

nlohmann::json to_json(const MetricsReport& r, const Provenance& prov) {
  using nlohmann::json;
  auto summary = [](const MetricSummary& s) { return json{{"mean", s.mean}, {"sd", s.sd}}; };
  json estimators = json::array();
  for (const auto& e : r.estimators) {
    json row{{"target", e.target},   {"total", e.total},       {"mean_estimate", e.mean_estimate},
             {"rmse", e.rmse},       {"coverage", e.coverage}, {"relative", e.rrmse.has_value()}};
    row["rrmse"] = e.rrmse ? json(*e.rrmse) : json(nullptr);
    estimators.push_back(std::move(row));
  }
  return json{{"format_version", kFormatVersion},
              {"design", r.design},
              {"mode", r.mode},
              {"sample_size", r.sample_size},
              {"samples", r.rows.size()},
              {"nominal_level", r.nominal_level},
              {"neighbors", r.neighbors},
              {"energy", summary(r.energy)},
              {"sb", summary(r.sb)},
              {"lb_variant", summary(r.lb)},
              {"bd", summary(r.bd)},
              {"estimators", std::move(estimators)},
              {"seed", prov.seed},
              {"iterations", prov.iterations},
              {"config_hash", prov.config_hash}};
}

nlohmann::json to_json(const AnnealCounters& c) {
  return {{"iterations", c.iterations}, {"proposed", c.proposed},     {"admissible", c.admissible},
          {"accepted", c.accepted},     {"new_best", c.new_best},     {"recomputes", c.recomputes},
          {"max_delta_terms", c.max_delta_terms}};
}

nlohmann::json to_json(const AnnealSchedule& s) {
  return {{"iterations", s.iterations},
          {"initial_temperature", s.initial_temperature},
          {"cooling_rate", s.cooling_rate},
          {"metropolis", s.metropolis}};
}

nlohmann::json to_json(const CompressionPlan& plan, const Population& pop, std::size_t id_limit) {
  nlohmann::json j{{"format_version", kFormatVersion},
                   {"N", plan.N},
                   {"n", plan.n},
                   {"M_star", plan.M_star},
                   {"N_star", plan.N_star},
                   {"weight", plan.weight()},
                   {"conditional", plan.conditional},
                   {"selection_probability", rational_string(plan.selection_probability())},
                   {"conditional_inclusion", rational_string(plan.conditional_inclusion())},
                   {"unconditional_inclusion", rational_string(plan.unconditional_inclusion())}};
  if (!plan.units.empty() && plan.units.size() <= id_limit) {
    nlohmann::json ids = nlohmann::json::array();
    for (std::uint32_t u : plan.units) ids.push_back(pop.ids()[u]);
    j["units"] = std::move(ids);
  } else {
    j["units"] = nullptr;
    j["reconstruct"] = {{"seed", plan.seed}, {"stream", "compress"}, {"method", "lpm"}};
  }
  return j;
}

}  // namespace dbdtc
