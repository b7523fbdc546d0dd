#include "dbdtc/population.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "dbdtc/rng.hpp"

namespace dbdtc {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "na" || cell == "NaN" || cell == "nan";
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return k;
  }
  throw std::runtime_error("unknown column '" + name + "'");
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace

Population::Population(std::size_t p, std::vector<double> aux, std::vector<std::string> ids,
                       std::vector<std::string> aux_names, std::optional<std::vector<std::string>> strata)
    : dim_(p), aux_(std::move(aux)), ids_(std::move(ids)), aux_names_(std::move(aux_names)),
      strata_(std::move(strata)) {
  if (dim_ == 0) throw std::invalid_argument("population dimension must be at least 1");
  if (aux_.empty() || aux_.size() % dim_ != 0) {
    throw std::invalid_argument("aux matrix must be a non-empty N x p array");
  }
  size_ = aux_.size() / dim_;
  for (std::size_t k = 0; k < aux_.size(); ++k) {
    if (!std::isfinite(aux_[k])) {
      throw std::invalid_argument("non-finite aux value at unit " + std::to_string(k / dim_ + 1) + ", column " +
                                  std::to_string(k % dim_ + 1));
    }
  }
  if (ids_.empty()) {
    ids_.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) ids_.push_back(std::to_string(i + 1));
  }
  if (ids_.size() != size_) throw std::invalid_argument("id count does not match N");
  std::unordered_set<std::string> seen(ids_.begin(), ids_.end());
  if (seen.size() != size_) throw std::invalid_argument("unit ids must be unique");
  if (aux_names_.empty()) {
    for (std::size_t k = 0; k < dim_; ++k) aux_names_.push_back("x" + std::to_string(k + 1));
  }
  if (aux_names_.size() != dim_) throw std::invalid_argument("aux name count does not match p");
  if (strata_ && strata_->size() != size_) throw std::invalid_argument("stratum label count does not match N");
}

std::vector<double> Population::column(std::size_t column) const {
  if (column >= dim_) throw std::out_of_range("aux column out of range");
  std::vector<double> out(size_);
  for (std::size_t i = 0; i < size_; ++i) out[i] = aux_[i * dim_ + column];
  return out;
}

std::vector<double> Population::target(std::size_t t) const {
  const std::size_t q = target_names_.size();
  if (t >= q) throw std::out_of_range("target index out of range");
  std::vector<double> out(size_);
  for (std::size_t i = 0; i < size_; ++i) out[i] = targets_[i * q + t];
  return out;
}

Population Population::with_targets(std::vector<std::string> names, std::vector<double> values) const {
  if (values.size() != names.size() * size_) throw std::invalid_argument("target matrix must be N x q");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite target value");
  }
  Population out = *this;
  out.target_names_ = std::move(names);
  out.targets_ = std::move(values);
  return out;
}

Population Population::with_aux(std::vector<double> aux) const {
  if (aux.size() != aux_.size()) throw std::invalid_argument("replacement aux matrix must be N x p");
  for (double v : aux) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite aux value");
  }
  Population out = *this;
  out.aux_ = std::move(aux);
  return out;
}

Population Population::subset(std::span<const std::uint32_t> units) const {
  std::vector<double> aux;
  std::vector<std::string> ids;
  std::optional<std::vector<std::string>> strata;
  if (strata_) strata.emplace();
  const std::size_t q = target_names_.size();
  std::vector<double> targets;
  aux.reserve(units.size() * dim_);
  for (std::uint32_t i : units) {
    if (i >= size_) throw std::out_of_range("subset unit out of range");
    const auto r = row(i);
    aux.insert(aux.end(), r.begin(), r.end());
    ids.push_back(ids_[i]);
    if (strata) strata->push_back((*strata_)[i]);
    for (std::size_t t = 0; t < q; ++t) targets.push_back(targets_[i * q + t]);
  }
  Population out(dim_, std::move(aux), std::move(ids), aux_names_, std::move(strata));
  if (q > 0) out = out.with_targets(target_names_, std::move(targets));
  return out;
}

LoadResult load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open population file " + path.string());
  if (options.aux_columns.empty()) throw std::invalid_argument("at least one aux column is required");

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("population file is empty: " + path.string());
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header;
  for (auto& name : split_csv_line(line)) header.push_back(trim(name));

  std::vector<std::size_t> aux_idx;
  for (const auto& name : options.aux_columns) aux_idx.push_back(column_index(header, name));
  std::vector<std::size_t> target_idx;
  for (const auto& name : options.target_columns) target_idx.push_back(column_index(header, name));
  std::optional<std::size_t> id_idx;
  if (options.id_column) id_idx = column_index(header, *options.id_column);
  std::optional<std::size_t> stratum_idx;
  if (options.stratum_column) stratum_idx = column_index(header, *options.stratum_column);

  std::vector<double> aux;
  std::vector<double> targets;
  std::vector<std::string> ids;
  std::vector<std::string> strata;
  std::size_t dropped = 0;
  std::size_t row_number = 0;

  auto parse_cell = [&](const std::string& cell, std::size_t col, double& out) {
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last || !std::isfinite(out)) {
      throw std::runtime_error("non-numeric value '" + cell + "' at row " + std::to_string(row_number) +
                               ", column '" + header[col] + "'");
    }
  };

  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row_number;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("row " + std::to_string(row_number) + " has " + std::to_string(fields.size()) +
                               " fields, header has " + std::to_string(header.size()));
    }
    bool missing = false;
    for (std::size_t k : aux_idx) missing = missing || is_missing(trim(fields[k]));
    for (std::size_t k : target_idx) missing = missing || is_missing(trim(fields[k]));
    if (missing) {
      ++dropped;
      continue;
    }
    for (std::size_t k : aux_idx) {
      double v = 0.0;
      parse_cell(trim(fields[k]), k, v);
      aux.push_back(v);
    }
    for (std::size_t k : target_idx) {
      double v = 0.0;
      parse_cell(trim(fields[k]), k, v);
      targets.push_back(v);
    }
    if (id_idx) ids.push_back(trim(fields[*id_idx]));
    if (stratum_idx) strata.push_back(trim(fields[*stratum_idx]));
  }
  if (aux.empty()) throw std::runtime_error("no usable rows in " + path.string());

  std::optional<std::vector<std::string>> strata_opt;
  if (stratum_idx) strata_opt = std::move(strata);
  Population pop(aux_idx.size(), std::move(aux), std::move(ids), options.aux_columns, std::move(strata_opt));
  if (!target_idx.empty()) pop = pop.with_targets(options.target_columns, std::move(targets));
  return {std::move(pop), dropped};
}

Population synth_uniform(std::size_t N, std::size_t p, std::uint64_t seed) {
  if (N == 0 || p == 0) throw std::invalid_argument("synth_uniform requires N >= 1 and p >= 1");
  Rng rng = make_stream(seed, "population");
  std::vector<double> aux(N * p);
  for (double& v : aux) v = uniform01(rng);
  return Population(p, std::move(aux));
}

Population standardize(const Population& pop, std::vector<std::string>* warnings) {
  const std::size_t N = pop.size();
  const std::size_t p = pop.dimension();
  std::vector<double> aux(pop.aux().begin(), pop.aux().end());
  for (std::size_t k = 0; k < p; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < N; ++i) mean += aux[i * p + k];
    mean /= static_cast<double>(N);
    double ss = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double d = aux[i * p + k] - mean;
      ss += d * d;
    }
    const double sd = N > 1 ? std::sqrt(ss / static_cast<double>(N - 1)) : 0.0;
    const bool constant = !(sd > 0.0) || sd <= 1e-300;
    if (constant) {
      const std::string msg = "constant aux column '" + pop.aux_names()[k] + "' mapped to zero";
      if (warnings) {
        warnings->push_back(msg);
      } else {
        std::cerr << "warning: " << msg << '\n';
      }
    }
    for (std::size_t i = 0; i < N; ++i) {
      double& v = aux[i * p + k];
      v = constant ? 0.0 : (v - mean) / sd;
    }
  }
  return pop.with_aux(std::move(aux));
}

void write_csv(const Population& pop, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  out << "id";
  for (const auto& name : pop.aux_names()) out << ',' << quote_if_needed(name);
  for (const auto& name : pop.target_names()) out << ',' << quote_if_needed(name);
  if (pop.strata()) out << ",stratum";
  out << '\n';
  std::vector<std::vector<double>> targets;
  for (std::size_t t = 0; t < pop.target_count(); ++t) targets.push_back(pop.target(t));
  for (std::size_t i = 0; i < pop.size(); ++i) {
    out << quote_if_needed(pop.ids()[i]);
    for (double v : pop.row(i)) out << ',' << v;
    for (const auto& t : targets) out << ',' << t[i];
    if (pop.strata()) out << ',' << quote_if_needed((*pop.strata())[i]);
    out << '\n';
  }
}

}  // namespace dbdtc
