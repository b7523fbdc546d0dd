// Runs the dbdtc executable end to end. Paths come from CMake.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbdtc/tactical.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kWork = DBDTC_CLI_WORK_DIR;

struct Run {
  int status = 0;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(DBDTC_CLI_PATH) + " -q " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Everything after the '#' provenance lines.
std::string body(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    out += line + '\n';
  }
  return out;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

fs::path fresh(const std::string& name) {
  const fs::path dir = kWork / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("optimize writes configuration, trajectory and summary and improves the energy") {
  const fs::path dir = fresh("optimize");
  const Run r = run("optimize --synthetic N=1000,p=5 --n 50 --iters 200000 --seed 7 --out " + dir.string());
  REQUIRE(r.status == 0);
  for (const char* f : {"configuration.txt", "trajectory.csv", "summary.json", "design.json"}) {
    CHECK(fs::exists(dir / f));
  }
  const json summary = json::parse(slurp(dir / "summary.json"));
  CHECK(summary.at("format_version") == 1);
  CHECK(summary.at("seed") == 7);
  CHECK(summary.at("run_config").at("design").at("iterations") == 200000);
  const json& part = summary.at("parts").at(0);
  CHECK(part.at("final_energy").get<double>() < part.at("initial_energy").get<double>());
  CHECK(part.at("counters").at("iterations") == 200000);

  std::ifstream in(dir / "configuration.txt");
  const dbdtc::TacticalConfiguration D = dbdtc::read_configuration(in);
  CHECK(D.population_size() == 1000);
  CHECK(D.size() == 20);
  CHECK(D.sample_size() == 50);

  const auto traj = lines(body(dir / "trajectory.csv"));
  CHECK(traj.front() == "iteration,expected_energy,best_energy,temperature");
  CHECK(traj.back().rfind("200000,", 0) == 0);
}

TEST_CASE("identical flags reproduce identical files") {
  const fs::path dir = fresh("determinism");
  const std::string args = "optimize --synthetic N=300,p=3 --n 20 --iters 20000 --seed 11 --out " + dir.string();
  REQUIRE(run(args).status == 0);
  const std::string config = slurp(dir / "configuration.txt");
  const std::string trajectory = slurp(dir / "trajectory.csv");
  const std::string design = slurp(dir / "design.json");
  REQUIRE(run(args).status == 0);
  CHECK(slurp(dir / "configuration.txt") == config);
  CHECK(slurp(dir / "trajectory.csv") == trajectory);
  CHECK(slurp(dir / "design.json") == design);

  // A different output directory changes the embedded config, not the data.
  const fs::path other = fresh("determinism_other");
  REQUIRE(run("optimize --synthetic N=300,p=3 --n 20 --iters 20000 --seed 11 --out " + other.string()).status == 0);
  CHECK(slurp(other / "configuration.txt") == config);
  CHECK(body(other / "trajectory.csv") == body(dir / "trajectory.csv"));

  const fs::path seeded = fresh("determinism_seed");
  REQUIRE(run("optimize --synthetic N=300,p=3 --n 20 --iters 20000 --seed 12 --out " + seeded.string()).status == 0);
  CHECK(slurp(seeded / "configuration.txt") != config);
}

TEST_CASE("zero iterations return the initialization") {
  const fs::path dir = fresh("zero");
  REQUIRE(run("optimize --synthetic N=60,p=2 --n 8 --iters 0 --init cyclic --seed 3 --out " + dir.string()).status ==
          0);
  dbdtc::Rng rng = dbdtc::make_stream(3, "init");
  const dbdtc::TacticalConfiguration expected = dbdtc::cyclic_init(60, 8, std::nullopt, rng);
  CHECK(slurp(dir / "configuration.txt") == dbdtc::configuration_text(expected));
  const json part = json::parse(slurp(dir / "summary.json")).at("parts").at(0);
  CHECK(part.at("initial_energy") == part.at("final_energy"));
  CHECK(part.at("counters").at("proposed") == 0);
}

TEST_CASE("draw returns n ids and a single column deterministically") {
  const fs::path dir = fresh("draw_single");
  {
    std::ofstream f(dir / "single.txt");
    f << "4 1 4 1\n1 2 3 4\n";
  }
  for (int seed : {1, 2, 3}) {
    const Run r = run("draw " + (dir / "single.txt").string() + " --seed " + std::to_string(seed));
    REQUIRE(r.status == 0);
    CHECK(r.out == "1\n2\n3\n4\n");
  }
  const fs::path opt = fresh("draw_opt");
  REQUIRE(run("optimize --synthetic N=90,p=2 --n 6 --iters 1000 --out " + opt.string()).status == 0);
  for (const char* file : {"configuration.txt", "design.json"}) {
    const Run r = run("draw " + (opt / file).string() + " --seed 4");
    REQUIRE(r.status == 0);
    CHECK(lines(r.out).size() == 6);
  }
}

TEST_CASE("draw frequencies on the 6 x 3 example are uniform") {
  const fs::path dir = fresh("draw_freq");
  {
    std::ofstream f(dir / "example.txt");
    f << "6 3 4 2\n1 3 4 6\n1 2 4 5\n2 3 5 6\n";
  }
  constexpr int kDraws = 100000;
  const Run r = run("draw " + (dir / "example.txt").string() + " --seed 9 --count " + std::to_string(kDraws));
  REQUIRE(r.status == 0);
  std::map<std::string, int> freq;
  std::string current;
  int draws = 0;
  for (const auto& line : lines(r.out + "\n")) {
    if (line.empty()) {
      if (!current.empty()) {
        ++freq[current];
        ++draws;
      }
      current.clear();
    } else {
      current += line + " ";
    }
  }
  REQUIRE(draws == kDraws);
  REQUIRE(freq.size() == 3);
  const double sigma = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / kDraws);
  for (const char* col : {"1 3 4 6 ", "1 2 4 5 ", "2 3 5 6 "}) {
    CHECK(std::abs(freq[col] / double(kDraws) - 1.0 / 3.0) < 3.0 * sigma);
  }
}

TEST_CASE("draw rejects malformed files") {
  const fs::path dir = fresh("draw_bad");
  {
    std::ofstream f(dir / "bad.txt");
    f << "4 2 2 1\n1 2\n";
  }
  CHECK(run("draw " + (dir / "bad.txt").string()).status != 0);
  CHECK(run("draw " + (dir / "missing.txt").string()).status != 0);
}

TEST_CASE("benchmark emits one row per (p, design)") {
  const fs::path dir = fresh("bench");
  REQUIRE(run("benchmark --N 200 --p 2,5 --n 10 --designs srs,lpm,systematic,circular,dbdtc --reps 50 --iters 2000 "
              "--out " +
              dir.string())
              .status == 0);
  const auto rows = lines(body(dir / "table.csv"));
  REQUIRE(rows.size() == 1 + 2 * 5);
  std::map<std::string, int> seen;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    std::vector<std::string> f;
    std::stringstream ss(rows[k]);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    ++seen[f[1] + ":" + f[3]];
  }
  CHECK(seen.size() == 10);
  const json j = json::parse(slurp(dir / "benchmark.json"));
  CHECK(j.at("cells").size() == 2);
  CHECK(slurp(dir / "table.csv").rfind("# format_version: 1\n", 0) == 0);
}

TEST_CASE("benchmark with designs={srs} reports exactly the SRS rows") {
  const fs::path dir = fresh("bench_srs");
  REQUIRE(run("benchmark --N 200 --p 3 --n 10,20 --designs srs --reps 40 --out " + dir.string()).status == 0);
  const auto rows = lines(body(dir / "table.csv"));
  REQUIRE(rows.size() == 3);
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].find(",srs,replicates,40,") != std::string::npos);
}

TEST_CASE("invalid flags and unknown designs fail") {
  const fs::path dir = fresh("invalid");
  const std::string out = " --out " + dir.string();
  CHECK(run("benchmark --designs srs,lcube" + out).status == 2);
  CHECK(run("optimize --synthetic N=10,p=2 --n 3 --init random" + out).status == 2);
  CHECK(run("optimize --synthetic N=10,p=2" + out).status == 2);
  CHECK(run("optimize --synthetic N=10,q=2 --n 3" + out).status == 2);
  CHECK(run("optimize --synthetic N=10,p=2 --n 3 --alpha 1.5" + out).status == 2);
  CHECK(run("evaluate --synthetic N=10,p=2 --design srs" + out).status == 2);
  CHECK(run("optimize --synthetic N=10,p=2 --n 11" + out).status != 0);
}
