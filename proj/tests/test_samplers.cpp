#include <doctest.h>

#include <cmath>
#include <set>

#include "dbdtc/energy.hpp"
#include "dbdtc/samplers.hpp"
#include "oracles.hpp"

using namespace dbdtc;

namespace {

bool sorted_distinct(const Sample& s) {
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] <= s[i - 1]) return false;
  return true;
}

// Whether |freq - p| lies within z binomial standard errors.
bool within(double freq, double p, std::size_t reps, double z) {
  return std::abs(freq - p) <= z * std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
}

}  // namespace

TEST_SUITE("samplers") {

TEST_CASE("srs") {
  Rng rng(5);
  CHECK(srs(4, 4, rng) == Sample{0, 1, 2, 3});
  CHECK_THROWS(srs(4, 0, rng));
  CHECK_THROWS(srs(4, 5, rng));
  for (int rep = 0; rep < 100; ++rep) {
    const auto s = srs(50, 7, rng);
    CHECK(s.size() == 7);
    CHECK(sorted_distinct(s));
  }
  const std::size_t reps = 20000;
  std::size_t first = 0;
  for (std::size_t r = 0; r < reps; ++r) first += srs(2, 1, rng)[0] == 0;
  CHECK(within(static_cast<double>(first) / reps, 0.5, reps, 3.0));
}

TEST_CASE("systematic positions") {
  const auto pop = oracle::line({0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  CHECK(systematic_at(pop, 0, 2, 1e-9) == Sample{0, 3});
  CHECK(systematic_at(pop, 0, 2, 1.0) == Sample{2, 5});
  CHECK(systematic_at(pop, 0, 6, 0.37) == Sample{0, 1, 2, 3, 4, 5});
  CHECK_THROWS(systematic_at(pop, 0, 2, 0.0));
  CHECK_THROWS(systematic_at(pop, 1, 2, 0.5));

  // The ordering follows the key, not the index.
  const auto rev = oracle::line({0.6, 0.5, 0.4, 0.3, 0.2, 0.1});
  CHECK(systematic_at(rev, 0, 2, 1e-9) == Sample{2, 5});

  Rng rng(1);
  const auto odd = synth_uniform(7, 1, 2);
  for (int rep = 0; rep < 200; ++rep) {
    const auto s = systematic(odd, 0, 3, rng);
    CHECK(s.size() == 3);
    CHECK(sorted_distinct(s));
  }
}

TEST_CASE("systematic inclusion integrates to n/N over the start") {
  // Integrate over u on a fine grid: each unit's share of starts is n/N.
  const auto pop = synth_uniform(13, 1, 6);
  const std::size_t grid = 13 * 5 * 64;
  std::vector<std::size_t> hits(13, 0);
  for (std::size_t g = 0; g < grid; ++g) {
    const double u = (static_cast<double>(g) + 0.5) / grid;
    for (auto i : systematic_at(pop, 0, 5, u)) ++hits[i];
  }
  for (auto h : hits) CHECK(static_cast<double>(h) / grid == doctest::Approx(5.0 / 13.0).epsilon(1e-12));
}

TEST_CASE("lpm basic contracts") {
  const auto pop = synth_uniform(10, 2, 1);
  const Geometry geo(pop);
  Rng rng(7);
  const std::vector<double> ones(10, 1.0);
  CHECK(lpm(ones, geo, rng) == Sample{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});

  std::vector<double> mixed(10, 0.5);
  mixed[2] = 1.0;
  mixed[3] = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto s = lpm(mixed, geo, rng);
    CHECK(s.size() == 5);
    CHECK(sorted_distinct(s));
    CHECK(std::count(s.begin(), s.end(), 2u) == 1);
    CHECK(std::count(s.begin(), s.end(), 3u) == 0);
  }
  std::vector<double> frac(10, 0.35);
  CHECK_THROWS(lpm(frac, geo, rng));
  std::vector<double> neg(10, 0.5);
  neg[0] = -0.5;
  neg[1] = 1.5;
  CHECK_THROWS(lpm(neg, geo, rng));
}

TEST_CASE("lpm two units at one half") {
  const auto pop = oracle::line({0.0, 1.0});
  const Geometry geo(pop);
  Rng rng(11);
  const std::vector<double> half{0.5, 0.5};
  const std::size_t reps = 40000;
  std::size_t zero = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto s = lpm(half, geo, rng);
    REQUIRE(s.size() == 1);
    zero += s[0] == 0;
  }
  CHECK(within(static_cast<double>(zero) / reps, 0.5, reps, 3.0));
}

TEST_CASE("lpm keeps equal marginals") {
  const auto pop = synth_uniform(20, 2, 3);
  const Geometry geo(pop);
  Rng rng(21);
  const std::vector<double> probs(20, 0.25);
  const std::size_t reps = 100000;
  std::vector<std::size_t> hits(20, 0);
  for (std::size_t r = 0; r < reps; ++r)
    for (auto i : lpm(probs, geo, rng)) ++hits[i];
  for (auto h : hits) CHECK(std::abs(static_cast<double>(h) / reps - 0.25) < 0.01);
}

TEST_CASE("sampling-based init follows the budget recursion") {
  const auto pop = synth_uniform(6, 2, 4);
  const Geometry geo(pop);
  Rng rng(8);
  std::vector<std::vector<double>> seen;
  auto gen = [&](std::span<const double> probs, Rng& r) { return lpm(probs, geo, r); };
  auto watch = [&](std::size_t k, std::span<const double> probs) {
    CHECK(k == seen.size() + 1);
    seen.emplace_back(probs.begin(), probs.end());
  };
  const auto D = init_by_sampling(6, 4, gen, rng, watch);
  CHECK(validate(D).ok());
  CHECK(D.size() == 3);
  REQUIRE(seen.size() == 3);
  for (double p : seen[0]) CHECK(p == doctest::Approx(2.0 / 3.0));
  for (double p : seen[1]) CHECK((p == doctest::Approx(0.5) || p == doctest::Approx(1.0)));
  for (double p : seen[2]) CHECK((p == 0.0 || p == 1.0));
}

TEST_CASE("sampling-based init budgets sum to n(M-k+1)") {
  const auto pop = synth_uniform(90, 2, 5);
  const Geometry geo(pop);
  Rng rng(9);
  const std::size_t n = 24;  // M = 15, c = 4
  const std::size_t M = min_params(90, n).M;
  auto gen = [&](std::span<const double> probs, Rng& r) { return lpm(probs, geo, r); };
  auto watch = [&](std::size_t k, std::span<const double> probs) {
    const double left = static_cast<double>(M - k + 1);
    double budget = 0.0;
    for (double p : probs) {
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      const double b = p * left;
      CHECK(std::abs(b - std::round(b)) < 1e-9);
      budget += b;
    }
    CHECK(budget == doctest::Approx(static_cast<double>(n) * left));
  };
  CHECK(validate(init_by_sampling(90, n, gen, rng, watch)).ok());

  const auto census = init_by_lpm(geo, 90, rng);
  CHECK(census.size() == 1);
}

TEST_CASE("sampling-based init rejects a misbehaving generator") {
  Rng rng(1);
  auto short_gen = [](std::span<const double>, Rng&) { return Sample{0}; };
  CHECK_THROWS_AS(init_by_sampling(10, 2, short_gen, rng), std::runtime_error);
  auto greedy = [](std::span<const double>, Rng&) { return Sample{0, 1}; };
  CHECK_THROWS_AS(init_by_sampling(10, 2, greedy, rng), std::runtime_error);
}

TEST_CASE("lpm initialization starts below the cyclic one") {
  const auto pop = synth_uniform(1000, 5, 17);
  const Geometry geo(pop);
  double lpm_sum = 0.0;
  double cyc_sum = 0.0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(seed);
    const auto L = init_by_lpm(geo, 50, rng);
    CHECK(validate(L).ok());
    lpm_sum += expected_energy(L, geo).expected();
    cyc_sum += expected_energy(cyclic_init(1000, 50, std::nullopt, rng), geo).expected();
  }
  CHECK(lpm_sum < cyc_sum);
}

TEST_CASE("systematic pps keeps size and marginals") {
  Rng rng(31);
  std::vector<double> probs{0.2, 0.9, 0.0, 1.0, 0.45, 0.45, 0.3, 0.7};  // sums to 4
  const std::size_t reps = 100000;
  std::vector<std::size_t> hits(probs.size(), 0);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto s = systematic_pps(probs, rng);
    REQUIRE(s.size() == 4);
    CHECK(sorted_distinct(s));
    for (auto i : s) ++hits[i];
  }
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double freq = static_cast<double>(hits[i]) / reps;
    if (probs[i] == 0.0 || probs[i] == 1.0) {
      CHECK(freq == probs[i]);
    } else {
      CHECK(within(freq, probs[i], reps, 4.0));
    }
  }
  std::vector<double> frac{0.3, 0.3};
  CHECK_THROWS(systematic_pps(frac, rng));
}

TEST_CASE("sampling-based init validates for conforming generators") {
  Rng rng(41);
  auto pps = [](std::span<const double> probs, Rng& r) { return systematic_pps(probs, r); };
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t N = 1 + uniform_index(rng, 250);
    const std::size_t n = 1 + uniform_index(rng, N);
    CHECK(validate(init_by_sampling(N, n, pps, rng)).ok());
  }
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t N = 2 + uniform_index(rng, 60);
    const std::size_t n = 1 + uniform_index(rng, N);
    const auto pop = synth_uniform(N, 2, rep);
    const Geometry geo(pop);
    CHECK(validate(init_by_lpm(geo, n, rng)).ok());
  }
}

}
