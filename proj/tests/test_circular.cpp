#include <doctest.h>

#include <map>
#include <numeric>

#include "dbdtc/circular.hpp"
#include "dbdtc/energy.hpp"

using namespace dbdtc;

namespace {

double brute_expected(std::span<const std::uint32_t> order, std::size_t n, const Geometry& geo) {
  double total = 0.0;
  for (const auto& w : circular_windows(order, n)) total += sample_energy(w, geo);
  return total / static_cast<double>(order.size());
}

AnnealSchedule fixed(std::uint64_t iterations, double t0, double alpha) {
  AnnealSchedule s;
  s.iterations = iterations;
  s.initial_temperature = t0;
  s.cooling_rate = alpha;
  return s;
}

}  // namespace

TEST_SUITE("circular") {

TEST_CASE("windows of the identity ordering") {
  const std::vector<std::uint32_t> id{0, 1, 2, 3};
  CHECK(circular_windows(id, 2) == std::vector<Sample>{{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  for (const auto& w : circular_windows(id, 4)) CHECK(w == Sample{0, 1, 2, 3});
  CHECK_THROWS(circular_windows(id, 0));
  CHECK_THROWS(circular_windows(id, 5));
}

TEST_CASE("every unit sits in exactly n windows") {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t N = 2 + uniform_index(rng, 40);
    const std::size_t n = 1 + uniform_index(rng, N);
    const auto order = random_order(N, rng);
    std::map<std::uint32_t, std::size_t> count;
    for (const auto& w : circular_windows(order, n)) {
      CHECK(w.size() == n);
      for (auto u : w) ++count[u];
    }
    CHECK(count.size() == N);
    for (const auto& [u, c] : count) CHECK(c == n);
  }
}

TEST_CASE("move deltas agree with recomputation") {
  const auto pop = synth_uniform(60, 3, 8);
  const Geometry geo(pop);
  Rng rng(4);
  for (std::size_t n : {1u, 2u, 7u, 29u, 30u, 31u, 59u, 60u}) {
    CircularAnnealer an(random_order(60, rng), n, geo, fixed(1000, 1e300, 1.0), 5);
    CHECK(an.expected_energy() == doctest::Approx(brute_expected(an.order(), n, geo)).epsilon(1e-12));
    for (int rep = 0; rep < 40; ++rep) {
      const auto mv = an.propose();
      REQUIRE(mv.has_value());
      const double before = brute_expected(an.order(), n, geo);
      const double predicted = an.move_delta(*mv) / 60.0;
      an.step(*mv);  // the huge temperature keeps everything
      const double after = brute_expected(an.order(), n, geo);
      CHECK(predicted == doctest::Approx(after - before).epsilon(1e-9).scale(1e-3));
      CHECK(an.expected_energy() == doctest::Approx(after).epsilon(1e-9));
    }
  }
}

TEST_CASE("window energies and best order stay consistent") {
  const auto pop = synth_uniform(80, 2, 9);
  const Geometry geo(pop);
  Rng rng(6);
  const auto order = random_order(80, rng);
  const auto sched = default_circular_schedule(order, 8, geo, 20000, rng);
  CircularAnnealer an(order, 8, geo, sched, 7);
  an.run();
  const auto we = an.window_energies();
  CHECK(std::accumulate(we.begin(), we.end(), 0.0) / 80.0 == doctest::Approx(an.expected_energy()).epsilon(1e-9));
  CHECK(an.best_energy() < an.initial_energy());
  CHECK(an.best_energy() <= an.expected_energy());
  CHECK(brute_expected(an.best_order(), 8, geo) == doctest::Approx(an.best_energy()).epsilon(1e-9));
  auto sorted = an.best_order();
  std::sort(sorted.begin(), sorted.end());
  for (std::uint32_t i = 0; i < 80; ++i) CHECK(sorted[i] == i);
  const auto& traj = an.trajectory();
  for (std::size_t i = 1; i < traj.size(); ++i) CHECK(traj[i].best_energy <= traj[i - 1].best_energy);
  an.resync();
  CHECK(an.counters().recomputes >= 1);
}

TEST_CASE("zero iterations keep the initial ordering") {
  const auto pop = synth_uniform(20, 2, 1);
  const Geometry geo(pop);
  Rng rng(2);
  const auto order = random_order(20, rng);
  const auto res = circular_anneal(geo, 4, fixed(0, 1.0, 1.0), 3, order);
  CHECK(res.best_order == order);
  CHECK(res.best_energy == res.initial_energy);
  const auto again = circular_anneal(geo, 4, fixed(500, 1e-3, 0.99), 3);
  const auto twice = circular_anneal(geo, 4, fixed(500, 1e-3, 0.99), 3);
  CHECK(again.best_order == twice.best_order);
}

}
