#include <doctest.h>

#include <numeric>

#include "dbdtc/energy.hpp"
#include "dbdtc/anneal.hpp"
#include "dbdtc/samplers.hpp"
#include "oracles.hpp"

using namespace dbdtc;

namespace {

double column_energy(const TacticalConfiguration& D, std::size_t k, const Geometry& geo) {
  return sample_energy(D.column(k), geo);
}

}  // namespace

TEST_SUITE("energy") {

TEST_CASE("sample energy on a three-point line") {
  const auto pop = oracle::line({0.0, 1.0, 2.0});
  const Geometry geo(pop);
  const std::vector<std::uint32_t> mid{1};
  const std::vector<std::uint32_t> end{0};
  CHECK(sample_energy(mid, geo) == doctest::Approx(4.0 / 9.0).epsilon(1e-14));
  CHECK(sample_energy(end, geo) == doctest::Approx(10.0 / 9.0).epsilon(1e-14));
  const auto ph = oracle::phi(pop);
  CHECK(oracle::energy(pop, ph, mid) == doctest::Approx(4.0 / 9.0).epsilon(1e-14));
  CHECK(oracle::energy(pop, ph, end) == doctest::Approx(10.0 / 9.0).epsilon(1e-14));
  const std::vector<std::uint32_t> all{0, 1, 2};
  CHECK(std::abs(sample_energy(all, geo)) < 1e-15);
  CHECK_THROWS(sample_energy(all, geo, 2));
}

TEST_CASE("sample energy matches the indicator-vector form") {
  const auto pop = synth_uniform(80, 3, 2);
  const Geometry geo(pop);
  const auto ph = oracle::phi(pop);
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + uniform_index(rng, 80);
    std::vector<std::uint32_t> all(80);
    std::iota(all.begin(), all.end(), 0u);
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<std::uint32_t> s(all.begin(), all.begin() + n);
    const double e = sample_energy(s, geo);
    CHECK(e >= -1e-12);
    CHECK(e == doctest::Approx(oracle::energy(pop, ph, s)).epsilon(1e-12));
  }
}

TEST_CASE("identical units have zero energy") {
  const Population pop(2, std::vector<double>(20, 0.3));
  const Geometry geo(pop);
  const std::vector<std::uint32_t> s{1, 4, 7};
  CHECK(sample_energy(s, geo) == 0.0);
}

TEST_CASE("energy scales linearly with the aux values") {
  const auto pop = synth_uniform(50, 2, 9);
  std::vector<double> doubled(pop.aux().begin(), pop.aux().end());
  for (double& v : doubled) v = 2.0 * v + 7.0;
  const Geometry a(pop);
  const Geometry b(pop.with_aux(doubled));
  const std::vector<std::uint32_t> s{3, 8, 21, 40};
  CHECK(sample_energy(s, b) == doctest::Approx(2.0 * sample_energy(s, a)).epsilon(1e-12));
}

TEST_CASE("expected energy") {
  const auto pop = synth_uniform(12, 2, 4);
  const Geometry geo(pop);
  Rng rng(2);
  const auto census = expected_energy(cyclic_init(12, 12, std::nullopt, rng), geo);
  CHECK(std::abs(census.expected()) < 1e-15);

  const TacticalConfiguration dup(4, 2, {{0, 1}, {2, 3}, {0, 1}, {2, 3}});
  const auto pop4 = synth_uniform(4, 2, 1);
  const Geometry g4(pop4);
  const auto led = expected_energy(dup, g4);
  CHECK(led.per_sample()[0] == led.per_sample()[2]);
  const TacticalConfiguration single(4, 2, {{0, 1}, {2, 3}});
  CHECK(led.expected() == doctest::Approx(expected_energy(single, g4).expected()));

  const auto D = cyclic_init(12, 8, std::nullopt, rng);
  const auto L = expected_energy(D, geo);
  double sum = 0.0;
  for (std::size_t k = 0; k < D.size(); ++k) {
    const double e = oracle::energy(pop, oracle::phi(pop), Sample(D.column(k).begin(), D.column(k).end()));
    CHECK(L[k] == doctest::Approx(e).epsilon(1e-12));
    sum += e;
  }
  CHECK(L.total() == doctest::Approx(sum).epsilon(1e-12));
  CHECK(L.expected() * static_cast<double>(D.size()) == doctest::Approx(L.total()));
}

TEST_CASE("expected energy is invariant under relabeling") {
  const auto pop = synth_uniform(30, 3, 6);
  const Geometry geo(pop);
  Rng rng(5);
  const auto D = cyclic_init(30, 12, std::nullopt, rng);
  const double base = expected_energy(D, geo).expected();

  auto cols = D.columns();
  std::reverse(cols.begin(), cols.end());
  CHECK(expected_energy(TacticalConfiguration(30, 12, cols), geo).expected() == doctest::Approx(base).epsilon(1e-14));

  // New unit i is old unit perm[i], both in D and in the population.
  std::vector<std::uint32_t> perm(30);
  std::iota(perm.begin(), perm.end(), 0u);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto P = permute_rows(D, perm);
  const auto relabeled = pop.subset(perm);
  const Geometry g2(relabeled);
  CHECK(expected_energy(P, g2).expected() == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("ledger patching") {
  EnergyLedger led({1.0, 2.0, 3.0});
  CHECK(led.total() == 6.0);
  CHECK(led.expected() == 2.0);
  led.patch(0, 0.5, 2, -1.0);
  CHECK(led[0] == 1.5);
  CHECK(led[2] == 2.0);
  CHECK(led.total() == 5.5);
  led.patch(1, 0.25, 2, 0.25, 0.5);
  CHECK(led.total() == 6.0);
}

TEST_CASE("swap delta matches recomputation") {
  const auto pop = synth_uniform(200, 3, 13);
  const Geometry geo(pop);
  Rng rng(14);
  auto D = init_by_lpm(geo, 20, rng);
  std::size_t checked = 0;
  while (checked < 2000) {
    const auto p = propose(D, rng);
    if (!p->admissible) {
      CHECK_THROWS_AS(delta_swap(D, p->a, p->b, p->u, p->v, geo), std::invalid_argument);
      continue;
    }
    const double ea = column_energy(D, p->a, geo);
    const double eb = column_energy(D, p->b, geo);
    const auto d = delta_swap(D, p->a, p->b, p->u, p->v, geo);
    const auto cd = column_deltas(D, p->a, p->b, p->u, p->v, geo, d);
    CHECK(d.terms <= 2 * (20 - 1));
    D.swap_units(p->a, p->b, p->u, p->v);
    const double da = column_energy(D, p->a, geo) - ea;
    const double db = column_energy(D, p->b, geo) - eb;
    CHECK(d.total == doctest::Approx(da + db).epsilon(1e-9).scale(1e-3));
    CHECK(cd.delta_a == doctest::Approx(da).epsilon(1e-9).scale(1e-3));
    CHECK(cd.delta_b == doctest::Approx(db).epsilon(1e-9).scale(1e-3));
    ++checked;
  }
}

TEST_CASE("swap delta edge cases") {
  // Units 0 and 1 share a position, so trading them changes nothing.
  const Population pop(1, {0.5, 0.5, 0.1, 0.9});
  const Geometry geo(pop);
  const TacticalConfiguration D(4, 2, {{0, 2}, {1, 3}});
  const auto d = delta_swap(D, 0, 1, 0, 1, geo);
  CHECK(d.total == 0.0);

  // Columns that differ only in u and v: nothing else contributes.
  const auto line = oracle::line({0.0, 1.0, 3.0, 6.0});
  const Geometry g(line);
  TacticalConfiguration E(4, 3, {{0, 1, 2}, {1, 2, 3}, {0, 2, 3}, {0, 1, 3}});
  const double before = expected_energy(E, g).total();
  const auto e = delta_swap(E, 0, 1, 0, 3, g);
  CHECK(e.terms == 0);
  E.swap_units(0, 1, 0, 3);
  CHECK(e.total == doctest::Approx(expected_energy(E, g).total() - before).epsilon(1e-12));
}

}
