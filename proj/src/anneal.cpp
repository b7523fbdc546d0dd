#include "dbdtc/anneal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace dbdtc {

void AnnealSchedule::check() const {
  if (!(initial_temperature > 0.0) || !std::isfinite(initial_temperature)) {
    throw std::invalid_argument("initial temperature must be positive");
  }
  if (!(cooling_rate > 0.0 && cooling_rate <= 1.0)) throw std::invalid_argument("cooling rate must lie in (0, 1]");
}

double default_cooling_rate(std::uint64_t iterations) {
  if (iterations == 0) return 1.0;
  return std::pow(1e-8, 1.0 / static_cast<double>(iterations));
}

AnnealSchedule default_schedule(const TacticalConfiguration& D, const Geometry& geo, std::uint64_t iterations,
                                Rng& rng) {
  constexpr std::size_t kProbes = 1000;
  constexpr std::size_t kMaxAttempts = 100 * kProbes;
  std::vector<double> changes;
  changes.reserve(kProbes);
  const double M = static_cast<double>(D.size());
  for (std::size_t attempt = 0; attempt < kMaxAttempts && changes.size() < kProbes; ++attempt) {
    const auto p = propose(D, rng);
    if (!p) break;
    if (!p->admissible) continue;
    changes.push_back(std::abs(delta_swap(D, p->a, p->b, p->u, p->v, geo).total) / M);
  }
  double t0 = 0.0;
  if (!changes.empty()) {
    auto mid = changes.begin() + static_cast<std::ptrdiff_t>(changes.size() / 2);
    std::nth_element(changes.begin(), mid, changes.end());
    t0 = *mid / std::log(2.0);
  }
  if (!(t0 > 0.0)) t0 = 1e-12;
  AnnealSchedule s;
  s.iterations = iterations;
  s.initial_temperature = t0;
  s.cooling_rate = default_cooling_rate(iterations);
  return s;
}

Proposal propose_pair(const TacticalConfiguration& D, std::size_t a, std::size_t b, Rng& rng) {
  Proposal p;
  p.a = a;
  p.b = b;
  const std::size_t n = D.sample_size();
  p.u = D.column(a)[uniform_index(rng, n)];
  p.v = D.column(b)[uniform_index(rng, n)];
  p.admissible = a != b && !D.contains(p.u, b) && !D.contains(p.v, a);
  return p;
}

std::optional<Proposal> propose(const TacticalConfiguration& D, Rng& rng) {
  const std::size_t M = D.size();
  if (M < 2) return std::nullopt;
  const std::size_t a = uniform_index(rng, M);
  std::size_t b = uniform_index(rng, M - 1);
  if (b >= a) ++b;
  return propose_pair(D, a, b, rng);
}

TrajectoryRecorder::TrajectoryRecorder(std::uint64_t iterations, std::size_t limit) {
  if (limit < 3) throw std::invalid_argument("trajectory limit must be at least 3");
  stride_ = std::max<std::uint64_t>(1, (iterations + limit - 3) / (limit - 2));
  points_.reserve(std::min<std::uint64_t>(limit, iterations + 1));
}

void TrajectoryRecorder::offer(const TrajectoryPoint& point) {
  if (points_.empty() || point.iteration >= points_.back().iteration + stride_) points_.push_back(point);
}

void TrajectoryRecorder::finish(const TrajectoryPoint& point) {
  if (points_.empty() || points_.back().iteration != point.iteration) points_.push_back(point);
}

Annealer::Annealer(TacticalConfiguration initial, const Geometry& geo, AnnealSchedule schedule, std::uint64_t seed)
    : current_(std::move(initial)), geo_(&geo), schedule_(schedule), rng_(make_stream(seed, "anneal")),
      recorder_(schedule.iterations) {
  schedule_.check();
  if (geo.size() != current_.population_size()) throw std::invalid_argument("geometry does not match configuration");
  ledger_ = dbdtc::expected_energy(current_, geo);
  best_energy_ = ledger_.expected();
  initial_energy_ = best_energy_;
  temperature_ = schedule_.initial_temperature;
  recorder_.offer(point());
}

TrajectoryPoint Annealer::point() const {
  return {counters_.iterations, ledger_.expected(), best_energy_, temperature_};
}

bool Annealer::reject(double delta_expected, Rng& rng) const {
  if (schedule_.metropolis) {
    if (delta_expected <= 0.0) return false;
    return uniform01(rng) >= std::exp(-delta_expected / temperature_);
  }
  return delta_expected >= 0.0 && uniform01(rng) >= std::exp(-delta_expected / temperature_);
}

void Annealer::snapshot_best_if_current() {
  if (best_is_current_) {
    best_ = current_;
    best_is_current_ = false;
  }
}

void Annealer::apply(const Proposal& p, const SwapDelta& delta) {
  const ColumnDeltas cd = column_deltas(current_, p.a, p.b, p.u, p.v, *geo_, delta);
  current_.swap_units(p.a, p.b, p.u, p.v);
  ledger_.patch(p.a, cd.delta_a, p.b, cd.delta_b, delta.total);
  ++counters_.accepted;
}

void Annealer::after_accept() {
  if (++accepted_since_resync_ >= kRecomputeEvery) resync();
}

void Annealer::resync() {
  EnergyLedger fresh = dbdtc::expected_energy(current_, *geo_);
  const double scale = std::max(std::abs(fresh.total()), 1e-9);
  if (std::abs(fresh.total() - ledger_.total()) > kDriftTolerance * scale) {
    throw std::runtime_error("energy ledger drifted beyond tolerance: incremental " +
                             std::to_string(ledger_.total()) + " vs recomputed " + std::to_string(fresh.total()));
  }
  ledger_ = std::move(fresh);
  ++counters_.recomputes;
  accepted_since_resync_ = 0;
  if (ledger_.expected() < best_energy_) {
    best_energy_ = ledger_.expected();
    best_is_current_ = true;
    best_.reset();
  }
}

StepOutcome Annealer::step(const Proposal& proposal, Rng& rng) {
  ++counters_.iterations;
  ++counters_.proposed;
  StepOutcome outcome = StepOutcome::inadmissible;
  if (proposal.admissible) {
    ++counters_.admissible;
    const SwapDelta delta = delta_swap(current_, proposal.a, proposal.b, proposal.u, proposal.v, *geo_);
    counters_.max_delta_terms = std::max(counters_.max_delta_terms, delta.terms);
    const double M = static_cast<double>(current_.size());
    const double before = ledger_.expected();
    const double after = (ledger_.total() + delta.total) / M;
    if (after < best_energy_) {
      apply(proposal, delta);
      best_is_current_ = true;
      best_.reset();
      best_energy_ = ledger_.expected();
      ++counters_.new_best;
      outcome = StepOutcome::new_best;
      after_accept();
    } else if (reject(after - before, rng)) {
      outcome = StepOutcome::rejected;
    } else {
      snapshot_best_if_current();
      apply(proposal, delta);
      outcome = StepOutcome::kept;
      after_accept();
    }
  }
  temperature_ *= schedule_.cooling_rate;
  recorder_.offer(point());
  return outcome;
}

void Annealer::parallel_sweep(std::size_t workers, std::size_t threads) {
  const std::size_t M = current_.size();
  if (M < 4) throw std::invalid_argument("parallel sweeps need at least 4 columns");
  if (workers == 0 || workers > M / 2) {
    throw std::invalid_argument("worker count must lie in [1, floor(M/2)] = [1, " + std::to_string(M / 2) + "]");
  }
  std::vector<std::size_t> order(M);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng_);

  struct PairWork {
    Proposal proposal;
    SwapDelta delta;
    std::uint64_t seed = 0;
    StepOutcome outcome = StepOutcome::inadmissible;
  };
  std::vector<PairWork> work(workers);
  for (auto& w : work) w.seed = rng_();

  const double total = ledger_.total();
  const double before = ledger_.expected();
  const double best = best_energy_;
  auto evaluate = [&](std::size_t k) {
    PairWork& w = work[k];
    Rng rng(w.seed);
    w.proposal = propose_pair(current_, order[2 * k], order[2 * k + 1], rng);
    if (!w.proposal.admissible) return;
    w.delta = delta_swap(current_, w.proposal.a, w.proposal.b, w.proposal.u, w.proposal.v, *geo_);
    const double after = (total + w.delta.total) / static_cast<double>(M);
    if (after < best) {
      w.outcome = StepOutcome::new_best;
    } else if (reject(after - before, rng)) {
      w.outcome = StepOutcome::rejected;
    } else {
      w.outcome = StepOutcome::kept;
    }
  };

  threads = std::clamp<std::size_t>(threads, 1, workers);
  if (threads == 1) {
    for (std::size_t k = 0; k < workers; ++k) evaluate(k);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t k = t; k < workers; k += threads) evaluate(k);
      });
    }
    for (auto& th : pool) th.join();
  }

  last_sweep_.clear();
  bool any_kept = false;
  for (const auto& w : work) {
    any_kept = any_kept || w.outcome == StepOutcome::new_best || w.outcome == StepOutcome::kept;
  }
  if (any_kept) snapshot_best_if_current();
  for (const auto& w : work) {
    ++counters_.iterations;
    ++counters_.proposed;
    if (w.proposal.admissible) {
      ++counters_.admissible;
      counters_.max_delta_terms = std::max(counters_.max_delta_terms, w.delta.terms);
    }
    if (w.outcome == StepOutcome::new_best || w.outcome == StepOutcome::kept) {
      apply(w.proposal, w.delta);
      after_accept();
    }
    last_sweep_.push_back({w.proposal, w.seed, w.outcome});
  }
  if (ledger_.expected() < best_energy_) {
    best_energy_ = ledger_.expected();
    best_is_current_ = true;
    best_.reset();
    ++counters_.new_best;
  }
  temperature_ *= std::pow(schedule_.cooling_rate, static_cast<double>(workers));
  recorder_.offer(point());
}

void Annealer::run(std::size_t workers, std::size_t threads) {
  const std::uint64_t target = schedule_.iterations;
  const std::size_t max_workers = current_.size() / 2;
  const bool parallel = workers > 1 && current_.size() >= 4;
  while (counters_.iterations < target) {
    if (parallel) {
      const auto w = static_cast<std::size_t>(
          std::min<std::uint64_t>({workers, max_workers, target - counters_.iterations}));
      parallel_sweep(w, threads);
      continue;
    }
    const auto p = propose();
    if (p) {
      step(*p);
    } else {
      ++counters_.iterations;
      temperature_ *= schedule_.cooling_rate;
      recorder_.offer(point());
    }
  }
  recorder_.finish(point());
}

AnnealResult anneal(TacticalConfiguration initial, const Geometry& geo, const AnnealSchedule& schedule,
                    std::uint64_t seed, std::size_t workers, std::size_t threads) {
  Annealer annealer(std::move(initial), geo, schedule, seed);
  annealer.run(workers, threads);
  return {annealer.best(), annealer.initial_energy(), annealer.best_energy(), annealer.schedule(),
          annealer.counters(), annealer.trajectory()};
}

}  // namespace dbdtc
