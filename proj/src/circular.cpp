#include "dbdtc/circular.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dbdtc {

std::vector<Sample> circular_windows(std::span<const std::uint32_t> order, std::size_t n) {
  const std::size_t N = order.size();
  if (n == 0 || n > N) throw std::invalid_argument("circular windows require 1 <= n <= N");
  std::vector<Sample> windows(N);
  for (std::size_t k = 0; k < N; ++k) {
    Sample& w = windows[k];
    w.reserve(n);
    for (std::size_t t = 0; t < n; ++t) w.push_back(order[(k + t) % N]);
    std::sort(w.begin(), w.end());
  }
  return windows;
}

std::vector<std::uint32_t> random_order(std::size_t N, Rng& rng) {
  std::vector<std::uint32_t> order(N);
  std::iota(order.begin(), order.end(), 0U);
  for (std::size_t i = N; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  return order;
}

CircularAnnealer::CircularAnnealer(std::vector<std::uint32_t> order, std::size_t n, const Geometry& geo,
                                   AnnealSchedule schedule, std::uint64_t seed)
    : order_(std::move(order)), n_(n), geo_(&geo), schedule_(schedule), rng_(make_stream(seed, "circular")),
      recorder_(schedule.iterations) {
  schedule_.check();
  const std::size_t N = order_.size();
  if (N != geo.size()) throw std::invalid_argument("ordering must cover every unit of the geometry");
  if (n == 0 || n > N) throw std::invalid_argument("circular design requires 1 <= n <= N");
  std::vector<bool> seen(N, false);
  for (std::uint32_t u : order_) {
    if (u >= N || seen[u]) throw std::invalid_argument("circular ordering is not a permutation");
    seen[u] = true;
  }
  recompute_windows();
  best_energy_ = expected_energy();
  initial_energy_ = best_energy_;
  temperature_ = schedule_.initial_temperature;
  recorder_.offer(point());
}

void CircularAnnealer::recompute_windows() {
  const std::size_t N = order_.size();
  const auto phi = geo_->phi();
  phi_sum_.assign(N, 0.0);
  pair_sum_.assign(N, 0.0);
  total_ = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    double ps = 0.0;
    double pair = 0.0;
    for (std::size_t s = 0; s < n_; ++s) {
      const std::uint32_t i = order_[(k + s) % N];
      ps += phi[i];
      for (std::size_t t = s + 1; t < n_; ++t) pair += geo_->distance(i, order_[(k + t) % N]);
    }
    phi_sum_[k] = ps;
    pair_sum_[k] = 2.0 * pair;
    total_ += window_energy(k);
  }
}

double CircularAnnealer::window_energy(std::size_t k) const {
  const double n = static_cast<double>(n_);
  return 2.0 * phi_sum_[k] / n - geo_->mean_phi() - pair_sum_[k] / (n * n);
}

std::vector<double> CircularAnnealer::window_energies() const {
  std::vector<double> out(order_.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = window_energy(k);
  return out;
}

TrajectoryPoint CircularAnnealer::point() const {
  return {counters_.iterations, expected_energy(), best_energy_, temperature_};
}

std::optional<CircularAnnealer::Move> CircularAnnealer::propose() {
  const std::size_t N = order_.size();
  if (N < 2) return std::nullopt;
  const std::size_t p = uniform_index(rng_, N);
  std::size_t q = uniform_index(rng_, N - 1);
  if (q >= p) ++q;
  return Move{p, q};
}

void CircularAnnealer::collect_changes(const Move& move) const {
  changes_.clear();
  const std::size_t N = order_.size();
  if (n_ == N || move.p == move.q) return;
  const auto phi = geo_->phi();
  const std::uint32_t u = order_[move.p];
  const std::uint32_t w = order_[move.q];
  const std::size_t span = 2 * n_ - 1;
  prefix_.resize(span + 1);

  // Windows containing `base` start at base-n+1 .. base. With f(j) =
  // d(w, unit at j) - d(u, unit at j), a window holding p but not q changes
  // its ordered pair sum by 2 * (sum_W f - f(p)); one holding q but not p by
  // -2 * (sum_W f - f(q)).
  for (const std::size_t base : {move.p, move.q}) {
    const std::size_t other = base == move.p ? move.q : move.p;
    const double sign = base == move.p ? 1.0 : -1.0;
    const std::size_t first = (base + N - (n_ - 1) % N) % N;
    prefix_[0] = 0.0;
    for (std::size_t t = 0; t < span; ++t) {
      const std::uint32_t j = order_[(first + t) % N];
      prefix_[t + 1] = prefix_[t] + geo_->distance(w, j) - geo_->distance(u, j);
    }
    const double f_base = prefix_[n_] - prefix_[n_ - 1];
    for (std::size_t j = 0; j < n_; ++j) {
      const std::size_t start = (first + j) % N;
      if ((other + N - start) % N < n_) continue;  // holds both positions: unchanged
      const double window_f = prefix_[j + n_] - prefix_[j];
      changes_.push_back({start, sign * (phi[w] - phi[u]), sign * 2.0 * (window_f - f_base)});
    }
  }
}

double CircularAnnealer::move_delta(const Move& move) const {
  collect_changes(move);
  const double n = static_cast<double>(n_);
  double delta = 0.0;
  for (const auto& c : changes_) delta += 2.0 * c.phi / n - c.pair / (n * n);
  return delta;
}

StepOutcome CircularAnnealer::step(const Move& move) {
  ++counters_.iterations;
  ++counters_.proposed;
  ++counters_.admissible;
  const double N = static_cast<double>(order_.size());
  const double delta = move_delta(move);
  const double before = expected_energy();
  const double after = (total_ + delta) / N;
  auto apply = [&] {
    for (const auto& c : changes_) {
      phi_sum_[c.window] += c.phi;
      pair_sum_[c.window] += c.pair;
    }
    std::swap(order_[move.p], order_[move.q]);
    total_ += delta;
    ++counters_.accepted;
  };
  StepOutcome outcome;
  bool rejected = false;
  if (!(after < best_energy_)) {
    const double diff = after - before;
    if (schedule_.metropolis) {
      rejected = diff > 0.0 && uniform01(rng_) >= std::exp(-diff / temperature_);
    } else {
      rejected = diff >= 0.0 && uniform01(rng_) >= std::exp(-diff / temperature_);
    }
  }
  if (after < best_energy_) {
    apply();
    best_is_current_ = true;
    best_energy_ = expected_energy();
    ++counters_.new_best;
    outcome = StepOutcome::new_best;
  } else if (rejected) {
    outcome = StepOutcome::rejected;
  } else {
    if (best_is_current_) {
      best_order_ = order_;
      best_is_current_ = false;
    }
    apply();
    outcome = StepOutcome::kept;
  }
  if (outcome != StepOutcome::rejected && ++accepted_since_resync_ >= Annealer::kRecomputeEvery) resync();
  temperature_ *= schedule_.cooling_rate;
  recorder_.offer(point());
  return outcome;
}

void CircularAnnealer::resync() {
  const double incremental = total_;
  recompute_windows();
  const double scale = std::max(std::abs(total_), 1e-9);
  if (std::abs(total_ - incremental) > Annealer::kDriftTolerance * scale) {
    throw std::runtime_error("circular energy drifted beyond tolerance: incremental " + std::to_string(incremental) +
                             " vs recomputed " + std::to_string(total_));
  }
  ++counters_.recomputes;
  accepted_since_resync_ = 0;
  if (expected_energy() < best_energy_) {
    best_energy_ = expected_energy();
    best_is_current_ = true;
  }
}

void CircularAnnealer::run() {
  while (counters_.iterations < schedule_.iterations) {
    const auto move = propose();
    if (move) {
      step(*move);
    } else {
      ++counters_.iterations;
      temperature_ *= schedule_.cooling_rate;
      recorder_.offer(point());
    }
  }
  recorder_.finish(point());
}

AnnealSchedule default_circular_schedule(std::span<const std::uint32_t> order, std::size_t n, const Geometry& geo,
                                         std::uint64_t iterations, Rng& rng) {
  constexpr std::size_t kProbes = 1000;
  const CircularAnnealer probe({order.begin(), order.end()}, n, geo, AnnealSchedule{}, 0);
  const std::size_t N = order.size();
  std::vector<double> changes;
  if (N >= 2) {
    changes.reserve(kProbes);
    for (std::size_t t = 0; t < kProbes; ++t) {
      const std::size_t p = uniform_index(rng, N);
      std::size_t q = uniform_index(rng, N - 1);
      if (q >= p) ++q;
      changes.push_back(std::abs(probe.move_delta({p, q})) / static_cast<double>(N));
    }
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

CircularResult circular_anneal(const Geometry& geo, std::size_t n, const AnnealSchedule& schedule, std::uint64_t seed,
                               std::optional<std::vector<std::uint32_t>> initial) {
  std::vector<std::uint32_t> order;
  if (initial) {
    order = std::move(*initial);
  } else {
    Rng rng = make_stream(seed, "circular-init");
    order = random_order(geo.size(), rng);
  }
  CircularAnnealer annealer(std::move(order), n, geo, schedule, seed);
  annealer.run();
  return {annealer.best_order(), annealer.initial_energy(), annealer.best_energy(), annealer.schedule(),
          annealer.counters(), annealer.trajectory()};
}

}  // namespace dbdtc
