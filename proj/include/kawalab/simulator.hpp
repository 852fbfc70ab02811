#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include "kawalab/configuration.hpp"
#include "kawalab/errors.hpp"
#include "kawalab/model.hpp"
#include "kawalab/rates.hpp"
#include "kawalab/rng.hpp"

namespace kawalab {

template <std::size_t D>
struct JumpEvent {
  double t = 0.0;
  std::uint32_t mover = 0;
  Point<D> from{};
  Point<D> to{};
};

// One trajectory: accepted jumps plus the configuration at the query times
// (right-continuous convention: the state at t includes every jump at <= t).
template <std::size_t D>
struct PathSample {
  std::vector<JumpEvent<D>> events;
  std::vector<std::pair<double, Configuration<D>>> snapshots;
  std::uint64_t seed = 0;
  std::uint64_t params_digest = 0;
  std::uint64_t proposals = 0;  // includes rejected (fictitious) clock rings

  std::uint64_t digest() const {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    auto mix = [&h](std::uint64_t v) {
      for (int b = 0; b < 8; ++b) {
        h ^= (v >> (8 * b)) & 0xffu;
        h *= 1099511628211ull;
      }
    };
    auto mixd = [&](double x) { mix(std::bit_cast<std::uint64_t>(x)); };
    mix(seed);
    mix(events.size());
    for (const auto& e : events) {
      mixd(e.t);
      mix(e.mover);
      for (std::size_t k = 0; k < D; ++k) {
        mixd(e.from[k]);
        mixd(e.to[k]);
      }
    }
    for (const auto& [t, cfg] : snapshots) {
      mixd(t);
      mix(cfg.size());
      for (const auto& p : cfg.points())
        for (std::size_t k = 0; k < D; ++k) mixd(p[k]);
    }
    return h;
  }
};

// Exact-law thinning: every particle's landing rate is dominated by
// psi_alpha(x) * a * exp(-repulsion) <= kernel density, so proposals ring at
// the constant total rate |gamma|; a ring picks a uniform particle, draws a
// kernel displacement, and accepts with the true-to-dominating ratio.
// Rejected rings leave the state unchanged and are counted, not recorded.
template <std::size_t D>
PathSample<D> simulate_with_rng(Configuration<D> gamma, double t_max,
                                const ModelParams<D>& params, Rng& rng,
                                std::vector<double> query_times,
                                std::uint64_t seed_label = 0) {
  require(t_max > 0.0, "simulate: t_max must be positive");
  std::sort(query_times.begin(), query_times.end());
  for (double q : query_times)
    require(q >= 0.0 && q <= t_max, "simulate: query times must lie in [0, t_max]");

  PathSample<D> path;
  path.seed = seed_label;
  path.params_digest = params.digest();
  const std::size_t n = gamma.size();
  std::size_t qi = 0;
  auto flush_before = [&](double t) {
    while (qi < query_times.size() && query_times[qi] < t) {
      path.snapshots.emplace_back(query_times[qi], gamma);
      ++qi;
    }
  };

  if (n > 0) {
    const double total_rate = static_cast<double>(n);
    double t = 0.0;
    for (;;) {
      t += sample_exponential(rng, total_rate);
      if (t > t_max) break;
      flush_before(t);
      ++path.proposals;
      const auto mover =
          std::min(n - 1, static_cast<std::size_t>(rng.next_double() * n));
      const Point<D> x = gamma[mover];
      const Point<D> y =
          params.domain.place(x + params.kernel.sample_displacement(rng));
      const double p_acc = params.psi_alpha_tempered(x) *
                           std::exp(-repulsion_exponent(gamma, mover, y, params));
      check_internal(std::isfinite(p_acc) && p_acc >= 0.0 && p_acc <= 1.0 + 1e-12,
                     "simulate: acceptance probability out of range");
      if (rng.next_double() < p_acc) {
        gamma.move_point(mover, y);
        path.events.push_back({t, static_cast<std::uint32_t>(mover), x, y});
      }
    }
  }
  flush_before(t_max + 1.0);  // remaining queries see the final state
  return path;
}

template <std::size_t D>
PathSample<D> simulate(const Configuration<D>& gamma0, double t_max,
                       const ModelParams<D>& params, std::uint64_t seed,
                       const std::vector<double>& query_times) {
  Rng rng(seed);
  return simulate_with_rng(gamma0, t_max, params, rng, query_times, seed);
}

// Initial law of a replica: a fixed configuration or a Poisson window draw.
template <std::size_t D>
struct InitialCondition {
  std::optional<Configuration<D>> fixed;
  double kappa = 0.0;
  Box<D> window{};

  static InitialCondition from_config(Configuration<D> g) {
    InitialCondition ic;
    ic.fixed = std::move(g);
    return ic;
  }
  static InitialCondition poisson(double kappa, Box<D> window) {
    InitialCondition ic;
    ic.kappa = kappa;
    ic.window = window;
    return ic;
  }

  double expected_count() const {
    return fixed ? static_cast<double>(fixed->size())
                 : kappa * window.volume();
  }

  Configuration<D> draw(Rng& rng) const {
    if (fixed) return *fixed;
    return sample_poisson_window(kappa, window, rng);
  }
};

template <std::size_t D>
struct PathEnsemble {
  std::vector<PathSample<D>> replicas;
  std::vector<double> query_times;
  std::uint64_t base_seed = 0;

  std::uint64_t digest() const {
    std::uint64_t h = 14695981039346656037ull;
    for (const auto& r : replicas) {
      const std::uint64_t d = r.digest();
      h ^= d;
      h *= 1099511628211ull;
    }
    return h;
  }

  std::size_t snapshot_index(double t) const {
    for (std::size_t i = 0; i < query_times.size(); ++i)
      if (query_times[i] == t) return i;
    throw std::invalid_argument("ensemble: t is not a recorded query time");
  }
};

// Independent replicas with per-replica seeds derived from the base seed;
// deterministic end to end, whatever the thread count.
template <std::size_t D>
PathEnsemble<D> run_ensemble(const InitialCondition<D>& init,
                             std::size_t n_replicas, double t_max,
                             const ModelParams<D>& params,
                             std::uint64_t base_seed,
                             std::vector<double> query_times,
                             unsigned threads = 0) {
  require(n_replicas >= 1, "run_ensemble: need at least one replica");
  const double budget =
      static_cast<double>(n_replicas) * init.expected_count() * t_max;
  require(budget <= 1e7,
          "run_ensemble: estimated particle-event budget exceeds 1e7");
  std::sort(query_times.begin(), query_times.end());

  PathEnsemble<D> ens;
  ens.base_seed = base_seed;
  ens.query_times = query_times;
  ens.replicas.resize(n_replicas);

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, n_replicas);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const std::uint64_t seed = derive_seed(base_seed, r);
      Rng rng(seed);
      Configuration<D> gamma0 = init.draw(rng);
      ens.replicas[r] =
          simulate_with_rng(std::move(gamma0), t_max, params, rng, query_times, seed);
    }
  };
  if (threads <= 1) {
    work(0, n_replicas);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_replicas + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
      const std::size_t b = w * chunk;
      const std::size_t e = std::min<std::size_t>(b + chunk, n_replicas);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return ens;
}

}  // namespace kawalab
