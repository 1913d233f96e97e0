// Copyright 2026 The qwalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "qwalk/evolution.hpp"
#include "qwalk/moments.hpp"
#include "qwalk/rng.hpp"
#include "qwalk/types.hpp"
#include "qwalk/walk_state.hpp"

namespace qwalk {

/// Stream layout per trajectory index (part of the reproducibility
/// contract, echoed in report metadata): the engine is mt19937_64 seeded
/// with stream_seed(master, index); draw 0 selects the initial coin basis
/// state (u < cos^2 gamma -> up), draws 1..N select the branch signs
/// (u < q_plus -> +1).
inline constexpr const char* kRngContract =
    "engine=mt19937_64; stream_seed(master,i)=splitmix64(master+(i+1)*"
    "0x9E3779B97F4A7C15); uniform=(x>>11)*2^-53; draw0=coin(u<cos^2gamma->up);"
    " draws 1..N=signs(u<q_plus->+1)";

template <typename Scalar = double>
struct TrajectorySpec {
  std::int64_t n_traj = 0;
  std::uint64_t seed = 0;
  std::int64_t steps = 0;
  NoiseSpec<Scalar> noise;
  InitialCondition<Scalar> ic;
};

namespace detail {

template <typename Scalar>
struct TrajectoryDraws {
  int coin = 0;
  std::vector<int> signs;
};

template <typename Scalar>
TrajectoryDraws<Scalar> trajectory_draws(const TrajectorySpec<Scalar>& spec,
                                         std::int64_t index) {
  std::mt19937_64 eng(stream_seed(spec.seed, static_cast<std::uint64_t>(index)));
  TrajectoryDraws<Scalar> d;
  d.coin = uniform01<Scalar>(eng) < spec.ic.coin_up_weight() ? 0 : 1;
  d.signs.resize(spec.steps);
  for (std::int64_t t = 0; t < spec.steps; ++t) {
    d.signs[t] = uniform01<Scalar>(eng) < spec.noise.q_plus ? +1 : -1;
  }
  return d;
}

}  // namespace detail

/// The branch signs of one trajectory stream (layout draws 1..N).
template <typename Scalar>
std::vector<int> sample_signs(const TrajectorySpec<Scalar>& spec,
                              std::int64_t index) {
  return detail::trajectory_draws(spec, index).signs;
}

/// Evolves a pure state under a fixed sign sequence from coin basis state
/// `coin` at the origin.  This is the deterministic core shared by the
/// sampled and the exhaustive averages.
template <typename Scalar>
PureState<Scalar> trajectory_evolve(const std::vector<int>& signs, int coin,
                                    const TrajectorySpec<Scalar>& spec) {
  const std::int64_t n = static_cast<std::int64_t>(signs.size());
  PureState<Scalar> cur = init_pure<Scalar>(coin, spec.ic.origin, n);
  PureState<Scalar> next;
  next.window = cur.window;
  const Mat2<Scalar> u[2] = {reshuffling_matrix(spec.noise, +1),
                             reshuffling_matrix(spec.noise, -1)};
  const std::int64_t w = cur.window.size();
  for (std::int64_t t = 0; t < n; ++t) {
    detail::apply_branch_columns(next.amps, cur.amps,
                                 u[signs[t] == 1 ? 0 : 1], w);
    std::swap(cur.amps, next.amps);
  }
  return cur;
}

/// Evolves the trajectory with the given index: the initial coin basis
/// state and all branch signs are drawn from that trajectory's stream.
/// Sampling the coin from diag(cos^2 gamma, sin^2 gamma) purifies the mixed
/// initial condition exactly, so the trajectory average is unbiased.
template <typename Scalar>
PureState<Scalar> trajectory_evolve(const TrajectorySpec<Scalar>& spec,
                                    std::int64_t index) {
  const auto draws = detail::trajectory_draws(spec, index);
  return trajectory_evolve(draws.signs, draws.coin, spec);
}

template <typename Scalar = double>
struct MomentEstimate {
  Scalar estimate{};
  Scalar stderr_{};
  Scalar exact{std::numeric_limits<Scalar>::quiet_NaN()};
  bool has_exact = false;
};

template <typename Scalar = double>
struct TrajectoryEnsembleReport {
  TrajectorySpec<Scalar> spec;
  std::array<MomentEstimate<Scalar>, 3> moments;  // orders 0, 1, 2
  LatticeWindow window;
  RealArray<Scalar> distribution;            // ensemble-averaged P(k)
  RealArray<Scalar> reference;               // exact P(k) when available
  bool has_reference = false;
  Scalar tv_distance{std::numeric_limits<Scalar>::quiet_NaN()};
  Scalar max_abs_deviation{std::numeric_limits<Scalar>::quiet_NaN()};
  std::string rng_contract{kRngContract};
  bool parallel = false;
  int threads = 1;
};

struct EnsembleOptions {
  bool parallel = false;  // chunked reduction, merged in chunk order
  int threads = 0;        // 0: hardware concurrency
};

namespace detail {

template <typename Scalar>
struct EnsembleAccumulator {
  RealArray<Scalar> dist;
  Scalar sum[3] = {};
  Scalar sumsq[3] = {};

  explicit EnsembleAccumulator(std::int64_t w)
      : dist(RealArray<Scalar>::Zero(w)) {}

  void merge(const EnsembleAccumulator& other) {
    dist += other.dist;
    for (int p = 0; p < 3; ++p) {
      sum[p] += other.sum[p];
      sumsq[p] += other.sumsq[p];
    }
  }
};

template <typename Scalar>
void accumulate_range(const TrajectorySpec<Scalar>& spec, std::int64_t lo,
                      std::int64_t hi, EnsembleAccumulator<Scalar>& acc) {
  const std::int64_t w = 2 * spec.steps + 1;
  RealArray<Scalar> prob(w);
  for (std::int64_t i = lo; i < hi; ++i) {
    const PureState<Scalar> psi = trajectory_evolve(spec, i);
    prob = psi.up().cwiseAbs2().array() + psi.down().cwiseAbs2().array();
    acc.dist += prob;
    Scalar m[3] = {};
    for (std::int64_t j = 0; j < w; ++j) {
      const Scalar k = static_cast<Scalar>(psi.window.site_of(j));
      m[0] += prob[j];
      m[1] += prob[j] * k;
      m[2] += prob[j] * k * k;
    }
    for (int p = 0; p < 3; ++p) {
      acc.sum[p] += m[p];
      acc.sumsq[p] += m[p] * m[p];
    }
  }
}

}  // namespace detail

/// Averages n_traj >= 100 sampled trajectories.  The default reduction is
/// sequential in trajectory order, which makes the whole report
/// bit-reproducible from (master seed, n_traj, config).  The parallel mode
/// splits the index range into per-thread chunks merged in chunk order; it
/// is deterministic for a fixed thread count but reorders floating-point
/// sums, so it is only guaranteed to match the sequential result to ~1e-9.
template <typename Scalar>
TrajectoryEnsembleReport<Scalar> ensemble_average(
    const TrajectorySpec<Scalar>& spec, const EnsembleOptions& opts = {}) {
  if (spec.n_traj < 100) {
    throw Error("ensemble_average: need at least 100 trajectories");
  }
  if (spec.steps < 1) {
    throw Error("ensemble_average: need at least one step");
  }
  const std::int64_t w = 2 * spec.steps + 1;
  detail::EnsembleAccumulator<Scalar> acc(w);
  int threads = 1;
  if (opts.parallel) {
    threads = opts.threads > 0
                  ? opts.threads
                  : static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
  }
  if (threads == 1) {
    detail::accumulate_range(spec, 0, spec.n_traj, acc);
  } else {
    const std::int64_t chunk = (spec.n_traj + threads - 1) / threads;
    std::vector<std::future<detail::EnsembleAccumulator<Scalar>>> futs;
    for (int t = 0; t < threads; ++t) {
      const std::int64_t lo = t * chunk;
      const std::int64_t hi = std::min<std::int64_t>(lo + chunk, spec.n_traj);
      if (lo >= hi) break;
      futs.push_back(std::async(std::launch::async, [&spec, lo, hi, w] {
        detail::EnsembleAccumulator<Scalar> local(w);
        detail::accumulate_range(spec, lo, hi, local);
        return local;
      }));
    }
    for (auto& f : futs) acc.merge(f.get());
  }

  TrajectoryEnsembleReport<Scalar> rep;
  rep.spec = spec;
  rep.window = LatticeWindow{spec.ic.origin, spec.steps};
  rep.parallel = threads > 1;
  rep.threads = threads;
  const Scalar m = static_cast<Scalar>(spec.n_traj);
  rep.distribution = acc.dist / m;
  for (int p = 0; p < 3; ++p) {
    const Scalar mean = acc.sum[p] / m;
    Scalar var = (acc.sumsq[p] - m * mean * mean) / (m - Scalar(1));
    if (var < Scalar(0)) var = Scalar(0);
    rep.moments[p].estimate = mean;
    rep.moments[p].stderr_ = std::sqrt(var / m);
  }

  // Exact references: the diagonal fast path (and closed forms) cover the
  // unbiased walk; for biased weights fall back to the dense oracle when
  // the window allows it.
  if (spec.noise.unbiased()) {
    const auto exact =
        evolve_diagonal<Scalar>(spec.ic, spec.noise, spec.steps);
    rep.reference = position_distribution(exact);
    rep.has_reference = true;
    rep.moments[0].exact = Scalar(1);
    rep.moments[1].exact =
        closed_form_first(spec.steps, spec.noise, spec.ic.gamma).s;
    rep.moments[2].exact =
        closed_form_second(spec.steps, spec.noise, spec.ic.gamma).s;
    for (auto& mm : rep.moments) mm.has_exact = true;
  } else if (spec.steps <= kDefaultDenseHalfwidthCap) {
    const auto exact = evolve_dense<Scalar>(spec.ic, spec.noise, spec.steps);
    rep.reference = position_distribution(exact);
    rep.has_reference = true;
    for (int p = 0; p < 3; ++p) {
      Scalar v{};
      for (std::int64_t j = 0; j < w; ++j) {
        const Scalar k = static_cast<Scalar>(rep.window.site_of(j));
        v += rep.reference[j] * std::pow(k, Scalar(p));
      }
      rep.moments[p].exact = v;
      rep.moments[p].has_exact = true;
    }
  }
  if (rep.has_reference) {
    rep.tv_distance = (rep.distribution - rep.reference).abs().sum() / 2;
    rep.max_abs_deviation = (rep.distribution - rep.reference).abs().maxCoeff();
  }
  return rep;
}

/// Exact average over all 2^N sign sequences and both initial coin basis
/// states, weighted by q_s products and the coin weights.  Feasible for
/// N <= 12; equals the noise-averaged evolution without sampling error.
template <typename Scalar>
DiagonalWalkState<Scalar> exhaustive_average(const TrajectorySpec<Scalar>& spec) {
  const std::int64_t n = spec.steps;
  if (n < 0 || n > 12) {
    throw Error("exhaustive_average: feasible for 0 <= steps <= 12 only");
  }
  DiagonalWalkState<Scalar> out;
  out.window = LatticeWindow{spec.ic.origin, n};
  out.alpha = RealArray<Scalar>::Zero(out.window.size());
  out.beta = RealArray<Scalar>::Zero(out.window.size());
  out.step = n;
  const Scalar coin_weight[2] = {spec.ic.coin_up_weight(),
                                 spec.ic.coin_down_weight()};
  std::vector<int> signs(n);
  const std::uint64_t n_seq = std::uint64_t(1) << n;
  for (int coin = 0; coin < 2; ++coin) {
    if (coin_weight[coin] == Scalar(0)) continue;
    for (std::uint64_t bits = 0; bits < n_seq; ++bits) {
      Scalar weight = coin_weight[coin];
      for (std::int64_t t = 0; t < n; ++t) {
        const bool plus = (bits >> t) & 1u;
        signs[t] = plus ? +1 : -1;
        weight *= plus ? spec.noise.q_plus : spec.noise.q_minus();
      }
      if (weight == Scalar(0)) continue;
      const PureState<Scalar> psi = trajectory_evolve(signs, coin, spec);
      out.alpha += weight * psi.up().cwiseAbs2().array();
      out.beta += weight * psi.down().cwiseAbs2().array();
    }
  }
  return out;
}

}  // namespace qwalk
