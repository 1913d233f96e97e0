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

#include <cmath>
#include <cstdint>

#include "qwalk/types.hpp"

namespace qwalk {

/// Tiny negative probabilities below this magnitude are treated as rounding
/// noise and clamped in reports; anything more negative is a logic error.
inline constexpr double kNegativityTol = 1e-14;

inline constexpr std::int64_t kDefaultDiagonalHalfwidthCap = 1 << 22;
inline constexpr std::int64_t kDefaultDenseHalfwidthCap = 64;

/// Contiguous block of lattice sites [center - halfwidth, center + halfwidth].
struct LatticeWindow {
  std::int64_t center = 0;
  std::int64_t halfwidth = 0;

  std::int64_t size() const { return 2 * halfwidth + 1; }
  std::int64_t first_site() const { return center - halfwidth; }
  std::int64_t last_site() const { return center + halfwidth; }
  bool contains(std::int64_t k) const {
    return k >= first_site() && k <= last_site();
  }
  std::int64_t index_of(std::int64_t k) const { return k - first_site(); }
  std::int64_t site_of(std::int64_t index) const {
    return first_site() + index;
  }
  friend bool operator==(const LatticeWindow&, const LatticeWindow&) = default;
};

/// Product initial state: coin density diag(cos^2 gamma, sin^2 gamma) at a
/// single walker site.  The down weight is stored as the exact complement of
/// the up weight so the coin trace is 1 by construction.
template <typename Scalar = double>
struct InitialCondition {
  Scalar gamma{};              // coin mixing angle, [0, pi)
  std::int64_t origin = 0;

  Scalar coin_up_weight() const {
    const Scalar c = std::cos(gamma);
    return c * c;
  }
  Scalar coin_down_weight() const { return Scalar(1) - coin_up_weight(); }
};

/// Coin-and-site diagonal of a density operator: alpha[k] is the weight on
/// (coin up, site k) and beta[k] on (coin down, site k).  This family is
/// closed under the unbiased noise-averaged step, which is what makes the
/// O(window) fast path possible.
template <typename Scalar = double>
struct DiagonalWalkState {
  LatticeWindow window;
  RealArray<Scalar> alpha;
  RealArray<Scalar> beta;
  std::int64_t step = 0;

  Scalar total_mass() const {
    return detail::kahan_sum(alpha) + detail::kahan_sum(beta);
  }
};

/// Pure coin-walker vector on a window; coin-major, site-minor layout
/// (index = coin * window.size() + site_index).
template <typename Scalar = double>
struct PureState {
  LatticeWindow window;
  CVector<Scalar> amps;

  Scalar norm() const { return amps.norm(); }
  auto up() { return amps.head(window.size()); }
  auto down() { return amps.tail(window.size()); }
  auto up() const { return amps.head(window.size()); }
  auto down() const { return amps.tail(window.size()); }
};

/// Dense coin-walker density operator on a window, same coin-major layout:
/// the matrix is a 2x2 grid of site blocks.
template <typename Scalar = double>
struct CoinWalkerDensity {
  LatticeWindow window;
  CMatrix<Scalar> rho;
  std::int64_t step = 0;

  std::int64_t sites() const { return window.size(); }
  std::int64_t dim() const { return 2 * window.size(); }
  std::int64_t flat(int coin, std::int64_t site_index) const {
    return coin * window.size() + site_index;
  }
  Scalar trace_real() const { return rho.trace().real(); }
};

/// Hermiticity / trace / positivity diagnostics of a dense density.
template <typename Scalar = double>
struct DensityResiduals {
  Scalar hermiticity{};     // max-abs of rho - rho^dagger
  Scalar trace_deviation{}; // |tr(rho) - 1|
  Scalar min_eigenvalue{};
};

template <typename Scalar>
DensityResiduals<Scalar> density_residuals(const CoinWalkerDensity<Scalar>& d) {
  DensityResiduals<Scalar> r;
  r.hermiticity = (d.rho - d.rho.adjoint()).cwiseAbs().maxCoeff();
  r.trace_deviation = std::abs(d.rho.trace() - Complex<Scalar>(1));
  Eigen::SelfAdjointEigenSolver<CMatrix<Scalar>> es(
      ((d.rho + d.rho.adjoint()) / Scalar(2)).eval(),
      Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  return r;
}

namespace detail {

inline void check_capacity(std::int64_t halfwidth, std::int64_t cap,
                           const char* who) {
  if (halfwidth < 0) {
    throw Error(std::string(who) + ": window halfwidth must be >= 0");
  }
  if (halfwidth > cap) {
    throw CapacityError(std::string(who) + ": requested halfwidth " +
                        std::to_string(halfwidth) + " exceeds cap " +
                        std::to_string(cap));
  }
}

template <typename Scalar>
void check_nonnegative(const RealArray<Scalar>& xs, const char* who) {
  if ((xs < Scalar(-kNegativityTol)).any()) {
    throw Error(std::string(who) +
                ": probability weight below the negativity tolerance");
  }
}

}  // namespace detail

/// Diagonal state concentrated at the origin site, on a window wide enough
/// for `capacity` steps.  A window of halfwidth N holds N steps exactly.
template <typename Scalar = double>
DiagonalWalkState<Scalar> init_diagonal(
    const InitialCondition<Scalar>& ic, std::int64_t capacity,
    std::int64_t halfwidth_cap = kDefaultDiagonalHalfwidthCap) {
  detail::check_capacity(capacity, halfwidth_cap, "init_diagonal");
  DiagonalWalkState<Scalar> st;
  st.window = LatticeWindow{ic.origin, capacity};
  st.alpha = RealArray<Scalar>::Zero(st.window.size());
  st.beta = RealArray<Scalar>::Zero(st.window.size());
  st.alpha[capacity] = ic.coin_up_weight();
  st.beta[capacity] = ic.coin_down_weight();
  st.step = 0;
  return st;
}

/// Dense density for the same initial condition.  Dense windows are capped
/// far more tightly: the dense path is an oracle, not the production path.
template <typename Scalar = double>
CoinWalkerDensity<Scalar> init_density(
    const InitialCondition<Scalar>& ic, std::int64_t capacity,
    std::int64_t halfwidth_cap = kDefaultDenseHalfwidthCap) {
  detail::check_capacity(capacity, halfwidth_cap, "init_density");
  CoinWalkerDensity<Scalar> d;
  d.window = LatticeWindow{ic.origin, capacity};
  d.rho = CMatrix<Scalar>::Zero(d.dim(), d.dim());
  const std::int64_t o = capacity;  // index of the origin site
  d.rho(d.flat(0, o), d.flat(0, o)) = ic.coin_up_weight();
  d.rho(d.flat(1, o), d.flat(1, o)) = ic.coin_down_weight();
  d.step = 0;
  return d;
}

/// Pure state |coin> (x) |origin> on a window sized for `capacity` steps.
template <typename Scalar = double>
PureState<Scalar> init_pure(
    int coin, std::int64_t origin, std::int64_t capacity,
    std::int64_t halfwidth_cap = kDefaultDiagonalHalfwidthCap) {
  detail::check_capacity(capacity, halfwidth_cap, "init_pure");
  if (coin != 0 && coin != 1) {
    throw Error("init_pure: coin basis index must be 0 or 1");
  }
  PureState<Scalar> p;
  p.window = LatticeWindow{origin, capacity};
  p.amps = CVector<Scalar>::Zero(2 * p.window.size());
  p.amps[coin * p.window.size() + capacity] = Complex<Scalar>(1);
  return p;
}

/// Site marginal P(k) = alpha[k] + beta[k], with sub-tolerance negative
/// rounding noise clamped to zero.
template <typename Scalar>
RealArray<Scalar> position_distribution(const DiagonalWalkState<Scalar>& st) {
  detail::check_nonnegative(st.alpha, "position_distribution");
  detail::check_nonnegative(st.beta, "position_distribution");
  return (st.alpha + st.beta).max(Scalar(0));
}

/// Site marginal of a dense density (diagonal of the coin partial trace).
template <typename Scalar>
RealArray<Scalar> position_distribution(const CoinWalkerDensity<Scalar>& d) {
  const std::int64_t w = d.sites();
  RealArray<Scalar> p(w);
  for (std::int64_t i = 0; i < w; ++i) {
    p[i] = std::real(d.rho(i, i)) + std::real(d.rho(w + i, w + i));
  }
  return p.max(Scalar(0));
}

/// Walker marginal density: sum of the two diagonal coin blocks.
template <typename Scalar>
CMatrix<Scalar> partial_trace_coin(const CoinWalkerDensity<Scalar>& d) {
  const std::int64_t w = d.sites();
  return d.rho.topLeftCorner(w, w) + d.rho.bottomRightCorner(w, w);
}

}  // namespace qwalk
