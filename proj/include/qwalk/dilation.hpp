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
#include <random>
#include <vector>

#include "qwalk/evolution.hpp"
#include "qwalk/linalg.hpp"
#include "qwalk/rng.hpp"
#include "qwalk/types.hpp"
#include "qwalk/walk_state.hpp"

namespace qwalk {

/// Parameters of the single-ancilla unitary model of the noise-averaged
/// step: a qubit ancilla prepared in basis state |aux_state> is rotated by
/// the real rotation Q(q_plus) and then steers which branch unitary acts.
template <typename Scalar = double>
struct DilationSpec {
  Scalar q_plus{Scalar(1) / 2};
  int aux_state = 0;
  NoiseSpec<Scalar> noise;

  DilationSpec() = default;
  DilationSpec(Scalar qp, int aux, const NoiseSpec<Scalar>& n)
      : q_plus(qp), aux_state(aux), noise(n) {
    if (!(qp >= Scalar(0) && qp <= Scalar(1))) {
      throw Error("DilationSpec: q_plus must lie in [0, 1]");
    }
    if (aux != 0 && aux != 1) {
      throw Error("DilationSpec: aux_state must be 0 or 1");
    }
  }
};

/// The ancilla rotation Q = [[sqrt(q+), sqrt(q-)], [-sqrt(q-), sqrt(q+)]];
/// a pi/4 rotation at q_plus = 1/2.  Column a of Q (Hadamard) Q* is the
/// branch-weight vector produced by ancilla state |a>.
template <typename Scalar>
Mat2<Scalar> q_matrix(Scalar q_plus) {
  if (!(q_plus >= Scalar(0) && q_plus <= Scalar(1))) {
    throw Error("q_matrix: q_plus must lie in [0, 1]");
  }
  const Scalar sp = std::sqrt(q_plus);
  const Scalar sm = std::sqrt(Scalar(1) - q_plus);
  Mat2<Scalar> q;
  q << Complex<Scalar>(sp), Complex<Scalar>(sm), Complex<Scalar>(-sm),
      Complex<Scalar>(sp);
  return q;
}

/// Branch weights (w_plus, w_minus) = (|Q(0,a)|^2, |Q(1,a)|^2) selected by
/// the ancilla preparation; equal to (q_plus, q_minus) for aux_state = 0
/// and swapped for aux_state = 1.
template <typename Scalar>
std::pair<Scalar, Scalar> branch_weights(const DilationSpec<Scalar>& spec) {
  const Mat2<Scalar> q = q_matrix(spec.q_plus);
  return {std::norm(q(0, spec.aux_state)), std::norm(q(1, spec.aux_state))};
}

/// One step through the dilation, written via the branch-sum identity
///   tr_aux Ad_Y(|a><a| (x) rho) = sum_s |Q(s,a)|^2 V(s) rho V(s)^dagger.
/// This is the production path; the ancilla space never appears.  The dense
/// ancilla route lives in dilated_step_dense for verification.
template <typename Scalar>
CoinWalkerDensity<Scalar> dilated_step(const CoinWalkerDensity<Scalar>& d,
                                       const DilationSpec<Scalar>& spec) {
  const auto [wp, wm] = branch_weights(spec);
  (void)wm;  // wm = 1 - wp by construction of Q
  return detail::kraus_mix(d, spec.noise, wp);
}

namespace detail {

// Dense branch unitary on the window, with the conditional shift realized
// cyclically.  The wrap-around keeps the matrix exactly unitary on the
// finite window and is unobservable as long as the state keeps one empty
// site inside each edge, which the stepping preconditions enforce.
template <typename Scalar>
CMatrix<Scalar> dense_branch_unitary(std::int64_t w, const Mat2<Scalar>& u) {
  CMatrix<Scalar> m = CMatrix<Scalar>::Zero(2 * w, 2 * w);
  for (std::int64_t j = 0; j < w; ++j) {
    const std::int64_t right = (j + 1) % w;
    const std::int64_t left = (j + w - 1) % w;
    for (int d = 0; d < 2; ++d) {
      m(right, d * w + j) = u(0, d);       // up component moves right
      m(w + left, d * w + j) = u(1, d);    // down component moves left
    }
  }
  return m;
}

}  // namespace detail

/// The dilation unitary Y on ancilla (x) coin (x) walker, materialized
/// densely: ancilla block (s, b) of Y is Q(s, b) V(s).  Intended for
/// verification on small windows only.
template <typename Scalar>
CMatrix<Scalar> dense_dilation_unitary(std::int64_t halfwidth,
                                       const DilationSpec<Scalar>& spec) {
  const std::int64_t w = 2 * halfwidth + 1;
  const std::int64_t d = 2 * w;
  const Mat2<Scalar> q = q_matrix(spec.q_plus);
  const CMatrix<Scalar> vp =
      detail::dense_branch_unitary(w, reshuffling_matrix(spec.noise, +1));
  const CMatrix<Scalar> vm =
      detail::dense_branch_unitary(w, reshuffling_matrix(spec.noise, -1));
  CMatrix<Scalar> y(2 * d, 2 * d);
  y.topLeftCorner(d, d) = q(0, 0) * vp;
  y.topRightCorner(d, d) = q(0, 1) * vp;
  y.bottomLeftCorner(d, d) = q(1, 0) * vm;
  y.bottomRightCorner(d, d) = q(1, 1) * vm;
  return y;
}

/// Partial trace over the leading qubit factor of a (2t x 2t) matrix.
template <typename Scalar>
CMatrix<Scalar> partial_trace_aux(const CMatrix<Scalar>& m, std::int64_t t) {
  return m.topLeftCorner(t, t) + m.bottomRightCorner(t, t);
}

/// Verification route through the ancilla: embed rho as |a><a| (x) rho,
/// conjugate by the dense Y, and trace the ancilla back out.
template <typename Scalar>
CoinWalkerDensity<Scalar> dilated_step_dense(const CoinWalkerDensity<Scalar>& d,
                                             const DilationSpec<Scalar>& spec) {
  const std::int64_t w = d.sites();
  detail::require_branch_headroom<Scalar>(d.rho, w);
  const std::int64_t t = d.dim();
  const CMatrix<Scalar> y = dense_dilation_unitary(d.window.halfwidth, spec);
  CMatrix<Scalar> big = CMatrix<Scalar>::Zero(2 * t, 2 * t);
  const std::int64_t a = spec.aux_state;
  big.block(a * t, a * t, t, t) = d.rho;
  const CMatrix<Scalar> evolved = y * big * y.adjoint();
  CoinWalkerDensity<Scalar> out;
  out.window = d.window;
  out.step = d.step + 1;
  out.rho = partial_trace_aux(evolved, t);
  return out;
}

/// Trace norm (sum of absolute eigenvalues) of a Hermitian matrix.
template <typename Scalar>
Scalar trace_norm_hermitian(const CMatrix<Scalar>& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix<Scalar>> es(
      ((m + m.adjoint()) / Scalar(2)).eval(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

/// Random density operator (normalized Ginibre G G^dagger) with its support
/// compressed one site inside the window edges so stepping never overflows.
template <typename Scalar, typename Rng>
CMatrix<Scalar> random_interior_density(std::int64_t w, Rng& rng) {
  const std::int64_t dim = 2 * w;
  CMatrix<Scalar> g(dim, dim);
  for (std::int64_t i = 0; i < dim; ++i) {
    for (std::int64_t j = 0; j < dim; ++j) {
      const auto [re, im] = normal_pair<Scalar>(rng);
      g(i, j) = Complex<Scalar>(re, im);
    }
  }
  CMatrix<Scalar> rho = g * g.adjoint();
  for (const std::int64_t edge : {std::int64_t(0), w - 1, w, 2 * w - 1}) {
    rho.row(edge).setZero();
    rho.col(edge).setZero();
  }
  rho /= rho.trace().real();
  return rho;
}

template <typename Scalar = double>
struct EquivalencePoint {
  Scalar epsilon{};
  Scalar q_plus{};
  int aux_state = 0;
  int n_states = 0;
  Scalar max_trace_norm_deviation{};
  Scalar y_unitarity_residual{};
};

template <typename Scalar = double>
struct EquivalenceReport {
  std::int64_t halfwidth = 0;
  std::uint64_t seed = 0;
  std::vector<EquivalencePoint<Scalar>> points;

  Scalar worst_deviation() const {
    Scalar m{};
    for (const auto& p : points) {
      m = std::max(m, p.max_trace_norm_deviation);
      m = std::max(m, p.y_unitarity_residual);
    }
    return m;
  }
};

/// Checks, over a parameter grid and random interior densities, that the
/// dense ancilla route reproduces the noise-averaged step in trace norm,
/// and that Y is unitary on the window.
template <typename Scalar = double>
EquivalenceReport<Scalar> equivalence_check(
    const std::vector<Scalar>& eps_grid, const std::vector<Scalar>& q_grid,
    int n_states, std::int64_t halfwidth, std::uint64_t seed,
    const std::vector<int>& aux_states = {0}) {
  if (halfwidth < 1 || halfwidth > 16) {
    throw Error("equivalence_check: halfwidth must lie in [1, 16]");
  }
  EquivalenceReport<Scalar> rep;
  rep.halfwidth = halfwidth;
  rep.seed = seed;
  const std::int64_t w = 2 * halfwidth + 1;
  std::mt19937_64 rng(seed);
  for (const Scalar eps : eps_grid) {
    for (const Scalar qp : q_grid) {
      for (const int aux : aux_states) {
        const NoiseSpec<Scalar> noise(eps, qp);
        const DilationSpec<Scalar> spec(qp, aux, noise);
        EquivalencePoint<Scalar> pt;
        pt.epsilon = eps;
        pt.q_plus = qp;
        pt.aux_state = aux;
        pt.n_states = n_states;
        const CMatrix<Scalar> y = dense_dilation_unitary(halfwidth, spec);
        pt.y_unitarity_residual = unitarity_residual(y);
        const auto [wp, wm] = branch_weights(spec);
        const NoiseSpec<Scalar> effective(eps, wp);
        (void)wm;
        for (int i = 0; i < n_states; ++i) {
          CoinWalkerDensity<Scalar> d;
          d.window = LatticeWindow{0, halfwidth};
          d.rho = random_interior_density<Scalar>(w, rng);
          const auto via_ancilla = dilated_step_dense(d, spec);
          const auto via_kraus = cptp_step(d, effective);
          pt.max_trace_norm_deviation = std::max(
              pt.max_trace_norm_deviation,
              trace_norm_hermitian<Scalar>(via_ancilla.rho - via_kraus.rho));
        }
        rep.points.push_back(pt);
      }
    }
  }
  return rep;
}

/// Documented variant, not a verified pathway: the walker-only walk with
/// the coin retraced every step.  The walker density mixes under the two
/// cyclic shifts with the site-transfer probabilities of the rotated coin,
/// i.e. the diagonal of U rho_c U^dagger.
template <typename Scalar>
CMatrix<Scalar> coin_reset_step(const CMatrix<Scalar>& walker_rho,
                                const Mat2<Scalar>& u,
                                const Mat2<Scalar>& coin_rho) {
  const std::int64_t w = walker_rho.rows();
  if (walker_rho.cols() != w || w < 1) {
    throw Error("coin_reset_step: walker density must be square");
  }
  const Mat2<Scalar> mixed = u * coin_rho * u.adjoint();
  const Scalar p_up = std::real(mixed(0, 0));
  const Scalar p_down = std::real(mixed(1, 1));
  CMatrix<Scalar> shifted_r(w, w), shifted_l(w, w);
  for (std::int64_t i = 0; i < w; ++i) {
    for (std::int64_t j = 0; j < w; ++j) {
      shifted_r((i + 1) % w, (j + 1) % w) = walker_rho(i, j);
      shifted_l((i + w - 1) % w, (j + w - 1) % w) = walker_rho(i, j);
    }
  }
  return p_up * shifted_r + p_down * shifted_l;
}

}  // namespace qwalk
