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
#include <functional>
#include <utility>

#include "qwalk/linalg.hpp"
#include "qwalk/types.hpp"
#include "qwalk/walk_state.hpp"

namespace qwalk {

/// Dichotomous coin-noise parameters.  The per-branch coin rotation is
/// U(s) = normalizer * [[1, s*eps], [-s*eps, 1]] with s = +-1 drawn with
/// probability (q_plus, 1 - q_plus).
template <typename Scalar = double>
struct NoiseSpec {
  Scalar epsilon{};
  Scalar q_plus{Scalar(1) / 2};
  Scalar normalizer{1};  // 1/sqrt(1 + eps^2)

  NoiseSpec() = default;
  explicit NoiseSpec(Scalar eps, Scalar qp = Scalar(1) / 2)
      : epsilon(eps), q_plus(qp) {
    if (!(eps >= Scalar(0)) || !std::isfinite(eps)) {
      throw Error("NoiseSpec: epsilon must be finite and >= 0");
    }
    if (!(qp >= Scalar(0) && qp <= Scalar(1))) {
      throw Error("NoiseSpec: q_plus must lie in [0, 1]");
    }
    normalizer = Scalar(1) / std::sqrt(Scalar(1) + eps * eps);
  }

  Scalar q_minus() const { return Scalar(1) - q_plus; }
  /// normalizer^2: weight kept on the same coin label by one step.
  Scalar stay_weight() const {
    return Scalar(1) / (Scalar(1) + epsilon * epsilon);
  }
  /// eps^2 * normalizer^2, stored as the exact complement of stay_weight()
  /// so one step preserves total mass exactly in floating point.
  Scalar flip_weight() const { return Scalar(1) - stay_weight(); }
  bool unbiased() const { return q_plus == Scalar(1) / 2; }
};

/// Coin rotation of the branch with sign s: U(s) = W(s * eps).
template <typename Scalar>
Mat2<Scalar> reshuffling_matrix(const NoiseSpec<Scalar>& spec, int s) {
  if (s != 1 && s != -1) {
    throw Error("reshuffling_matrix: branch sign must be +1 or -1");
  }
  return coset_matrix(Complex<Scalar>(Scalar(s) * spec.epsilon));
}

namespace detail {

// The branch step factorizes as (conditional shift) * (coin mix (x) 1).
// It is applied in that factorized form, column by column; the full matrix
// is never materialized here.  After the mix, up components move one site
// right and down components one site left, so any mass on an edge site
// (either coin component) would partly step out of the window.  Requiring
// both edge sites to be empty keeps the truncated step exactly faithful.

template <typename Scalar, typename SrcDerived>
void require_branch_headroom(const Eigen::MatrixBase<SrcDerived>& src,
                             std::int64_t w) {
  if (w < 2) {
    throw SupportOverflowError("branch step: window too small to step");
  }
  const bool edges_clear =
      src.row(0).isZero(Scalar(0)) && src.row(w - 1).isZero(Scalar(0)) &&
      src.row(w).isZero(Scalar(0)) && src.row(2 * w - 1).isZero(Scalar(0));
  if (!edges_clear) {
    throw SupportOverflowError(
        "branch step: support touches the window edge; enlarge the window");
  }
}

// dst = V(s) * src for every column of src (src may be a vector).
template <typename Scalar>
void apply_branch_columns(CMatrix<Scalar>& dst, const CMatrix<Scalar>& src,
                          const Mat2<Scalar>& u, std::int64_t w) {
  require_branch_headroom<Scalar>(src, w);
  dst.resize(src.rows(), src.cols());
  dst.row(0).setZero();
  dst.middleRows(1, w - 1) = u(0, 0) * src.middleRows(0, w - 1) +
                             u(0, 1) * src.middleRows(w, w - 1);
  dst.row(2 * w - 1).setZero();
  dst.middleRows(w, w - 1) = u(1, 0) * src.middleRows(1, w - 1) +
                             u(1, 1) * src.middleRows(w + 1, w - 1);
}

template <typename Scalar>
void apply_branch_columns(CVector<Scalar>& dst, const CVector<Scalar>& src,
                          const Mat2<Scalar>& u, std::int64_t w) {
  require_branch_headroom<Scalar>(src, w);
  dst.resize(src.size());
  dst[0] = Complex<Scalar>(0);
  dst.segment(1, w - 1) =
      u(0, 0) * src.segment(0, w - 1) + u(0, 1) * src.segment(w, w - 1);
  dst[2 * w - 1] = Complex<Scalar>(0);
  dst.segment(w, w - 1) =
      u(1, 0) * src.segment(1, w - 1) + u(1, 1) * src.segment(w + 1, w - 1);
}

// dst = V(s)^dagger * src for every column, with src read as zero outside
// the window.  Entries whose true preimage lies one site beyond the window
// are simply not represented; see dual_step_observable for the contract.
template <typename Scalar>
void apply_branch_adjoint_columns(CMatrix<Scalar>& dst,
                                  const CMatrix<Scalar>& src,
                                  const Mat2<Scalar>& u, std::int64_t w) {
  if (w < 2) {
    throw SupportOverflowError("dual branch step: window too small");
  }
  dst.resize(src.rows(), src.cols());
  dst.setZero();
  const Complex<Scalar> c00 = std::conj(u(0, 0));
  const Complex<Scalar> c10 = std::conj(u(1, 0));
  const Complex<Scalar> c01 = std::conj(u(0, 1));
  const Complex<Scalar> c11 = std::conj(u(1, 1));
  dst.middleRows(0, w - 1) = c00 * src.middleRows(1, w - 1);
  dst.middleRows(1, w - 1) += c10 * src.middleRows(w, w - 1);
  dst.middleRows(w, w - 1) = c01 * src.middleRows(1, w - 1);
  dst.middleRows(w + 1, w - 1) += c11 * src.middleRows(w, w - 1);
}

// result = V(s) * rho * V(s)^dagger via two column passes.
template <typename Scalar>
CMatrix<Scalar> conjugate_branch(const CMatrix<Scalar>& rho,
                                 const Mat2<Scalar>& u, std::int64_t w) {
  CMatrix<Scalar> a;
  apply_branch_columns(a, rho, u, w);  // a = V rho
  CMatrix<Scalar> ad = a.adjoint();
  CMatrix<Scalar> b;
  apply_branch_columns(b, ad, u, w);   // b = V (V rho)^dagger
  return b.adjoint();                  // = V rho V^dagger
}

}  // namespace detail

/// One branch of the walk applied to a pure state: coin mix by U(s), then
/// the conditional shift.  Requires one empty site inside each window edge.
template <typename Scalar>
PureState<Scalar> apply_branch_unitary(const PureState<Scalar>& psi,
                                       const NoiseSpec<Scalar>& spec, int s) {
  const Mat2<Scalar> u = reshuffling_matrix(spec, s);
  PureState<Scalar> out;
  out.window = psi.window;
  detail::apply_branch_columns(out.amps, psi.amps, u, psi.window.size());
  return out;
}

/// Same branch applied by conjugation to a dense density.
template <typename Scalar>
CoinWalkerDensity<Scalar> apply_branch_unitary(
    const CoinWalkerDensity<Scalar>& d, const NoiseSpec<Scalar>& spec, int s) {
  const Mat2<Scalar> u = reshuffling_matrix(spec, s);
  CoinWalkerDensity<Scalar> out;
  out.window = d.window;
  out.rho = detail::conjugate_branch(d.rho, u, d.sites());
  out.step = d.step + 1;
  return out;
}

namespace detail {

// Mixture of the two branch conjugations with weight wp on the + branch.
template <typename Scalar>
CoinWalkerDensity<Scalar> kraus_mix(const CoinWalkerDensity<Scalar>& d,
                                    const NoiseSpec<Scalar>& spec, Scalar wp) {
  const std::int64_t w = d.sites();
  const Mat2<Scalar> up = reshuffling_matrix(spec, +1);
  const Mat2<Scalar> um = reshuffling_matrix(spec, -1);
  CoinWalkerDensity<Scalar> out;
  out.window = d.window;
  out.step = d.step + 1;
  out.rho = wp * conjugate_branch(d.rho, up, w) +
            (Scalar(1) - wp) * conjugate_branch(d.rho, um, w);
  return out;
}

}  // namespace detail

/// One noise-averaged step of the open walk on a dense density:
/// rho' = q_plus V(+) rho V(+)^dagger + q_minus V(-) rho V(-)^dagger.
/// Trace preserving; with q_plus = 1/2 it maps diagonal states to diagonal
/// states and agrees with diagonal_step on the diagonal.
template <typename Scalar>
CoinWalkerDensity<Scalar> cptp_step(const CoinWalkerDensity<Scalar>& d,
                                    const NoiseSpec<Scalar>& spec) {
  return detail::kraus_mix(d, spec, spec.q_plus);
}

namespace detail {

template <typename Scalar>
void diagonal_step_into(const DiagonalWalkState<Scalar>& src,
                        DiagonalWalkState<Scalar>& dst,
                        const NoiseSpec<Scalar>& spec) {
  const std::int64_t w = src.window.size();
  if (w < 2) {
    throw SupportOverflowError("diagonal_step: window too small to step");
  }
  // Both recurrence lines read both components one site inward, so any
  // weight on an edge site would partly shift out of the window.
  if (src.alpha[w - 1] != Scalar(0) || src.beta[w - 1] != Scalar(0) ||
      src.alpha[0] != Scalar(0) || src.beta[0] != Scalar(0)) {
    throw SupportOverflowError(
        "diagonal_step: weight on a window edge site would shift out; "
        "enlarge the window");
  }
  check_nonnegative(src.alpha, "diagonal_step");
  check_nonnegative(src.beta, "diagonal_step");
  const Scalar stay = spec.stay_weight();
  const Scalar flip = spec.flip_weight();
  dst.window = src.window;
  dst.alpha.resize(w);
  dst.beta.resize(w);
  dst.alpha[0] = Scalar(0);
  dst.alpha.tail(w - 1) =
      stay * src.alpha.head(w - 1) + flip * src.beta.head(w - 1);
  dst.beta[w - 1] = Scalar(0);
  dst.beta.head(w - 1) =
      flip * src.alpha.tail(w - 1) + stay * src.beta.tail(w - 1);
  dst.step = src.step + 1;
}

template <typename Scalar>
void require_unbiased(const NoiseSpec<Scalar>& spec, const char* who) {
  if (!spec.unbiased()) {
    throw Error(std::string(who) +
                ": the diagonal fast path evolves the unbiased (q_plus = 1/2) "
                "walk; use the dense path for biased branch weights");
  }
}

}  // namespace detail

/// One step of the noise-averaged walk restricted to the diagonal family:
///   alpha'[k] = n^2 (alpha[k-1] + eps^2 beta[k-1])
///   beta'[k]  = n^2 (eps^2 alpha[k+1] + beta[k+1])
/// Exact for q_plus = 1/2, where the diagonal family is closed; biased
/// weights generate coin coherences and are rejected here.
template <typename Scalar>
DiagonalWalkState<Scalar> diagonal_step(const DiagonalWalkState<Scalar>& src,
                                        const NoiseSpec<Scalar>& spec) {
  detail::require_unbiased(spec, "diagonal_step");
  DiagonalWalkState<Scalar> dst;
  detail::diagonal_step_into(src, dst, spec);
  return dst;
}

/// One step of the dual (Heisenberg) map on a window observable:
///   A' = sum_s q_s V(s)^dagger A V(s),
/// with A read as zero outside its window.  The image is reported on the
/// same window; entries of the untruncated image one site beyond the window
/// are dropped, so the result is exact on sites at least one inside the
/// edge.  Pair it with states supported one site inside the window and the
/// duality identity tr(E(rho) A) = tr(rho E*(A)) holds at full precision;
/// likewise the map is unital on the window interior.
template <typename Scalar>
CMatrix<Scalar> dual_step_observable(const CMatrix<Scalar>& obs,
                                     const LatticeWindow& window,
                                     const NoiseSpec<Scalar>& spec) {
  const std::int64_t w = window.size();
  if (obs.rows() != 2 * w || obs.cols() != 2 * w) {
    throw Error("dual_step_observable: observable does not match the window");
  }
  CMatrix<Scalar> out = CMatrix<Scalar>::Zero(2 * w, 2 * w);
  for (const int s : {+1, -1}) {
    const Mat2<Scalar> u = reshuffling_matrix(spec, s);
    const Scalar q = (s == 1) ? spec.q_plus : spec.q_minus();
    CMatrix<Scalar> t1;
    CMatrix<Scalar> obs_adj = obs.adjoint();
    detail::apply_branch_adjoint_columns(t1, obs_adj, u, w);  // V^dag A^dag
    CMatrix<Scalar> t2 = t1.adjoint();                        // A V
    CMatrix<Scalar> t3;
    detail::apply_branch_adjoint_columns(t3, t2, u, w);       // V^dag A V
    out += q * t3;
  }
  return out;
}

template <typename Scalar = double>
using StepObserver = std::function<void(const DiagonalWalkState<Scalar>&)>;

/// Evolves the diagonal representation for `steps` steps on a window of
/// halfwidth `steps` (exact support bound).  Calls `on_step` after every
/// step when provided.
template <typename Scalar>
DiagonalWalkState<Scalar> evolve_diagonal(
    const InitialCondition<Scalar>& ic, const NoiseSpec<Scalar>& spec,
    std::int64_t steps,
    std::int64_t halfwidth_cap = kDefaultDiagonalHalfwidthCap,
    const StepObserver<Scalar>& on_step = {}) {
  detail::require_unbiased(spec, "evolve_diagonal");
  DiagonalWalkState<Scalar> cur = init_diagonal(ic, steps, halfwidth_cap);
  DiagonalWalkState<Scalar> next;
  for (std::int64_t n = 0; n < steps; ++n) {
    detail::diagonal_step_into(cur, next, spec);
    std::swap(cur, next);
    if (on_step) on_step(cur);
  }
  return cur;
}

/// Dense-path evolution.  Exists as an oracle for the diagonal recurrence
/// and for biased branch weights; the window is capped accordingly.
template <typename Scalar>
CoinWalkerDensity<Scalar> evolve_dense(
    const InitialCondition<Scalar>& ic, const NoiseSpec<Scalar>& spec,
    std::int64_t steps, std::int64_t halfwidth_cap = kDefaultDenseHalfwidthCap) {
  CoinWalkerDensity<Scalar> cur = init_density(ic, steps, halfwidth_cap);
  for (std::int64_t n = 0; n < steps; ++n) {
    cur = cptp_step(cur, spec);
  }
  return cur;
}

}  // namespace qwalk
