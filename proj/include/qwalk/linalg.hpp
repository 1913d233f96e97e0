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
#include <numbers>
#include <type_traits>
#include <utility>

#include "qwalk/rng.hpp"
#include "qwalk/types.hpp"

namespace qwalk {

inline constexpr double kDegenerateCosetTol = 1e-12;

template <typename Scalar = double>
Mat2<Scalar> sigma1() {
  Mat2<Scalar> m;
  m << Complex<Scalar>(0), Complex<Scalar>(1), Complex<Scalar>(1),
      Complex<Scalar>(0);
  return m;
}

template <typename Scalar = double>
Mat2<Scalar> sigma3() {
  Mat2<Scalar> m;
  m << Complex<Scalar>(1), Complex<Scalar>(0), Complex<Scalar>(0),
      Complex<Scalar>(-1);
  return m;
}

template <typename Scalar = double>
Mat2<Scalar> sigma_plus() {
  Mat2<Scalar> m;
  m << Complex<Scalar>(0), Complex<Scalar>(1), Complex<Scalar>(0),
      Complex<Scalar>(0);
  return m;
}

template <typename Scalar = double>
Mat2<Scalar> sigma_minus() {
  return sigma_plus<Scalar>().transpose();
}

/// Element-wise (Hadamard) product, returned as an Eigen expression.
template <typename DerivedA, typename DerivedB>
auto hadamard(const Eigen::MatrixBase<DerivedA>& a,
              const Eigen::MatrixBase<DerivedB>& b) {
  return a.cwiseProduct(b);
}

/// Point on the 2x2 unitary coset in its three equivalent coordinates:
/// the projective coordinate theta, the disc coordinate z, and the
/// probability weight p = 1/(1+|theta|^2).  Satisfies |z|^2 + p = 1.
template <typename Scalar = double>
struct CosetPoint {
  Complex<Scalar> theta{};
  Complex<Scalar> z{};
  Scalar p{1};

  static CosetPoint from_theta(const Complex<Scalar>& theta) {
    CosetPoint c;
    c.theta = theta;
    c.p = Scalar(1) / (Scalar(1) + std::norm(theta));
    c.z = theta * std::sqrt(c.p);
    return c;
  }
};

/// Canonical coset representative
///   W(theta) = (1+|theta|^2)^{-1/2} [[1, theta], [-conj(theta), 1]].
/// Unitary with unit determinant for every finite theta.
template <typename Scalar>
Mat2<Scalar> coset_matrix(const Complex<Scalar>& theta) {
  const Scalar w = Scalar(1) / std::sqrt(Scalar(1) + std::norm(theta));
  Mat2<Scalar> m;
  m << Complex<Scalar>(w), w * theta, -w * std::conj(theta),
      Complex<Scalar>(w);
  return m;
}

template <typename Scalar,
          typename = std::enable_if_t<std::is_floating_point_v<Scalar>>>
Mat2<Scalar> coset_matrix(Scalar theta) {
  return coset_matrix(Complex<Scalar>(theta));
}

template <typename Scalar = double>
Mat2<Scalar> coset_matrix(const CosetPoint<Scalar>& pt) {
  return coset_matrix(pt.theta);
}

template <typename Scalar = double>
struct CosetDecomposition {
  Mat2<Scalar> d;           // diagonal, |d_ii| = 1
  Mat2<Scalar> w;           // canonical representative, w(0,0) real > 0
  Complex<Scalar> theta{};  // projective coordinate of w
};

/// Split a 2x2 unitary as U = D * W(theta) with D unimodular diagonal and
/// W the canonical representative whose (0,0) entry is real and positive.
/// Throws DegenerateCosetError when |U(0,0)| (equivalently |U(1,1)| for a
/// unitary) is below kDegenerateCosetTol; the purely off-diagonal case is
/// reported, not patched.
template <typename Derived>
auto coset_decompose(const Eigen::MatrixBase<Derived>& u_in) {
  using CS = typename Derived::Scalar;
  using Scalar = typename Eigen::NumTraits<CS>::Real;
  const Mat2<Scalar> u = u_in;
  const Scalar a00 = std::abs(u(0, 0));
  const Scalar a11 = std::abs(u(1, 1));
  if (a00 < Scalar(kDegenerateCosetTol) || a11 < Scalar(kDegenerateCosetTol)) {
    throw DegenerateCosetError(
        "coset_decompose: diagonal entries vanish; no finite coset "
        "coordinate");
  }
  CosetDecomposition<Scalar> out;
  out.theta = u(0, 1) / u(0, 0);
  out.w = coset_matrix(out.theta);
  out.d = Mat2<Scalar>::Zero();
  out.d(0, 0) = u(0, 0) / a00;
  out.d(1, 1) = u(1, 1) / a11;
  return out;
}

/// Entry-wise squared moduli |W_ij|^2, i.e. the Hadamard product of W with
/// its conjugate.  Doubly stochastic whenever W is unitary.
template <typename Derived>
auto bistochastic_of(const Eigen::MatrixBase<Derived>& w) {
  using CS = typename Derived::Scalar;
  using Scalar = typename Eigen::NumTraits<CS>::Real;
  Mat2Real<Scalar> b = w.cwiseAbs2();
  return b;
}

/// Site-transfer probabilities of the conditional-shift step for a coin
/// prepared in basis state |coin> and rotated by U: the column of the
/// bistochastic matrix of the coset factor of U = D W.  Returns (p_up,
/// p_down).  Phase invariance (left multiplication of U by a unimodular
/// diagonal) holds by construction since D drops out.
template <typename Derived>
auto lemma1_probabilities(const Eigen::MatrixBase<Derived>& u, int coin) {
  using CS = typename Derived::Scalar;
  using Scalar = typename Eigen::NumTraits<CS>::Real;
  if (coin != 0 && coin != 1) {
    throw Error("lemma1_probabilities: coin basis index must be 0 or 1");
  }
  const auto dec = coset_decompose(u);
  const Mat2Real<Scalar> b = bistochastic_of(dec.w);
  return std::pair<Scalar, Scalar>{b(0, coin), b(1, coin)};
}

/// Max-abs entry of M^dagger M - I.
template <typename Derived>
auto unitarity_residual(const Eigen::MatrixBase<Derived>& m) {
  using CS = typename Derived::Scalar;
  using Scalar = typename Eigen::NumTraits<CS>::Real;
  const auto sq = (m.adjoint() * m).eval();
  return Scalar(
      (sq - decltype(sq)::Identity(sq.rows(), sq.cols())).cwiseAbs().maxCoeff());
}

/// Random unimodular diagonal diag(e^{ia}, e^{ib}).
template <typename Scalar = double, typename Rng>
Mat2<Scalar> random_phase_diag(Rng& rng) {
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  const Scalar a = two_pi * uniform01<Scalar>(rng);
  const Scalar b = two_pi * uniform01<Scalar>(rng);
  Mat2<Scalar> d = Mat2<Scalar>::Zero();
  d(0, 0) = std::polar(Scalar(1), a);
  d(1, 1) = std::polar(Scalar(1), b);
  return d;
}

/// Random special unitary e^{i phi sigma3} W(theta) e^{i psi sigma3} with
/// phi, psi uniform on [0, 2pi) and theta complex Gaussian.  Dense enough on
/// the coset space for property coverage; not Haar.
template <typename Scalar = double, typename Rng>
Mat2<Scalar> random_unitary(Rng& rng) {
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  const Scalar phi = two_pi * uniform01<Scalar>(rng);
  const Scalar psi = two_pi * uniform01<Scalar>(rng);
  const auto [re, im] = normal_pair<Scalar>(rng);
  Mat2<Scalar> d1 = Mat2<Scalar>::Zero();
  d1(0, 0) = std::polar(Scalar(1), phi);
  d1(1, 1) = std::polar(Scalar(1), -phi);
  Mat2<Scalar> d2 = Mat2<Scalar>::Zero();
  d2(0, 0) = std::polar(Scalar(1), psi);
  d2(1, 1) = std::polar(Scalar(1), -psi);
  return d1 * coset_matrix(Complex<Scalar>(re, im)) * d2;
}

/// Residuals of the coset-probability identities over a batch of random
/// unitaries.  Used by the command-line verifier and the acceptance suite.
template <typename Scalar = double>
struct CosetSuiteResiduals {
  Scalar max_two_route_dev{};        // Hadamard route vs direct conjugation
  Scalar max_phase_invariance_dev{}; // probabilities under D*U vs U
  Scalar max_bistochastic_dev{};     // row/column sums of |W_ij|^2 vs 1
  Scalar max_reconstruction_dev{};   // max-abs of D*W - U
  Scalar max_unitarity_residual{};   // max-abs of W^dagger W - I
  int n_unitaries{};

  Scalar worst() const {
    return std::max({max_two_route_dev, max_phase_invariance_dev,
                     max_bistochastic_dev, max_reconstruction_dev,
                     max_unitarity_residual});
  }
};

/// Runs the coset property suite on `n` random unitaries.  The direct route
/// evaluates p_i = (U rho_c U^dagger)_{ii} for both coin basis states and
/// compares with lemma1_probabilities.
template <typename Scalar = double>
CosetSuiteResiduals<Scalar> coset_property_suite(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CosetSuiteResiduals<Scalar> res;
  res.n_unitaries = n;
  for (int i = 0; i < n; ++i) {
    const Mat2<Scalar> u = random_unitary<Scalar>(rng);
    const auto dec = coset_decompose(u);
    res.max_reconstruction_dev = std::max<Scalar>(
        res.max_reconstruction_dev, (dec.d * dec.w - u).cwiseAbs().maxCoeff());
    res.max_unitarity_residual =
        std::max<Scalar>(res.max_unitarity_residual, unitarity_residual(dec.w));
    const Mat2Real<Scalar> b = bistochastic_of(dec.w);
    for (int j = 0; j < 2; ++j) {
      res.max_bistochastic_dev = std::max<Scalar>(
          res.max_bistochastic_dev, std::abs(b.row(j).sum() - Scalar(1)));
      res.max_bistochastic_dev = std::max<Scalar>(
          res.max_bistochastic_dev, std::abs(b.col(j).sum() - Scalar(1)));
    }
    const Mat2<Scalar> dphase = random_phase_diag<Scalar>(rng);
    for (int coin = 0; coin < 2; ++coin) {
      const auto [pu, pd] = lemma1_probabilities(u, coin);
      // Direct route: conjugate the basis projector and read the diagonal.
      Mat2<Scalar> rho_c = Mat2<Scalar>::Zero();
      rho_c(coin, coin) = Complex<Scalar>(1);
      const Mat2<Scalar> conj = u * rho_c * u.adjoint();
      res.max_two_route_dev = std::max<Scalar>(
          res.max_two_route_dev, std::abs(pu - std::real(conj(0, 0))));
      res.max_two_route_dev = std::max<Scalar>(
          res.max_two_route_dev, std::abs(pd - std::real(conj(1, 1))));
      const auto [qu, qd] = lemma1_probabilities((dphase * u).eval(), coin);
      res.max_phase_invariance_dev = std::max<Scalar>(
          res.max_phase_invariance_dev,
          std::max(std::abs(pu - qu), std::abs(pd - qd)));
    }
  }
  return res;
}

}  // namespace qwalk
