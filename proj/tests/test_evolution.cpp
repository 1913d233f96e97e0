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

#include "qwalk/evolution.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

using qwalk::InitialCondition;
using qwalk::Mat2cd;
using qwalk::NoiseSpec;
using Cd = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

// Random Hermitian window observable for duality checks.
qwalk::CMatrix<double> random_hermitian(std::int64_t dim,
                                        std::mt19937_64& rng) {
  qwalk::CMatrix<double> g(dim, dim);
  for (std::int64_t i = 0; i < dim; ++i) {
    for (std::int64_t j = 0; j < dim; ++j) {
      const auto [re, im] = qwalk::normal_pair<double>(rng);
      g(i, j) = Cd(re, im);
    }
  }
  return (g + g.adjoint()) / 2.0;
}

}  // namespace

TEST_SUITE("evolution") {

TEST_CASE("noise spec validates and derives its weights") {
  const NoiseSpec<double> spec(0.5, 0.5);
  CHECK(spec.normalizer == doctest::Approx(1.0 / std::sqrt(1.25)));
  CHECK(spec.stay_weight() == doctest::Approx(0.8).epsilon(1e-15));
  // The flip weight is the exact complement, so one application moves
  // exactly all the mass it takes.
  CHECK(spec.stay_weight() + spec.flip_weight() == 1.0);
  CHECK(spec.unbiased());
  CHECK(spec.q_minus() == 0.5);
  CHECK(!NoiseSpec<double>(0.5, 0.7).unbiased());
  CHECK_THROWS_AS(NoiseSpec<double>(-0.1, 0.5), qwalk::Error);
  CHECK_THROWS_AS(NoiseSpec<double>(0.5, 1.5), qwalk::Error);
  CHECK_THROWS_AS(NoiseSpec<double>(0.5, -0.1), qwalk::Error);
}

TEST_CASE("branch rotation at full noise is the balanced mix") {
  const NoiseSpec<double> spec(1.0, 0.5);
  const Mat2cd u = qwalk::reshuffling_matrix(spec, +1);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(u(0, 0) == Cd(s));
  CHECK(u(0, 1) == Cd(s));
  CHECK(u(1, 0) == Cd(-s));
  CHECK(u(1, 1) == Cd(s));
  const Mat2cd um = qwalk::reshuffling_matrix(spec, -1);
  CHECK((um - qwalk::coset_matrix(-1.0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(qwalk::reshuffling_matrix(spec, 0), qwalk::Error);
}

TEST_CASE("one branch step from the origin splits into two sites") {
  // V(+1)|up, 0> at eps = 1 is (|up, 1> - |down, -1>)/sqrt(2).
  const NoiseSpec<double> spec(1.0, 0.5);
  const auto psi =
      qwalk::apply_branch_unitary(qwalk::init_pure<double>(0, 0, 2), spec, +1);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(psi.up()[3] - Cd(s)) < 1e-15);     // site +1
  CHECK(std::abs(psi.down()[1] - Cd(-s)) < 1e-15);  // site -1
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("one averaged step from a balanced coin is an even split") {
  // With gamma = pi/4 the site marginal after one step is 1/2 at each of
  // k = -1, +1 for every noise strength.
  const InitialCondition<double> ic{kPi / 4, 0};
  for (const double eps : {0.3, 1.0}) {
    const NoiseSpec<double> spec(eps, 0.5);
    const auto diag = qwalk::evolve_diagonal(ic, spec, 1);
    const auto p = qwalk::position_distribution(diag);
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(p[2] == doctest::Approx(0.5).epsilon(1e-14));
    const auto dense = qwalk::evolve_dense(ic, spec, 1);
    const auto pd = qwalk::position_distribution(dense);
    CHECK(std::abs(pd[0] - 0.5) < 1e-14);
    CHECK(std::abs(pd[2] - 0.5) < 1e-14);
  }
}

TEST_CASE("two fully noisy steps quarter the edges") {
  const InitialCondition<double> ic{kPi / 4, 0};
  const NoiseSpec<double> spec(1.0, 0.5);
  const auto st = qwalk::evolve_diagonal(ic, spec, 2);
  const auto p = qwalk::position_distribution(st);
  CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(p[2] == doctest::Approx(0.50).epsilon(1e-14));
  CHECK(p[4] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(p[1] == 0.0);
  CHECK(p[3] == 0.0);
}

TEST_CASE("diagonal recurrence matches the dense channel") {
  const InitialCondition<double> ic{kPi / 3, 0};
  const NoiseSpec<double> spec(0.5, 0.5);
  const std::int64_t n = 12;
  const auto diag = qwalk::evolve_diagonal(ic, spec, n);
  const auto dense = qwalk::evolve_dense(ic, spec, n);
  const auto pd = qwalk::position_distribution(dense);
  const auto pq = qwalk::position_distribution(diag);
  CHECK((pd - pq).abs().maxCoeff() < 1e-14);
  // The dense density stays inside the diagonal family: coin-resolved
  // diagonals match and every off-diagonal element is rounding noise.
  double off = 0.0;
  for (std::int64_t i = 0; i < dense.dim(); ++i) {
    for (std::int64_t j = 0; j < dense.dim(); ++j) {
      if (i == j) continue;
      off = std::max(off, std::abs(dense.rho(i, j)));
    }
  }
  CHECK(off < 1e-15);
  for (std::int64_t k = 0; k < dense.sites(); ++k) {
    CHECK(std::abs(dense.rho(dense.flat(0, k), dense.flat(0, k)).real() -
                   diag.alpha[k]) < 1e-14);
    CHECK(std::abs(dense.rho(dense.flat(1, k), dense.flat(1, k)).real() -
                   diag.beta[k]) < 1e-14);
  }
}

TEST_CASE("biased weights run dense but are rejected on the fast path") {
  const InitialCondition<double> ic{kPi / 4, 0};
  const NoiseSpec<double> biased(0.5, 0.8);
  const auto d = qwalk::evolve_dense(ic, biased, 10);
  CHECK(std::abs(d.trace_real() - 1.0) < 1e-13);
  const auto res = qwalk::density_residuals(d);
  CHECK(res.hermiticity < 1e-14);
  CHECK(res.min_eigenvalue > -1e-13);
  // The bias acts through the site-skew coherences each step generates;
  // they survive an uneven mix and feed back into the populations, so the
  // marginal genuinely differs from the unbiased channel.
  const auto p = qwalk::position_distribution(d);
  const auto p_fair = qwalk::position_distribution(
      qwalk::evolve_dense(ic, NoiseSpec<double>(0.5, 0.5), 10));
  CHECK((p - p_fair).abs().maxCoeff() > 0.01);
  CHECK_THROWS_AS(qwalk::evolve_diagonal(ic, biased, 3), qwalk::Error);
  const auto st = qwalk::init_diagonal(ic, 3);
  CHECK_THROWS_AS(qwalk::diagonal_step(st, biased), qwalk::Error);
}

TEST_CASE("one mixed step creates exactly the hand-computed coherence") {
  // From coin up at the origin, one step of the mixed channel leaves the
  // populations branch-independent, |u_ij|^2 being even in the branch
  // sign, but creates the site-skew coherence
  //   rho[(+1, up), (-1, down)] = (eps / (1 + eps^2)) (q- - q+),
  // the term the unbiased mix cancels exactly.  This cancellation is what
  // keeps the population recurrence closed at q+ = 1/2 and nowhere else.
  const InitialCondition<double> ic{0.0, 0};  // pure coin up
  for (const double qp : {0.5, 0.8}) {
    const NoiseSpec<double> spec(0.5, qp);
    const auto d = qwalk::cptp_step(qwalk::init_density(ic, 1), spec);
    const auto up_right = d.flat(0, 2);   // site +1, coin up
    const auto down_left = d.flat(1, 0);  // site -1, coin down
    CHECK(std::abs(d.rho(up_right, up_right).real() - 0.8) < 1e-15);
    CHECK(std::abs(d.rho(down_left, down_left).real() - 0.2) < 1e-15);
    const double skew = 0.4 * ((1.0 - qp) - qp);  // eps/(1+eps^2) = 0.4
    CHECK(std::abs(d.rho(up_right, down_left) - Cd(skew, 0.0)) < 1e-15);
    CHECK(std::abs(d.rho(down_left, up_right) - Cd(skew, 0.0)) < 1e-15);
  }
}

TEST_CASE("stepping onto the window edge raises an overflow") {
  const InitialCondition<double> ic{kPi / 4, 0};
  const NoiseSpec<double> spec(0.5, 0.5);
  auto st = qwalk::init_diagonal(ic, 1);
  st = qwalk::diagonal_step(st, spec);  // support now touches both edges
  CHECK_THROWS_AS(qwalk::diagonal_step(st, spec),
                  qwalk::SupportOverflowError);
  auto d = qwalk::init_density(ic, 1);
  d = qwalk::cptp_step(d, spec);
  CHECK_THROWS_AS(qwalk::cptp_step(d, spec), qwalk::SupportOverflowError);
}

TEST_CASE("coin-label imbalance contracts by r every step") {
  const InitialCondition<double> ic{0.0, 0};
  const NoiseSpec<double> spec(0.5, 0.5);
  const double r = 0.6;  // (1 - 1/4) / (1 + 1/4)
  auto st = qwalk::init_diagonal(ic, 8);
  double prev = qwalk::detail::kahan_sum(st.alpha) -
                qwalk::detail::kahan_sum(st.beta);
  CHECK(prev == 1.0);
  for (int n = 0; n < 8; ++n) {
    st = qwalk::diagonal_step(st, spec);
    const double cur = qwalk::detail::kahan_sum(st.alpha) -
                       qwalk::detail::kahan_sum(st.beta);
    CHECK(cur == doctest::Approx(r * prev).epsilon(1e-12));
    prev = cur;
  }
}

TEST_CASE("zero noise is a pair of decoupled shifts") {
  const InitialCondition<double> ic{kPi / 3, 0};
  const NoiseSpec<double> spec(0.0, 0.5);
  const std::int64_t n = 6;
  const auto st = qwalk::evolve_diagonal(ic, spec, n);
  CHECK(st.alpha[st.window.index_of(n)] ==
        doctest::Approx(0.25).epsilon(1e-15));
  CHECK(st.beta[st.window.index_of(-n)] ==
        doctest::Approx(0.75).epsilon(1e-15));
  CHECK(st.total_mass() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("mass stays normalized over a long run") {
  const InitialCondition<double> ic{kPi / 4, 0};
  const NoiseSpec<double> spec(0.1, 0.5);
  double worst = 0.0;
  qwalk::evolve_diagonal<double>(
      ic, spec, 500, qwalk::kDefaultDiagonalHalfwidthCap,
      [&](const qwalk::DiagonalWalkState<double>& st) {
        worst = std::max(worst, std::abs(st.total_mass() - 1.0));
      });
  CHECK(worst < 1e-13);
}

TEST_CASE("observer sees every step in order") {
  const InitialCondition<double> ic{0.0, 0};
  const NoiseSpec<double> spec(0.5, 0.5);
  std::int64_t expected = 1;
  qwalk::evolve_diagonal<double>(
      ic, spec, 7, qwalk::kDefaultDiagonalHalfwidthCap,
      [&](const qwalk::DiagonalWalkState<double>& st) {
        CHECK(st.step == expected);
        ++expected;
      });
  CHECK(expected == 8);
}

TEST_CASE("dual map is unital on the window interior") {
  const qwalk::LatticeWindow window{0, 5};
  const NoiseSpec<double> spec(0.7, 0.5);
  const std::int64_t w = window.size();
  const qwalk::CMatrix<double> eye =
      qwalk::CMatrix<double>::Identity(2 * w, 2 * w);
  const auto image = qwalk::dual_step_observable(eye, window, spec);
  // Interior sites (one inside each edge) must map to exactly the
  // identity; the edge sites are allowed to be deficient by construction.
  for (std::int64_t i = 0; i < 2 * w; ++i) {
    const std::int64_t site = i % w;
    if (site == 0 || site == w - 1) continue;
    CHECK(std::abs(image(i, i) - Cd(1)) < 1e-14);
    for (std::int64_t j = 0; j < 2 * w; ++j) {
      if (j != i) CHECK(std::abs(image(i, j)) < 1e-14);
    }
  }
}

TEST_CASE("duality pairs the channel with its adjoint") {
  const InitialCondition<double> ic{kPi / 3, 0};
  const NoiseSpec<double> spec(0.5, 0.5);
  // State evolved two steps on a halfwidth-6 window keeps a margin of at
  // least one empty site inside each edge, where the finite-window dual is
  // exact.
  auto rho = qwalk::init_density(ic, 6);
  rho = qwalk::cptp_step(rho, spec);
  rho = qwalk::cptp_step(rho, spec);
  std::mt19937_64 rng(321u);
  for (int trial = 0; trial < 5; ++trial) {
    const auto obs = random_hermitian(rho.dim(), rng);
    const auto evolved = qwalk::cptp_step(rho, spec);
    const auto dual = qwalk::dual_step_observable(obs, rho.window, spec);
    const Cd lhs = (evolved.rho * obs).trace();
    const Cd rhs = (rho.rho * dual).trace();
    CHECK(std::abs(lhs - rhs) < 1e-13);
  }
}

TEST_CASE("coin-label observable contracts by r in one dual step") {
  // <sigma3 (x) 1> after one step equals r cos(2 gamma): eps = 0.5 and
  // gamma = pi/6 give 0.6 * 0.5 = 0.3.
  const InitialCondition<double> ic{kPi / 6, 0};
  const NoiseSpec<double> spec(0.5, 0.5);
  const auto rho = qwalk::init_density(ic, 3);
  const std::int64_t w = rho.sites();
  qwalk::CMatrix<double> coin_label =
      qwalk::CMatrix<double>::Zero(2 * w, 2 * w);
  coin_label.topLeftCorner(w, w).setIdentity();
  coin_label.bottomRightCorner(w, w) =
      -qwalk::CMatrix<double>::Identity(w, w);
  const auto dual = qwalk::dual_step_observable(coin_label, rho.window, spec);
  const double expect = (rho.rho * dual).trace().real();
  CHECK(expect == doctest::Approx(0.3).epsilon(1e-14));
}

}  // TEST_SUITE("evolution")
