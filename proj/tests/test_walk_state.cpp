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

#include "qwalk/walk_state.hpp"

#include <cmath>
#include <numbers>

#include "doctest.h"

using qwalk::LatticeWindow;

TEST_SUITE("walk_state") {

TEST_CASE("window geometry round-trips site indices") {
  const LatticeWindow w{3, 5};
  CHECK(w.size() == 11);
  CHECK(w.first_site() == -2);
  CHECK(w.last_site() == 8);
  CHECK(w.contains(0));
  CHECK(w.contains(-2));
  CHECK(w.contains(8));
  CHECK(!w.contains(-3));
  CHECK(!w.contains(9));
  for (std::int64_t i = 0; i < w.size(); ++i) {
    CHECK(w.index_of(w.site_of(i)) == i);
  }
  CHECK(w == LatticeWindow{3, 5});
  CHECK(!(w == LatticeWindow{3, 4}));
}

TEST_CASE("initial coin weights are an exact complement") {
  for (const double gamma :
       {0.0, 0.3, std::numbers::pi / 4, std::numbers::pi / 3, 1.5}) {
    const qwalk::InitialCondition<double> ic{gamma, 0};
    const double c = std::cos(gamma);
    CHECK(ic.coin_up_weight() == c * c);
    // The down weight is defined as 1 - up, so the sum is exactly 1 and
    // no rounding drift enters the recurrence's mass balance.
    CHECK(ic.coin_up_weight() + ic.coin_down_weight() == 1.0);
  }
  const qwalk::InitialCondition<double> polar{0.0, 2};
  CHECK(polar.coin_up_weight() == 1.0);
  CHECK(polar.coin_down_weight() == 0.0);
}

TEST_CASE("diagonal initial state is a delta at the origin") {
  const qwalk::InitialCondition<double> ic{std::numbers::pi / 3, 5};
  const auto st = qwalk::init_diagonal(ic, 4);
  CHECK(st.step == 0);
  CHECK(st.window == LatticeWindow{5, 4});
  CHECK(st.alpha[4] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(st.beta[4] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(st.total_mass() == 1.0);
  CHECK(st.alpha.sum() + st.beta.sum() - st.alpha[4] - st.beta[4] == 0.0);
}

TEST_CASE("init rejects capacities beyond the cap") {
  const qwalk::InitialCondition<double> ic{0.0, 0};
  CHECK_THROWS_AS(qwalk::init_diagonal(ic, 100, 50), qwalk::CapacityError);
  CHECK_THROWS_AS(qwalk::init_density(ic, 100), qwalk::CapacityError);
  CHECK_THROWS_AS(qwalk::init_pure(0, 0, 100, 50), qwalk::CapacityError);
  CHECK_THROWS_AS(qwalk::init_diagonal(ic, -1), qwalk::Error);
}

TEST_CASE("dense initial state is a valid density") {
  const qwalk::InitialCondition<double> ic{0.9, 0};
  const auto d = qwalk::init_density(ic, 3);
  CHECK(d.sites() == 7);
  CHECK(d.dim() == 14);
  CHECK(d.trace_real() == doctest::Approx(1.0).epsilon(1e-15));
  const auto res = qwalk::density_residuals(d);
  CHECK(res.hermiticity == 0.0);
  CHECK(res.trace_deviation < 1e-15);
  CHECK(res.min_eigenvalue >= -1e-15);
}

TEST_CASE("pure initial state occupies one amplitude slot") {
  const auto p = qwalk::init_pure(1, -2, 3);
  CHECK(p.window == LatticeWindow{-2, 3});
  CHECK(p.amps.squaredNorm() == 1.0);
  CHECK(p.amps[7 + 3] == std::complex<double>(1));
  CHECK(p.down()[3] == std::complex<double>(1));
  CHECK(p.up().squaredNorm() == 0.0);
  CHECK_THROWS_AS(qwalk::init_pure(2, 0, 3), qwalk::Error);
}

TEST_CASE("position distribution sums the coin components") {
  const qwalk::InitialCondition<double> ic{0.7, 0};
  auto st = qwalk::init_diagonal(ic, 2);
  st.alpha[0] = 0.1;
  const auto p = qwalk::position_distribution(st);
  CHECK(p.size() == st.window.size());
  CHECK(p[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(p[2] ==
        doctest::Approx(st.alpha[2] + st.beta[2]).epsilon(1e-15));
}

TEST_CASE("negative weight beyond the tolerance is rejected") {
  const qwalk::InitialCondition<double> ic{0.0, 0};
  auto st = qwalk::init_diagonal(ic, 2);
  st.alpha[0] = -1e-10;
  CHECK_THROWS_AS(qwalk::position_distribution(st), qwalk::Error);
  // Sub-tolerance rounding noise is clamped to zero instead.
  st.alpha[0] = -1e-15;
  const auto p = qwalk::position_distribution(st);
  CHECK(p[0] == 0.0);
}

TEST_CASE("coin partial trace preserves the diagonal weights") {
  const qwalk::InitialCondition<double> ic{std::numbers::pi / 4, 0};
  const auto d = qwalk::init_density(ic, 2);
  const auto w = qwalk::partial_trace_coin(d);
  CHECK(w.rows() == d.sites());
  CHECK(std::abs(w.trace().real() - 1.0) < 1e-15);
  CHECK(w(2, 2).real() == doctest::Approx(1.0).epsilon(1e-15));
  const auto p = qwalk::position_distribution(d);
  for (std::int64_t i = 0; i < d.sites(); ++i) {
    CHECK(std::abs(w(i, i).real() - p[i]) < 1e-15);
  }
}

TEST_CASE("compensated summation tracks wide windows") {
  qwalk::RealArray<double> xs(10001);
  for (std::int64_t i = 0; i < xs.size(); ++i) {
    xs[i] = 0.1;
  }
  CHECK(std::abs(qwalk::detail::kahan_sum(xs) - 1000.1) < 1e-12);
}

}  // TEST_SUITE("walk_state")
