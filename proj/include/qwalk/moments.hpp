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

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "qwalk/evolution.hpp"
#include "qwalk/types.hpp"
#include "qwalk/walk_state.hpp"

namespace qwalk {

/// Coin-resolved position moments of order p: A = sum_k alpha[k] k^p,
/// B = sum_k beta[k] k^p, with S = A + B and D = A - B exactly as computed.
template <typename Scalar = double>
struct MomentRecord {
  std::int64_t step = 0;
  int order = 0;
  Scalar a{};
  Scalar b{};
  Scalar s{};
  Scalar d{};
};

/// Contraction ratio of the coin-label imbalance: one step multiplies
/// sum_k (alpha[k] - beta[k]) by exactly r = (1 - eps^2) / (1 + eps^2).
template <typename Scalar = double>
struct RatioR {
  Scalar r{1};
};

template <typename Scalar>
RatioR<Scalar> ratio_r(const NoiseSpec<Scalar>& spec) {
  const Scalar e = spec.epsilon * spec.epsilon;
  return RatioR<Scalar>{(Scalar(1) - e) / (Scalar(1) + e)};
}

namespace detail {

// log r, computed from eps without forming r (accurate for small eps).
template <typename Scalar>
Scalar log_ratio_r(Scalar eps) {
  const Scalar e = eps * eps;
  return std::log1p(-e) - std::log1p(e);
}

// r^N; switches to log space once N |log r| is large so long runs decay to
// zero gracefully instead of losing precision in repeated multiplication.
template <typename Scalar>
Scalar pow_ratio_r(Scalar eps, std::int64_t n) {
  if (n == 0) return Scalar(1);
  if (eps == Scalar(0)) return Scalar(1);
  const Scalar e = eps * eps;
  if (e == Scalar(1)) return Scalar(0);
  if (e > Scalar(1)) {
    return std::pow((Scalar(1) - e) / (Scalar(1) + e), Scalar(n));
  }
  const Scalar lr = log_ratio_r(eps);
  if (Scalar(n) * std::abs(lr) > Scalar(700)) {
    return std::exp(Scalar(n) * lr);
  }
  return std::pow((Scalar(1) - e) / (Scalar(1) + e), Scalar(n));
}

// 1 - r^N at full relative precision (expm1 in log space).
template <typename Scalar>
Scalar one_minus_pow_r(Scalar eps, std::int64_t n) {
  if (n == 0 || eps == Scalar(0)) return Scalar(0);
  const Scalar e = eps * eps;
  if (e == Scalar(1)) return Scalar(1);
  if (e > Scalar(1)) return Scalar(1) - pow_ratio_r(eps, n);
  return -std::expm1(Scalar(n) * log_ratio_r(eps));
}

// (1 - r^N) / (1 - r), the geometric sum 1 + r + ... + r^{N-1}; N at eps=0.
template <typename Scalar>
Scalar geometric_sum_r(Scalar eps, std::int64_t n) {
  if (eps == Scalar(0)) return Scalar(n);
  const Scalar e = eps * eps;
  const Scalar one_minus_r = Scalar(2) * e / (Scalar(1) + e);
  return one_minus_pow_r(eps, n) / one_minus_r;
}

template <typename Scalar>
void require_closed_form_domain(const NoiseSpec<Scalar>& spec,
                                std::int64_t n, const char* who) {
  if (n < 0) throw Error(std::string(who) + ": step count must be >= 0");
  if (!spec.unbiased()) {
    throw ClosedFormError(std::string(who) +
                          ": closed forms hold for the unbiased walk "
                          "(q_plus = 1/2) only");
  }
}

}  // namespace detail

/// Position moments of a diagonal state by direct (compensated) summation.
template <typename Scalar>
MomentRecord<Scalar> numeric_moments(const DiagonalWalkState<Scalar>& st,
                                     int order) {
  if (order < 0) throw Error("numeric_moments: order must be >= 0");
  const std::int64_t w = st.window.size();
  Scalar a{}, ac{}, b{}, bc{};
  for (std::int64_t i = 0; i < w; ++i) {
    const Scalar k = static_cast<Scalar>(st.window.site_of(i));
    Scalar kp;
    switch (order) {
      case 0: kp = Scalar(1); break;
      case 1: kp = k; break;
      case 2: kp = k * k; break;
      default: kp = std::pow(k, Scalar(order)); break;
    }
    // Kahan-compensated accumulation keeps the zeroth moment honest at the
    // 1e-12 level even on very wide windows.
    Scalar y = st.alpha[i] * kp - ac;
    Scalar t = a + y;
    ac = (t - a) - y;
    a = t;
    y = st.beta[i] * kp - bc;
    t = b + y;
    bc = (t - b) - y;
    b = t;
  }
  MomentRecord<Scalar> m;
  m.step = st.step;
  m.order = order;
  m.a = a;
  m.b = b;
  m.s = a + b;
  m.d = a - b;
  return m;
}

/// Orders 0, 1 and 2 in a single pass.
template <typename Scalar>
std::array<MomentRecord<Scalar>, 3> numeric_moments_012(
    const DiagonalWalkState<Scalar>& st) {
  const std::int64_t w = st.window.size();
  Scalar acc[6] = {};
  Scalar carry[6] = {};
  for (std::int64_t i = 0; i < w; ++i) {
    const Scalar k = static_cast<Scalar>(st.window.site_of(i));
    const Scalar kp[3] = {Scalar(1), k, k * k};
    const Scalar v[2] = {st.alpha[i], st.beta[i]};
    for (int c = 0; c < 2; ++c) {
      for (int p = 0; p < 3; ++p) {
        const int j = c * 3 + p;
        const Scalar y = v[c] * kp[p] - carry[j];
        const Scalar t = acc[j] + y;
        carry[j] = (t - acc[j]) - y;
        acc[j] = t;
      }
    }
  }
  std::array<MomentRecord<Scalar>, 3> out;
  for (int p = 0; p < 3; ++p) {
    out[p].step = st.step;
    out[p].order = p;
    out[p].a = acc[p];
    out[p].b = acc[3 + p];
    out[p].s = out[p].a + out[p].b;
    out[p].d = out[p].a - out[p].b;
  }
  return out;
}

/// Closed-form zeroth moments of the unbiased walk:
///   A_N = (1 + r^N cos 2gamma) / 2,  B_N = 1 - A_N (exact complement).
template <typename Scalar>
MomentRecord<Scalar> closed_form_zeroth(std::int64_t n,
                                        const NoiseSpec<Scalar>& spec,
                                        Scalar gamma) {
  detail::require_closed_form_domain(spec, n, "closed_form_zeroth");
  const Scalar c2g = std::cos(Scalar(2) * gamma);
  const Scalar rn = detail::pow_ratio_r(spec.epsilon, n);
  MomentRecord<Scalar> m;
  m.step = n;
  m.order = 0;
  m.a = (Scalar(1) + rn * c2g) / Scalar(2);
  m.b = Scalar(1) - m.a;
  m.s = m.a + m.b;
  m.d = m.a - m.b;
  return m;
}

/// Closed-form first moments of the unbiased walk:
///   D_N = (1 - r^N)/(1 - r),  S_N = r cos(2gamma) (1 - r^N)/(1 - r),
/// with the eps -> 0 limits D_N = N and S_N = N cos 2gamma.
template <typename Scalar>
MomentRecord<Scalar> closed_form_first(std::int64_t n,
                                       const NoiseSpec<Scalar>& spec,
                                       Scalar gamma) {
  detail::require_closed_form_domain(spec, n, "closed_form_first");
  const Scalar c2g = std::cos(Scalar(2) * gamma);
  const Scalar r = ratio_r(spec).r;
  const Scalar gsum = detail::geometric_sum_r(spec.epsilon, n);
  MomentRecord<Scalar> m;
  m.step = n;
  m.order = 1;
  m.d = gsum;
  m.s = r * c2g * gsum;
  m.a = (m.s + m.d) / Scalar(2);
  m.b = (m.s - m.d) / Scalar(2);
  return m;
}

/// Closed-form second moments of the unbiased walk:
///   S_N = N (1+r)/(1-r) - 2 r (1 - r^N)/(1-r)^2
///   D_N = cos(2gamma) [ 2 r (1 - r^N)/(1-r)^2 - N r^N (1+r)/(1-r) ]
/// evaluated through the identities (1+r)/(1-r) = 1/eps^2 and
/// 2r/(1-r)^2 = (1 - eps^4)/(2 eps^4), which avoid cancellation; the
/// eps -> 0 limits are S_N = N^2 and D_N = N^2 cos 2gamma.
template <typename Scalar>
MomentRecord<Scalar> closed_form_second(std::int64_t n,
                                        const NoiseSpec<Scalar>& spec,
                                        Scalar gamma) {
  detail::require_closed_form_domain(spec, n, "closed_form_second");
  const Scalar c2g = std::cos(Scalar(2) * gamma);
  MomentRecord<Scalar> m;
  m.step = n;
  m.order = 2;
  if (spec.epsilon == Scalar(0)) {
    m.s = Scalar(n) * Scalar(n);
    m.d = c2g * m.s;
  } else {
    const Scalar e = spec.epsilon * spec.epsilon;
    const Scalar omrn = detail::one_minus_pow_r(spec.epsilon, n);
    const Scalar rn = detail::pow_ratio_r(spec.epsilon, n);
    const Scalar coef = (Scalar(1) - e * e) / (Scalar(2) * e * e);
    m.s = Scalar(n) / e - coef * omrn;
    m.d = c2g * (coef * omrn - Scalar(n) * rn / e);
  }
  m.a = (m.s + m.d) / Scalar(2);
  m.b = (m.s - m.d) / Scalar(2);
  return m;
}

/// The decay factor (1 - eps^2)^{N+1} / (1 + eps^2)^{N-1} that appears in
/// the explicit second-moment formula.  For N eps^2 << 1 it expands as
/// 1 - 2 N eps^2 + (2 N^2 - 1) eps^4 + O((N eps^2)^3).
template <typename Scalar>
Scalar explicit_decay_factor(Scalar eps, std::int64_t n) {
  const Scalar e = eps * eps;
  if (e == Scalar(1)) return Scalar(0);
  if (e > Scalar(1)) {
    return std::pow(Scalar(1) - e, Scalar(n + 1)) /
           std::pow(Scalar(1) + e, Scalar(n - 1));
  }
  return std::exp(Scalar(n + 1) * std::log1p(-e) -
                  Scalar(n - 1) * std::log1p(e));
}

/// Sign convention of the decay-factor term in the explicit second-moment
/// formula.  The minus variant is kept deliberately: it fails the exact
/// one-step value S_1 = 1 and the test suite asserts that failure, so the
/// corrected plus sign cannot regress silently.
enum class ExplicitSign { corrected_plus, printed_minus };

/// Explicit eps-form of the second moment,
///   S_N = (1/(2 eps^4)) (2 N eps^2 - 1 + eps^4 +- F),
/// F = explicit_decay_factor.  With the corrected plus sign this is
/// algebraically identical to closed_form_second; it is evaluated through
/// expm1 so the small-N eps^2 cancellation costs no accuracy.
template <typename Scalar>
Scalar second_moment_explicit(std::int64_t n, Scalar eps, ExplicitSign sign) {
  if (n < 0) throw Error("second_moment_explicit: step count must be >= 0");
  const Scalar e = eps * eps;
  if (e == Scalar(0)) {
    if (sign == ExplicitSign::printed_minus) {
      throw ClosedFormError(
          "second_moment_explicit: the printed minus variant has no finite "
          "eps -> 0 limit");
    }
    return Scalar(n) * Scalar(n);
  }
  const Scalar e2 = e * e;
  if (sign == ExplicitSign::printed_minus) {
    const Scalar f = explicit_decay_factor(eps, n);
    return (Scalar(2) * Scalar(n) * e - Scalar(1) + e2 - f) / (Scalar(2) * e2);
  }
  Scalar one_minus_f;
  if (e < Scalar(1)) {
    one_minus_f = -std::expm1(Scalar(n + 1) * std::log1p(-e) -
                              Scalar(n - 1) * std::log1p(e));
  } else {
    one_minus_f = Scalar(1) - explicit_decay_factor(eps, n);
  }
  return (Scalar(2) * Scalar(n) * e + e2 - one_minus_f) / (Scalar(2) * e2);
}

enum class Regime { ballistic, crossover, diffusive };

inline const char* regime_label(Regime r) {
  switch (r) {
    case Regime::ballistic: return "ballistic";
    case Regime::crossover: return "crossover";
    default: return "diffusive";
  }
}

/// Coarse regime tag from the scaling variable N eps^2 (ballistic below
/// 0.1, diffusive above 10).
template <typename Scalar>
Regime regime_classify(std::int64_t n, Scalar eps) {
  if (n < 1) throw Error("regime_classify: step count must be >= 1");
  if (!(eps >= Scalar(0))) throw Error("regime_classify: eps must be >= 0");
  const Scalar x = Scalar(n) * eps * eps;
  if (x < Scalar(0.1)) return Regime::ballistic;
  if (x > Scalar(10)) return Regime::diffusive;
  return Regime::crossover;
}

template <typename Scalar = double>
struct ScanRow {
  std::int64_t n = 0;
  Scalar s0{}, d0{}, s1{}, d1{}, s2{}, d2{};
  Scalar s2_closed_r{};
  Scalar s2_closed_eps{};
  Scalar slope{std::numeric_limits<Scalar>::quiet_NaN()};
  Regime regime{Regime::ballistic};
};

template <typename Scalar = double>
struct CrossoverScan {
  NoiseSpec<Scalar> spec;
  Scalar gamma{};
  RatioR<Scalar> r;
  std::vector<ScanRow<Scalar>> rows;
  std::optional<std::int64_t> n_star;  // first N with slope below 1.5
};

/// Evolves the diagonal walk once to n_max, recording numeric moments,
/// closed forms and the log-log slope of the second moment per step.  The
/// slope is a central difference on the recorded series (undefined at the
/// endpoints); n_star is the first step where it drops below 3/2, the
/// midpoint between ballistic (2) and diffusive (1) growth.
template <typename Scalar>
CrossoverScan<Scalar> crossover_scan(
    const NoiseSpec<Scalar>& spec, Scalar gamma, std::int64_t n_max,
    std::int64_t halfwidth_cap = kDefaultDiagonalHalfwidthCap) {
  if (n_max < 1) throw Error("crossover_scan: n_max must be >= 1");
  detail::require_closed_form_domain(spec, n_max, "crossover_scan");
  CrossoverScan<Scalar> scan;
  scan.spec = spec;
  scan.gamma = gamma;
  scan.r = ratio_r(spec);
  scan.rows.reserve(n_max);
  const InitialCondition<Scalar> ic{gamma, 0};
  evolve_diagonal<Scalar>(
      ic, spec, n_max, halfwidth_cap,
      [&](const DiagonalWalkState<Scalar>& st) {
        const auto m = numeric_moments_012(st);
        ScanRow<Scalar> row;
        row.n = st.step;
        row.s0 = m[0].s;
        row.d0 = m[0].d;
        row.s1 = m[1].s;
        row.d1 = m[1].d;
        row.s2 = m[2].s;
        row.d2 = m[2].d;
        row.s2_closed_r = closed_form_second(st.step, spec, gamma).s;
        row.s2_closed_eps = second_moment_explicit(
            st.step, spec.epsilon, ExplicitSign::corrected_plus);
        row.regime = regime_classify(st.step, spec.epsilon);
        scan.rows.push_back(row);
      });
  for (std::size_t i = 1; i + 1 < scan.rows.size(); ++i) {
    const auto& lo = scan.rows[i - 1];
    const auto& hi = scan.rows[i + 1];
    scan.rows[i].slope = (std::log(hi.s2) - std::log(lo.s2)) /
                         (std::log(Scalar(hi.n)) - std::log(Scalar(lo.n)));
    if (!scan.n_star && scan.rows[i].slope < Scalar(1.5)) {
      scan.n_star = scan.rows[i].n;
    }
  }
  return scan;
}

}  // namespace qwalk
