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
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qwalk/dilation.hpp"
#include "qwalk/moments.hpp"
#include "qwalk/trajectories.hpp"
#include "qwalk/types.hpp"
#include "qwalk/walk_state.hpp"

namespace qwalk {

using Json = nlohmann::json;

/// Shortest text form that round-trips a double exactly.
template <typename Scalar>
std::string format_full(Scalar v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(v));
  return buf;
}

using MetadataLines = std::vector<std::pair<std::string, std::string>>;

/// Comment header convention shared by all CSV writers: one "# key = value"
/// line per entry, before the column header.
inline void write_metadata(std::ostream& os, const MetadataLines& lines) {
  for (const auto& [key, value] : lines) {
    os << "# " << key << " = " << value << "\n";
  }
}

/// CSV dump of a diagonal state: columns k, alpha, beta, total.
template <typename Scalar>
void write_state_csv(std::ostream& os, const DiagonalWalkState<Scalar>& st,
                     const MetadataLines& extra = {}) {
  MetadataLines meta = {{"format", "qwalk diagonal state"},
                        {"version", kVersion},
                        {"step", std::to_string(st.step)},
                        {"window_center", std::to_string(st.window.center)},
                        {"window_halfwidth",
                         std::to_string(st.window.halfwidth)}};
  meta.insert(meta.end(), extra.begin(), extra.end());
  write_metadata(os, meta);
  os << "k,alpha,beta,total\n";
  for (std::int64_t i = 0; i < st.window.size(); ++i) {
    os << st.window.site_of(i) << ',' << format_full(st.alpha[i]) << ','
       << format_full(st.beta[i]) << ','
       << format_full(st.alpha[i] + st.beta[i]) << "\n";
  }
}

/// CSV dump of a position distribution: columns k, p.
template <typename Scalar>
void write_position_csv(std::ostream& os, const LatticeWindow& window,
                        const RealArray<Scalar>& probs,
                        const MetadataLines& extra = {}) {
  if (probs.size() != window.size()) {
    throw Error("write_position_csv: distribution does not match the window");
  }
  MetadataLines meta = {{"format", "qwalk position distribution"},
                        {"version", kVersion},
                        {"window_center", std::to_string(window.center)},
                        {"window_halfwidth",
                         std::to_string(window.halfwidth)}};
  meta.insert(meta.end(), extra.begin(), extra.end());
  write_metadata(os, meta);
  os << "k,p\n";
  for (std::int64_t i = 0; i < window.size(); ++i) {
    os << window.site_of(i) << ',' << format_full(probs[i]) << "\n";
  }
}

template <typename Scalar>
Json state_to_json(const DiagonalWalkState<Scalar>& st) {
  Json j;
  j["version"] = kVersion;
  j["step"] = st.step;
  j["window"] = {{"center", st.window.center},
                 {"halfwidth", st.window.halfwidth}};
  std::vector<double> alpha(st.alpha.size()), beta(st.beta.size());
  for (std::int64_t i = 0; i < st.alpha.size(); ++i) {
    alpha[static_cast<std::size_t>(i)] = static_cast<double>(st.alpha[i]);
    beta[static_cast<std::size_t>(i)] = static_cast<double>(st.beta[i]);
  }
  j["alpha"] = alpha;
  j["beta"] = beta;
  return j;
}

template <typename Scalar = double>
DiagonalWalkState<Scalar> state_from_json(const Json& j) {
  DiagonalWalkState<Scalar> st;
  try {
    st.step = j.at("step").get<std::int64_t>();
    st.window.center = j.at("window").at("center").get<std::int64_t>();
    st.window.halfwidth = j.at("window").at("halfwidth").get<std::int64_t>();
    const auto alpha = j.at("alpha").get<std::vector<double>>();
    const auto beta = j.at("beta").get<std::vector<double>>();
    const auto n = static_cast<std::size_t>(st.window.size());
    if (st.window.halfwidth < 0 || alpha.size() != n || beta.size() != n) {
      throw Error("state_from_json: array lengths do not match the window");
    }
    st.alpha.resize(st.window.size());
    st.beta.resize(st.window.size());
    for (std::size_t i = 0; i < n; ++i) {
      st.alpha[static_cast<std::int64_t>(i)] = static_cast<Scalar>(alpha[i]);
      st.beta[static_cast<std::int64_t>(i)] = static_cast<Scalar>(beta[i]);
    }
  } catch (const Json::exception& e) {
    throw Error(std::string("state_from_json: malformed input: ") + e.what());
  }
  return st;
}

/// CSV dump of a crossover scan, one row per step with numeric moments,
/// both closed-form routes for the second moment, the log-log slope and
/// the regime tag.
template <typename Scalar>
void write_scan_csv(std::ostream& os, const CrossoverScan<Scalar>& scan) {
  MetadataLines meta = {
      {"format", "qwalk crossover scan"},
      {"version", kVersion},
      {"epsilon", format_full(scan.spec.epsilon)},
      {"gamma", format_full(scan.gamma)},
      {"q_plus", format_full(scan.spec.q_plus)},
      {"r", format_full(scan.r.r)},
      {"n_star", scan.n_star ? std::to_string(*scan.n_star) : "none"},
      {"note", "s2_closed_eps uses the corrected plus sign of the decay "
               "term"}};
  write_metadata(os, meta);
  os << "n,s0,d0,s1,d1,s2,d2,s2_closed_r,s2_closed_eps,slope,regime\n";
  for (const auto& row : scan.rows) {
    os << row.n << ',' << format_full(row.s0) << ',' << format_full(row.d0)
       << ',' << format_full(row.s1) << ',' << format_full(row.d1) << ','
       << format_full(row.s2) << ',' << format_full(row.d2) << ','
       << format_full(row.s2_closed_r) << ','
       << format_full(row.s2_closed_eps) << ',' << format_full(row.slope)
       << ',' << regime_label(row.regime) << "\n";
  }
}

template <typename Scalar>
Json scan_to_json(const CrossoverScan<Scalar>& scan) {
  Json j;
  j["version"] = kVersion;
  j["epsilon"] = static_cast<double>(scan.spec.epsilon);
  j["gamma"] = static_cast<double>(scan.gamma);
  j["q_plus"] = static_cast<double>(scan.spec.q_plus);
  j["r"] = static_cast<double>(scan.r.r);
  if (scan.n_star) {
    j["n_star"] = *scan.n_star;
  } else {
    j["n_star"] = nullptr;
  }
  Json rows = Json::array();
  for (const auto& row : scan.rows) {
    Json rj;
    rj["n"] = row.n;
    rj["s0"] = static_cast<double>(row.s0);
    rj["d0"] = static_cast<double>(row.d0);
    rj["s1"] = static_cast<double>(row.s1);
    rj["d1"] = static_cast<double>(row.d1);
    rj["s2"] = static_cast<double>(row.s2);
    rj["d2"] = static_cast<double>(row.d2);
    rj["s2_closed_r"] = static_cast<double>(row.s2_closed_r);
    rj["s2_closed_eps"] = static_cast<double>(row.s2_closed_eps);
    if (std::isfinite(static_cast<double>(row.slope))) {
      rj["slope"] = static_cast<double>(row.slope);
    } else {
      rj["slope"] = nullptr;
    }
    rj["regime"] = regime_label(row.regime);
    rows.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows);
  return j;
}

template <typename Scalar>
Json trajectory_report_to_json(const TrajectoryEnsembleReport<Scalar>& rep) {
  Json j;
  j["version"] = kVersion;
  j["config"] = {{"epsilon", static_cast<double>(rep.spec.noise.epsilon)},
                 {"q_plus", static_cast<double>(rep.spec.noise.q_plus)},
                 {"gamma", static_cast<double>(rep.spec.ic.gamma)},
                 {"origin", rep.spec.ic.origin},
                 {"steps", rep.spec.steps}};
  j["seed"] = rep.spec.seed;
  j["n_traj"] = rep.spec.n_traj;
  j["rng_contract"] = rep.rng_contract;
  j["parallel"] = rep.parallel;
  j["threads"] = rep.threads;
  Json moments = Json::array();
  for (int p = 0; p < 3; ++p) {
    const auto& m = rep.moments[static_cast<std::size_t>(p)];
    Json mj;
    mj["order"] = p;
    mj["estimate"] = static_cast<double>(m.estimate);
    mj["stderr"] = static_cast<double>(m.stderr_);
    if (m.has_exact) {
      mj["exact"] = static_cast<double>(m.exact);
    } else {
      mj["exact"] = nullptr;
    }
    moments.push_back(std::move(mj));
  }
  j["moments"] = std::move(moments);
  if (rep.has_reference) {
    j["tv_distance"] = static_cast<double>(rep.tv_distance);
    j["max_abs_deviation"] = static_cast<double>(rep.max_abs_deviation);
  }
  return j;
}

/// CSV dump of the ensemble-averaged distribution, with the exact column
/// when a reference is available.
template <typename Scalar>
void write_ensemble_csv(std::ostream& os,
                        const TrajectoryEnsembleReport<Scalar>& rep) {
  MetadataLines meta = {
      {"format", "qwalk ensemble distribution"},
      {"version", kVersion},
      {"epsilon", format_full(rep.spec.noise.epsilon)},
      {"gamma", format_full(rep.spec.ic.gamma)},
      {"q_plus", format_full(rep.spec.noise.q_plus)},
      {"steps", std::to_string(rep.spec.steps)},
      {"n_traj", std::to_string(rep.spec.n_traj)},
      {"seed", std::to_string(rep.spec.seed)},
      {"window_center", std::to_string(rep.window.center)},
      {"window_halfwidth", std::to_string(rep.window.halfwidth)}};
  write_metadata(os, meta);
  if (rep.has_reference) {
    os << "k,p_avg,p_exact,abs_dev\n";
    for (std::int64_t i = 0; i < rep.window.size(); ++i) {
      os << rep.window.site_of(i) << ',' << format_full(rep.distribution[i])
         << ',' << format_full(rep.reference[i]) << ','
         << format_full(std::abs(rep.distribution[i] - rep.reference[i]))
         << "\n";
    }
  } else {
    os << "k,p_avg\n";
    for (std::int64_t i = 0; i < rep.window.size(); ++i) {
      os << rep.window.site_of(i) << ',' << format_full(rep.distribution[i])
         << "\n";
    }
  }
}

template <typename Scalar>
Json equivalence_report_to_json(const EquivalenceReport<Scalar>& rep) {
  Json j;
  j["version"] = kVersion;
  j["halfwidth"] = rep.halfwidth;
  j["seed"] = rep.seed;
  Json points = Json::array();
  for (const auto& p : rep.points) {
    points.push_back(
        {{"epsilon", static_cast<double>(p.epsilon)},
         {"q_plus", static_cast<double>(p.q_plus)},
         {"aux_state", p.aux_state},
         {"n_states", p.n_states},
         {"max_trace_norm_deviation",
          static_cast<double>(p.max_trace_norm_deviation)},
         {"y_unitarity_residual",
          static_cast<double>(p.y_unitarity_residual)}});
  }
  j["points"] = std::move(points);
  j["worst_deviation"] = static_cast<double>(rep.worst_deviation());
  return j;
}

template <typename Scalar>
Json coset_suite_to_json(const CosetSuiteResiduals<Scalar>& res) {
  Json j;
  j["version"] = kVersion;
  j["n_unitaries"] = res.n_unitaries;
  j["max_two_route_dev"] = static_cast<double>(res.max_two_route_dev);
  j["max_phase_invariance_dev"] =
      static_cast<double>(res.max_phase_invariance_dev);
  j["max_bistochastic_dev"] = static_cast<double>(res.max_bistochastic_dev);
  j["max_reconstruction_dev"] =
      static_cast<double>(res.max_reconstruction_dev);
  j["max_unitarity_residual"] =
      static_cast<double>(res.max_unitarity_residual);
  j["worst"] = static_cast<double>(res.worst());
  return j;
}

}  // namespace qwalk
