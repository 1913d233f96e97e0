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

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qwalk/qwalk.hpp"

namespace {

// Exit codes: 0 ok, 2 invalid configuration, 3 window overflow or capacity,
// 4 verification failure.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitOverflow = 3;
constexpr int kExitVerify = 4;

struct CommonOpts {
  double epsilon = 0.5;
  double gamma = 0.0;
  std::optional<double> gamma_deg;
  double q_plus = 0.5;
  std::int64_t steps = 0;
  std::string out = "-";
  std::string format = "csv";
};

void add_common_options(CLI::App* cmd, CommonOpts* o, bool needs_steps) {
  cmd->add_option("--epsilon", o->epsilon, "Noise strength of the coin kick");
  auto* g = cmd->add_option("--gamma", o->gamma,
                            "Initial coin mixing angle, radians in [0, pi)");
  auto* gd = cmd->add_option("--gamma-deg", o->gamma_deg,
                             "Initial coin mixing angle in degrees");
  g->excludes(gd);
  cmd->add_option("--qplus", o->q_plus, "Probability of the + branch sign");
  auto* s = cmd->add_option("--steps", o->steps, "Number of walk steps");
  if (needs_steps) s->required();
  cmd->add_option("--out", o->out, "Output path ('-' for stdout)");
  cmd->add_option("--format", o->format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
}

double resolved_gamma(const CommonOpts& o) {
  const double gamma =
      o.gamma_deg ? *o.gamma_deg * std::numbers::pi / 180.0 : o.gamma;
  if (!(gamma >= 0.0 && gamma < std::numbers::pi)) {
    throw qwalk::Error("gamma must lie in [0, pi)");
  }
  return gamma;
}

void require_positive_epsilon(const CommonOpts& o) {
  if (!(o.epsilon > 0.0)) {
    throw qwalk::Error(
        "epsilon must be > 0 here (epsilon = 0 is meaningful only for the "
        "closed-form evaluators of the moments subcommand)");
  }
}

std::optional<std::int64_t> env_window_cap() {
  const char* s = std::getenv("QWALK_MAX_WINDOW");
  if (s == nullptr || *s == '\0') return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s, &end, 10);
  if (errno != 0 || end == s || *end != '\0' || v < 0) {
    throw qwalk::Error("QWALK_MAX_WINDOW must be a nonnegative integer");
  }
  return static_cast<std::int64_t>(v);
}

template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream os(path);
  if (!os) {
    throw qwalk::Error("cannot open output file: " + path);
  }
  fn(os);
}

qwalk::MetadataLines config_echo(double eps, double gamma, double qp,
                                 const std::string& mode) {
  return {{"epsilon", qwalk::format_full(eps)},
          {"gamma", qwalk::format_full(gamma)},
          {"q_plus", qwalk::format_full(qp)},
          {"mode", mode}};
}

int run_evolve(const CommonOpts& o, const std::string& mode) {
  require_positive_epsilon(o);
  const double gamma = resolved_gamma(o);
  const qwalk::NoiseSpec<double> noise(o.epsilon, o.q_plus);
  const qwalk::InitialCondition<double> ic{gamma, 0};
  const auto cap = env_window_cap();
  if (mode == "diagonal") {
    if (!noise.unbiased()) {
      throw qwalk::Error(
          "diagonal mode evolves the unbiased walk (qplus = 0.5); use "
          "--mode dense for biased branch weights");
    }
    const auto st = qwalk::evolve_diagonal(
        ic, noise, o.steps,
        cap.value_or(qwalk::kDefaultDiagonalHalfwidthCap));
    with_output(o.out, [&](std::ostream& os) {
      if (o.format == "json") {
        qwalk::Json j = qwalk::state_to_json(st);
        j["config"] = {{"epsilon", o.epsilon},
                       {"gamma", gamma},
                       {"q_plus", o.q_plus},
                       {"mode", mode}};
        os << j.dump(2) << "\n";
      } else {
        qwalk::write_state_csv(os, st,
                               config_echo(o.epsilon, gamma, o.q_plus, mode));
      }
    });
  } else {
    const auto d = qwalk::evolve_dense(
        ic, noise, o.steps, cap.value_or(qwalk::kDefaultDenseHalfwidthCap));
    const auto probs = qwalk::position_distribution(d);
    with_output(o.out, [&](std::ostream& os) {
      if (o.format == "json") {
        qwalk::Json j;
        j["version"] = qwalk::kVersion;
        j["step"] = d.step;
        j["window"] = {{"center", d.window.center},
                       {"halfwidth", d.window.halfwidth}};
        std::vector<double> p(probs.data(), probs.data() + probs.size());
        j["p"] = p;
        j["config"] = {{"epsilon", o.epsilon},
                       {"gamma", gamma},
                       {"q_plus", o.q_plus},
                       {"mode", mode}};
        os << j.dump(2) << "\n";
      } else {
        qwalk::MetadataLines meta =
            config_echo(o.epsilon, gamma, o.q_plus, mode);
        meta.emplace_back("step", std::to_string(d.step));
        qwalk::write_position_csv(os, d.window, probs, meta);
      }
    });
  }
  return kExitOk;
}

int run_moments(const CommonOpts& o) {
  const double gamma = resolved_gamma(o);
  if (!(o.epsilon >= 0.0)) {
    throw qwalk::Error("epsilon must be >= 0");
  }
  const qwalk::NoiseSpec<double> noise(o.epsilon, o.q_plus);
  if (!noise.unbiased()) {
    throw qwalk::Error(
        "the moment closed forms hold for the unbiased walk; qplus must be "
        "0.5");
  }
  if (o.steps < 1) {
    throw qwalk::Error("moments: steps must be >= 1");
  }
  const auto cap = env_window_cap();
  const auto scan = qwalk::crossover_scan(
      noise, gamma, o.steps,
      cap.value_or(qwalk::kDefaultDiagonalHalfwidthCap));
  with_output(o.out, [&](std::ostream& os) {
    if (o.format == "json") {
      os << qwalk::scan_to_json(scan).dump(2) << "\n";
    } else {
      qwalk::write_scan_csv(os, scan);
    }
  });
  return kExitOk;
}

int run_trajectories(const CommonOpts& o, std::int64_t n_traj,
                     std::uint64_t seed, bool parallel, int threads,
                     const std::string& dist_out) {
  require_positive_epsilon(o);
  const double gamma = resolved_gamma(o);
  if (o.steps < 1) {
    throw qwalk::Error("trajectories: steps must be >= 1");
  }
  const auto cap = env_window_cap();
  if (cap && o.steps > *cap) {
    throw qwalk::CapacityError(
        "trajectories: steps exceed QWALK_MAX_WINDOW");
  }
  qwalk::TrajectorySpec<double> spec;
  spec.n_traj = n_traj;
  spec.seed = seed;
  spec.steps = o.steps;
  spec.noise = qwalk::NoiseSpec<double>(o.epsilon, o.q_plus);
  spec.ic = qwalk::InitialCondition<double>{gamma, 0};
  qwalk::EnsembleOptions opts;
  opts.parallel = parallel;
  opts.threads = threads;
  const auto rep = qwalk::ensemble_average(spec, opts);
  if (!dist_out.empty()) {
    with_output(dist_out,
                [&](std::ostream& os) { qwalk::write_ensemble_csv(os, rep); });
  }
  with_output(o.out, [&](std::ostream& os) {
    if (o.format == "csv") {
      qwalk::write_ensemble_csv(os, rep);
    } else {
      qwalk::Json j = qwalk::trajectory_report_to_json(rep);
      if (!dist_out.empty()) j["distribution_csv"] = dist_out;
      os << j.dump(2) << "\n";
    }
  });
  return kExitOk;
}

int run_verify(double tol, std::uint64_t seed, std::int64_t halfwidth,
               int n_states, int n_unitaries, const std::string& out,
               const std::string& format) {
  const auto coset = qwalk::coset_property_suite<double>(n_unitaries, seed);
  const std::vector<double> eps_grid = {0.1, 0.5, 0.9, 1.0};
  const std::vector<double> q_grid = {0.3, 0.5, 0.8};
  const auto dilation = qwalk::equivalence_check<double>(
      eps_grid, q_grid, n_states, halfwidth, seed + 1, {0, 1});
  const double worst = std::max(coset.worst(), dilation.worst_deviation());
  const bool pass = worst < tol;

  if (format == "json") {
    with_output(out, [&](std::ostream& os) {
      qwalk::Json j;
      j["version"] = qwalk::kVersion;
      j["tolerance"] = tol;
      j["seed"] = seed;
      j["coin_coset"] = qwalk::coset_suite_to_json(coset);
      j["dilation"] = qwalk::equivalence_report_to_json(dilation);
      j["pass"] = pass;
      os << j.dump(2) << "\n";
    });
  } else {
    with_output(out, [&](std::ostream& os) {
      os << "coin coset suite over " << coset.n_unitaries
         << " random unitaries\n";
      os << "  two-route probability dev : "
         << qwalk::format_full(coset.max_two_route_dev) << "\n";
      os << "  phase invariance dev      : "
         << qwalk::format_full(coset.max_phase_invariance_dev) << "\n";
      os << "  bistochastic dev          : "
         << qwalk::format_full(coset.max_bistochastic_dev) << "\n";
      os << "  reconstruction dev        : "
         << qwalk::format_full(coset.max_reconstruction_dev) << "\n";
      os << "  unitarity residual        : "
         << qwalk::format_full(coset.max_unitarity_residual) << "\n";
      os << "dilation equivalence, halfwidth " << dilation.halfwidth << ", "
         << n_states << " states per point\n";
      for (const auto& p : dilation.points) {
        os << "  eps " << qwalk::format_full(p.epsilon) << "  qplus "
           << qwalk::format_full(p.q_plus) << "  aux " << p.aux_state
           << "  trace-norm dev " << qwalk::format_full(
                  p.max_trace_norm_deviation)
           << "  Y residual " << qwalk::format_full(p.y_unitarity_residual)
           << "\n";
      }
      os << "worst residual = " << qwalk::format_full(worst)
         << "  tolerance = " << qwalk::format_full(tol) << "\n";
      os << "verify: " << (pass ? "PASS" : "FAIL") << "\n";
    });
  }
  return pass ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qwalk: noisy discrete-time quantum walk on the line "
      "(exact channel evolution, moments, trajectory averaging, "
      "single-ancilla verification)"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qwalk::kVersion));

  CommonOpts evolve_opts;
  std::string mode = "diagonal";
  auto* evolve = app.add_subcommand(
      "evolve", "Evolve the noise-averaged walk and write the state");
  add_common_options(evolve, &evolve_opts, /*needs_steps=*/true);
  evolve->add_option("--mode", mode, "Evolution backend")
      ->check(CLI::IsMember({"diagonal", "dense"}));

  CommonOpts moments_opts;
  auto* moments = app.add_subcommand(
      "moments", "Scan position moments against the closed forms");
  add_common_options(moments, &moments_opts, /*needs_steps=*/true);

  CommonOpts traj_opts;
  traj_opts.format = "json";
  std::int64_t n_traj = 10000;
  std::uint64_t traj_seed = 12345;
  bool parallel = false;
  int threads = 0;
  std::string dist_out;
  auto* traj = app.add_subcommand(
      "trajectories", "Monte Carlo average over branch-sign histories");
  add_common_options(traj, &traj_opts, /*needs_steps=*/true);
  traj->add_option("--ntraj", n_traj, "Number of sampled trajectories");
  traj->add_option("--seed", traj_seed, "Master seed of the ensemble");
  traj->add_flag("--parallel", parallel,
                 "Deterministically chunked multi-threaded accumulation");
  traj->add_option("--threads", threads,
                   "Worker thread count for --parallel (0 = hardware)");
  traj->add_option("--dist-out", dist_out,
                   "Also write the averaged distribution CSV here");

  double tol = 1e-12;
  std::uint64_t verify_seed = 715517;
  std::int64_t halfwidth = 6;
  int n_states = 20;
  int n_unitaries = 1000;
  std::string verify_out = "-";
  std::string verify_format = "text";
  auto* verify = app.add_subcommand(
      "verify", "Run the algebraic property suites and report residuals");
  verify->add_option("--tol", tol, "Residual tolerance for the verdict");
  verify->add_option("--seed", verify_seed, "Seed of the random draws");
  verify->add_option("--halfwidth", halfwidth,
                     "Window halfwidth of the dense dilation check");
  verify->add_option("--n-states", n_states,
                     "Random densities per grid point");
  verify->add_option("--n-unitaries", n_unitaries,
                     "Random unitaries for the coin coset suite");
  verify->add_option("--out", verify_out, "Output path ('-' for stdout)");
  verify->add_option("--format", verify_format, "Output format")
      ->check(CLI::IsMember({"text", "json"}));

  int rc = kExitOk;
  evolve->callback([&] { rc = run_evolve(evolve_opts, mode); });
  moments->callback([&] { rc = run_moments(moments_opts); });
  traj->callback([&] {
    rc = run_trajectories(traj_opts, n_traj, traj_seed, parallel, threads,
                          dist_out);
  });
  verify->callback([&] {
    rc = run_verify(tol, verify_seed, halfwidth, n_states, n_unitaries,
                    verify_out, verify_format);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  } catch (const qwalk::SupportOverflowError& e) {
    std::cerr << "qwalk: " << e.what() << "\n";
    return kExitOverflow;
  } catch (const qwalk::CapacityError& e) {
    std::cerr << "qwalk: " << e.what() << "\n";
    return kExitOverflow;
  } catch (const qwalk::Error& e) {
    std::cerr << "qwalk: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "qwalk: " << e.what() << "\n";
    return kExitConfig;
  }
  return rc;
}
