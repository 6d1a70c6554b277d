// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0
//
// dpfl: run one federated experiment, a grid of them, or query the privacy
// accountant.
//
// Exit status: 0 success, 1 configuration / IO / data errors (and any
// failed grid cell), 2 noise calibration failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <omp.h>

#include "CLI11.hpp"
#include "dpfl/errors.hpp"
#include "dpfl/experiment.hpp"
#include "dpfl/privacy.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitCalibration = 2;

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void report(const dpfl::ConfigError& e) {
  std::cerr << "dpfl: invalid configuration:\n";
  for (const auto& issue : e.issues()) std::cerr << "  " << issue << "\n";
}

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int cmd_run(const Common& c) {
  auto config = dpfl::load_experiment_config(c.config);
  if (c.seed) config.seed = *c.seed;
  if (!c.out.empty()) config.output = c.out;
  const auto result = dpfl::run_experiment(config);
  dpfl::write_experiment_outputs(result, config.output);
  for (const auto& w : result.warnings) std::cerr << "dpfl: warning: " << w << "\n";
  std::cout << "output=" << config.output.string() << "\n";
  std::cout << "rounds=" << result.federation.records.size() << "\n";
  if (result.federation.spent) {
    std::cout << "noise_multiplier=" << real(result.federation.noise_multiplier) << "\n";
    std::cout << "epsilon_spent=" << real(result.federation.spent->epsilon) << "\n";
  }
  return 0;
}

int cmd_grid(const Common& c, int parallel) {
  auto plan = dpfl::load_grid(c.config);
  std::filesystem::path root = c.out;
  if (root.empty()) root = plan.cells.empty() ? "out" : plan.cells.front().config.output;
  if (c.seed) {
    for (auto& cell : plan.cells) cell.config.seed = *c.seed + cell.index;
  }
  for (const auto& w : plan.warnings) std::cerr << "dpfl: warning: " << w << "\n";
  const auto outcomes = dpfl::run_grid(plan, root, parallel);
  int failed = 0;
  for (const auto& o : outcomes) {
    if (!o.ok) {
      ++failed;
      std::cerr << "dpfl: cell " << o.index << " failed: " << o.error << "\n";
    }
  }
  std::cout << "cells=" << outcomes.size() << "\nfailed=" << failed << "\nindex="
            << (root / "index.csv").string() << "\n";
  return failed ? kExitConfig : 0;
}

struct AccountantArgs {
  std::optional<double> epsilon;
  std::optional<double> z;
  double delta = 1e-6;
  double q = 0.01;
  std::size_t rounds = 100;
};

int cmd_accountant(const AccountantArgs& a) {
  if (a.epsilon.has_value() == a.z.has_value()) {
    std::cerr << "dpfl: accountant needs exactly one of --epsilon or --z\n";
    return kExitConfig;
  }
  if (a.epsilon) {
    dpfl::PrivacyConfig p;
    p.epsilon = *a.epsilon;
    p.delta = a.delta;
    p.sampling_rate = a.q;
    p.rounds = a.rounds;
    p.validate();
    const double z = dpfl::calibrate_noise_multiplier(p);
    const auto g = dpfl::compute_epsilon(a.q, z, a.rounds, a.delta);
    std::cout << "z=" << real(z) << "\nepsilon=" << real(g.epsilon) << "\norder=" << real(g.order)
              << "\ndelta=" << real(a.delta) << "\nq=" << real(a.q) << "\nrounds=" << a.rounds
              << "\n";
  } else {
    const auto g = dpfl::compute_epsilon(a.q, *a.z, a.rounds, a.delta);
    std::cout << "epsilon=" << real(g.epsilon) << "\norder=" << real(g.order)
              << "\nz=" << real(*a.z) << "\ndelta=" << real(a.delta) << "\nq=" << real(a.q)
              << "\nrounds=" << a.rounds << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private federated fine-tuning simulator"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (default: runtime default)")
      ->check(CLI::NonNegativeNumber);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", common.config, "YAML config file")->required();
    sub->add_option("--out", common.out, "Output directory (overrides config)");
    sub->add_option("--seed", common.seed, "Seed (overrides config)");
  };

  auto* run = app.add_subcommand("run", "Run one experiment");
  add_common(run);

  auto* grid = app.add_subcommand("grid", "Run every cell of a config's sweep section");
  add_common(grid);
  int parallel = 0;
  grid->add_option("--parallel", parallel, "Concurrent cells (default: hardware threads)");

  AccountantArgs acc;
  auto* accountant = app.add_subcommand("accountant", "Calibrate z or evaluate epsilon");
  accountant->add_option("--epsilon", acc.epsilon, "Target epsilon (calibrates z)");
  accountant->add_option("--z", acc.z, "Noise multiplier (evaluates epsilon)");
  accountant->add_option("--delta", acc.delta, "Target delta")->capture_default_str();
  accountant->add_option("--q", acc.q, "Sampling rate")->capture_default_str();
  accountant->add_option("--rounds", acc.rounds, "Rounds")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*run) return cmd_run(common);
    if (*grid) return cmd_grid(common, parallel);
    return cmd_accountant(acc);
  } catch (const dpfl::ConfigError& e) {
    report(e);
    return kExitConfig;
  } catch (const dpfl::CalibrationError& e) {
    std::cerr << "dpfl: calibration failed: " << e.what() << "\n";
    return kExitCalibration;
  } catch (const std::exception& e) {
    std::cerr << "dpfl: error: " << e.what() << "\n";
    return kExitConfig;
  }
}
