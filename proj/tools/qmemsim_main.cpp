// Copyright 2026 The qmemsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <deque>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qmem/config.hpp"
#include "qmem/experiments.hpp"

namespace {

// Exit codes: 0 success, 3 configuration/usage problems, 4 internal errors.
constexpr int kConfigError = 3;
constexpr int kInternalError = 4;

struct CommonOptions {
  std::string config_path;
  std::uint64_t seed = 1;
  long long trials = 20000;
  std::vector<double> times;
  std::string out_dir = "out";
  double n_bar = -1.0;  // negative means: use the config default
  bool guided = false;
  bool compensate = true;
  bool dump_trials = false;
};

void add_common(CLI::App* cmd, CommonOptions* opt) {
  cmd->add_option("--config", opt->config_path,
                  "flat key = value configuration file");
  cmd->add_option("--seed", opt->seed, "random seed (64-bit)");
  cmd->add_option("--trials", opt->trials, "trials per grid point (>= 100)");
  cmd->add_option("--times", opt->times, "storage-time grid in us")
      ->delimiter(',');
  cmd->add_option("--out", opt->out_dir, "output directory");
  cmd->add_option("--nbar", opt->n_bar, "mean photon number of the probe");
  cmd->add_flag("--guided", opt->guided,
                "apply the guiding field (fidelity experiments)");
  cmd->add_flag("--compensate,!--no-compensate", opt->compensate,
                "undo the deterministic rotation in analysis (default on)");
  cmd->add_flag("--dump-trials", opt->dump_trials,
                "also write the raw trial-record CSV");
}

qmem::ExperimentSpec build_spec(qmem::Experiment experiment,
                                const CommonOptions& opt) {
  qmem::ExperimentSpec spec;
  if (opt.guided && experiment == qmem::Experiment::kFidelityVsTime) {
    experiment = qmem::Experiment::kFidelityVsTimeGuided;
  }
  spec.experiment = experiment;
  double default_nbar = 0.9;
  if (!opt.config_path.empty()) {
    qmem::FlatConfig flat = qmem::read_flat_config(opt.config_path);
    spec.config = qmem::memory_config_from(flat);
    spec.chain = qmem::detection_chain_from(flat);
    default_nbar = qmem::default_nbar_from(flat, default_nbar);
  }
  spec.seed = opt.seed;
  spec.trials = opt.trials;
  spec.times_us = opt.times;
  spec.out_dir = opt.out_dir;
  spec.n_bar = opt.n_bar > 0.0 ? opt.n_bar : default_nbar;
  spec.compensate = opt.compensate;
  spec.dump_trials = opt.dump_trials;
  return spec;
}

int run_experiment(qmem::Experiment experiment, const CommonOptions& opt) {
  qmem::ExperimentSpec spec = build_spec(experiment, opt);
  qmem::RunSummary summary = qmem::run(spec);
  std::cout << qmem::summarize(summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo simulator and estimation toolchain for a "
               "single-atom polarization-qubit optical memory"};
  app.require_subcommand(1);

  struct Sub {
    qmem::Experiment experiment;
    CommonOptions opt;
    CLI::App* cmd = nullptr;
  };
  std::deque<Sub> subs;

  auto add_experiment = [&](qmem::Experiment e, const std::string& cli_name,
                            const std::string& help) {
    Sub& sub = subs.emplace_back();
    sub.experiment = e;
    sub.cmd = app.add_subcommand(cli_name, help);
    add_common(sub.cmd, &sub.opt);
  };

  add_experiment(qmem::Experiment::kFidelityVsTime, "fidelity-vs-time",
                 "six-state storage fidelity versus storage time, no "
                 "guiding field");
  add_experiment(qmem::Experiment::kFidelityVsTimeGuided,
                 "fidelity-vs-time-guided",
                 "H/L storage fidelity versus time with the guiding field");
  add_experiment(qmem::Experiment::kProcessTomo, "process-tomo",
                 "process tomography of the storage channel at one time");
  add_experiment(qmem::Experiment::kThresholdSurface, "threshold-surface",
                 "classical-memory fidelity bound over (n_bar, efficiency)");
  add_experiment(qmem::Experiment::kG2, "g2",
                 "beam-splitter correlation of the retrieved photons");
  add_experiment(qmem::Experiment::kEfficiency, "efficiency",
                 "efficiency estimators under both definitions");

  // calibrate: fit the noise amplitudes to the decay targets.
  CommonOptions cal_opt;
  double target_cross = 82.0;
  double target_f2 = 0.927;
  std::string cal_out = "calibrated.cfg";
  CLI::App* cal = app.add_subcommand(
      "calibrate", "fit field-noise amplitudes to the decay targets and "
                   "emit a configuration file");
  cal->add_option("--config", cal_opt.config_path, "base configuration file");
  cal->add_option("--nbar", cal_opt.n_bar, "mean photon number of the probe");
  cal->add_option("--t-cross", target_cross,
                  "target 2/3 crossing time without guiding field, us");
  cal->add_option("--mean-f2", target_f2, "target mean fidelity at 2 us");
  cal->add_option("--out", cal_out, "path of the emitted configuration file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cal->parsed()) {
      qmem::MemoryConfig base;
      qmem::DetectionChain chain;
      double default_nbar = 0.9;
      if (!cal_opt.config_path.empty()) {
        qmem::FlatConfig flat = qmem::read_flat_config(cal_opt.config_path);
        base = qmem::memory_config_from(flat);
        chain = qmem::detection_chain_from(flat);
        default_nbar = qmem::default_nbar_from(flat, default_nbar);
      }
      double nbar = cal_opt.n_bar > 0.0 ? cal_opt.n_bar : default_nbar;
      qmem::CalibrationTargets targets{target_cross, target_f2};
      qmem::CalibrationResult res = qmem::calibrate(targets, base, nbar);
      qmem::write_config_file(cal_out, res.config, chain, nbar);
      std::cout << "sigma_b_long_gauss = " << res.config.sigma_b_long_gauss
                << "\nsigma_b_trans_gauss = " << res.config.sigma_b_trans_gauss
                << "\nachieved 2/3 crossing = " << res.achieved_t_cross_us
                << " us\nachieved mean F(2 us) = " << res.achieved_mean_f2
                << "\nachieved guided crossing = "
                << res.achieved_t_cross_guided_us << " us\nwrote " << cal_out
                << "\n";
      return 0;
    }
    for (auto& sub : subs) {
      if (sub.cmd->parsed()) return run_experiment(sub.experiment, sub.opt);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error category=config message=" << e.what() << "\n";
    return kConfigError;
  } catch (const std::runtime_error& e) {
    std::cerr << "error category=config message=" << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error category=internal message=" << e.what() << "\n";
    return kInternalError;
  }
  return 0;
}
