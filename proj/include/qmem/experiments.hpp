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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qmem/classical_bounds.hpp"
#include "qmem/config.hpp"
#include "qmem/memory_channel.hpp"
#include "qmem/photon_stats.hpp"
#include "qmem/polarization.hpp"
#include "qmem/tomography.hpp"

namespace qmem {

// Experiment orchestration: simulate, estimate, emit plot-ready tables.
// All outputs are deterministic functions of the spec (seed included);
// rerunning a spec reproduces every file byte for byte.

enum class Experiment {
  kFidelityVsTime,
  kFidelityVsTimeGuided,
  kProcessTomo,
  kThresholdSurface,
  kG2,
  kEfficiency,
};

std::string_view experiment_name(Experiment e);
Experiment experiment_from_string(std::string_view name);

struct ExperimentSpec {
  Experiment experiment = Experiment::kFidelityVsTime;
  MemoryConfig config;
  DetectionChain chain;
  std::uint64_t seed = 1;
  long long trials = 20000;      // per (state, time) grid point
  std::vector<double> times_us;  // empty selects the experiment default
  std::string out_dir = "out";
  double n_bar = 0.9;
  bool compensate = true;  // undo the deterministic rotation in analysis
  double g2_bin_width_us = 1.0;
  bool dump_trials = false;  // also write the raw trial-record CSV

  void validate() const;  // strictly increasing times, trials >= 100
};

struct StatePointResult {
  Pol state = Pol::H;
  double t_us = 0.0;
  long long n_trials = 0;
  double fidelity = 0.0;       // compensated when the spec says so
  double fidelity_err = 0.0;
  double fidelity_raw = 0.0;   // without compensation
  StokesVector stokes;         // analysis-frame reconstructed vector
  bool valid = false;
};

struct TimePointSummary {
  double t_us = 0.0;
  double mean_fidelity = 0.0;
  double mean_err = 0.0;
};

struct GaussianDecayFit {
  double f0 = 0.5;
  double tau_us = 0.0;
  double crossing_us = 0.0;  // where the fit meets 2/3; NaN when absent
  bool decaying = false;
};

struct OscillationFit {
  double period_us = 0.0;
  double amplitude = 0.0;
  double phase_rad = 0.0;
  double offset = 0.0;
  double envelope_tau_us = 0.0;
  double sse = 0.0;
};

struct EfficiencyRow {
  std::string label;
  double n_bar = 0.0;
  long long trials = 0;
  double energy_ratio = 0.0;
  double per_nonempty = 0.0;
};

struct RunSummary {
  Experiment experiment = Experiment::kFidelityVsTime;
  std::vector<std::string> files;

  // fidelity experiments
  std::vector<StatePointResult> points;
  std::vector<TimePointSummary> averages;
  GaussianDecayFit decay_fit;
  double crossing_interp_us = 0.0;
  std::optional<OscillationFit> oscillation;  // guided runs, H state

  // process tomography
  std::optional<ProcessFit> process;
  std::optional<AffineBlochMap> bloch_map;
  std::optional<Ellipsoid> bloch_ellipsoid;
  std::map<Pol, double> tomo_fidelity;

  // g2
  std::optional<G2Result> g2;

  // efficiency
  std::vector<EfficiencyRow> efficiency;
};

/// Runs one experiment and writes its files under spec.out_dir.
RunSummary run(const ExperimentSpec& spec);

/// One-line-per-item human summary, also printed by the CLI.
std::string summarize(const RunSummary& summary);

// ---------------------------------------------------------------------
// Calibration and fits

struct CalibrationTargets {
  double t_cross_unguided_us = 82.0;  // +inf requests a noise-free channel
  double mean_fidelity_2us = 0.927;
};

struct CalibrationResult {
  MemoryConfig config;
  double achieved_t_cross_us = 0.0;
  double achieved_mean_f2 = 0.0;
  double achieved_t_cross_guided_us = 0.0;
};

/// Fits (sigma_b_long, sigma_b_trans) so the analytic unguided mean
/// fidelity crosses 2/3 at the target time. The transverse/longitudinal
/// variance ratio is held at 3/2, the largest value that keeps circular
/// states decaying slower than linear ones across the default time grid
/// while still doubling the storage time under the guiding field.
/// No Monte Carlo in the loop.
CalibrationResult calibrate(const CalibrationTargets& targets,
                            MemoryConfig base, double n_bar);

/// Least-squares fit of F(t) = 1/2 + (F0 - 1/2) exp(-t^2 / (2 tau^2)).
/// The 2/3 crossing is solved from the fitted parameters. Data that does
/// not decay is reported with decaying = false. Needs >= 4 points.
GaussianDecayFit fit_gaussian_decay(
    const std::vector<std::pair<double, double>>& points);

/// Fit of F(t) = C + (a cos wt + b sin wt) exp(-t^2/(2 tau^2)) by a scan
/// over (period, tau) with the linear part solved exactly. Periods are
/// scanned from just above the grid spacing to the grid span.
OscillationFit fit_oscillation(
    const std::vector<std::pair<double, double>>& points);

/// Linear interpolation of the first 2/3 downcrossing; NaN when absent.
double interpolate_crossing(const std::vector<TimePointSummary>& averages,
                            double target = 2.0 / 3.0);

// ---------------------------------------------------------------------
// Analytic ensemble curves (no Monte Carlo); calibration and oracles.

/// Mean fidelity of the ensemble channel at one storage time.
/// `guided` keeps the configured guiding field, otherwise it is zeroed.
double analytic_mean_fidelity(double t_us, const MemoryConfig& cfg,
                              double n_bar, bool guided, bool compensate,
                              FidelityWeighting weighting);

/// Per-state analytic fidelity under the same conventions.
double analytic_state_fidelity(Pol state, double t_us, const MemoryConfig& cfg,
                               double n_bar, bool guided, bool compensate);

/// First time the analytic mean fidelity reaches `target`; +inf if never
/// within t_max.
double analytic_crossing_time(const MemoryConfig& cfg, double n_bar,
                              bool guided, bool compensate,
                              FidelityWeighting weighting,
                              double target = 2.0 / 3.0,
                              double t_max = 20000.0);

/// Writes the trial records in the flat CSV schema
/// (trial_id,input_label,n_bar,t_us,stored,clicked,basis,outcome,
///  t_click_us,background,stray).
void write_trial_records_csv(const std::string& path,
                             const std::vector<TrialRecord>& records);

}  // namespace qmem
