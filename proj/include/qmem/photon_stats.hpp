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
#include <vector>

#include "qmem/memory_channel.hpp"
#include "qmem/rng.hpp"

namespace qmem {

// Click-stream statistics: beam-splitter correlations, efficiency
// estimators and detection-chain corrections.

/// Fixed loss/reflection factors of the detection chain.
struct DetectionChain {
  double r_resonant = 0.71;   // resonant vs non-resonant cavity reflection
  double r_detpath = 0.87;    // reflected-path vs emitted-path detection
  double t_outcoupler = 0.92; // outcoupling mirror transmission
  double eta_det = 0.41;      // detection efficiency at the cavity output

  void validate() const;
};

/// A photon arriving at the beam splitter.
struct SourceEvent {
  std::uint64_t trial = 0;
  double t_us = 0.0;
};

struct ClickEvent {
  std::uint64_t trial = 0;
  int detector = 0;  // 0 = A, 1 = B
  double t_us = 0.0;
};

using ClickStream = std::vector<ClickEvent>;

/// Routes each photon to one of two detectors with probability 1/2 and
/// injects stray/dark clicks: each detector clicks independently with
/// probability p_stray_per_detector per trial, uniformly inside the
/// readout window starting at t_read_us.
ClickStream hbt_split(const std::vector<SourceEvent>& photons,
                      std::uint64_t n_trials, double p_stray_per_detector,
                      double t_read_us, double window_us, Rng& rng);

struct G2Result {
  std::vector<double> tau_us;            // bin centers
  std::vector<long long> coincidences;   // cross-detector pairs per bin
  double bin_width_us = 1.0;
  long long coincidence_trials = 0;      // trials with clicks on both detectors
  long long single_click_trials = 0;     // trials with exactly one click
  double two_photon_fraction = 0.0;      // 2 * coincidence / single trials
  double g2_zero = 0.0;                  // C * T / (N_A * N_B)
};

/// Histogram of within-trial inter-detector delays plus the two-photon
/// event fraction. A two-photon emission reaches opposite detectors only
/// half the time, hence the factor 2 in the fraction estimate.
/// Coincidences never cross trial boundaries. Throws on an empty stream.
G2Result analyze_g2(const ClickStream& stream, std::uint64_t n_trials,
                    double bin_width_us = 1.0);

/// Energy-ratio efficiency: mean retrieved photon number over mean input
/// photon number. Counts signal retrievals only (background and stray
/// excluded via the record flags). Throws on zero total input energy.
double efficiency_energy_ratio(const std::vector<TrialRecord>& records);

/// Success probability per non-empty input pulse:
/// retrievals / sum over trials of (1 - exp(-n_bar)).
double efficiency_per_nonempty(const std::vector<TrialRecord>& records);

/// Undoes the resonant-reflection and path-efficiency factors on a
/// measured reflected signal: raw / (r_resonant * r_detpath).
double correct_input_reference(double raw_reflected,
                               const DetectionChain& chain);

}  // namespace qmem
