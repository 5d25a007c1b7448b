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

#include "qmem/photon_stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace qmem {

void DetectionChain::validate() const {
  for (double v : {r_resonant, r_detpath, t_outcoupler, eta_det}) {
    if (!(v > 0.0 && v <= 1.0)) {
      throw std::invalid_argument("DetectionChain: factors must be in (0, 1]");
    }
  }
}

ClickStream hbt_split(const std::vector<SourceEvent>& photons,
                      std::uint64_t n_trials, double p_stray_per_detector,
                      double t_read_us, double window_us, Rng& rng) {
  ClickStream stream;
  stream.reserve(photons.size());
  for (const auto& ph : photons) {
    int det = uniform01(rng) < 0.5 ? 0 : 1;
    stream.push_back({ph.trial, det, ph.t_us});
  }
  if (p_stray_per_detector > 0.0) {
    for (std::uint64_t t = 0; t < n_trials; ++t) {
      for (int det = 0; det < 2; ++det) {
        if (uniform01(rng) < p_stray_per_detector) {
          stream.push_back({t, det, t_read_us + uniform01(rng) * window_us});
        }
      }
    }
  }
  std::sort(stream.begin(), stream.end(), [](const auto& a, const auto& b) {
    if (a.trial != b.trial) return a.trial < b.trial;
    if (a.t_us != b.t_us) return a.t_us < b.t_us;
    return a.detector < b.detector;
  });
  return stream;
}

G2Result analyze_g2(const ClickStream& stream, std::uint64_t n_trials,
                    double bin_width_us) {
  if (stream.empty()) {
    throw std::invalid_argument("analyze_g2: empty click stream");
  }
  if (bin_width_us <= 0.0) {
    throw std::invalid_argument("analyze_g2: bin width must be > 0");
  }

  G2Result res;
  res.bin_width_us = bin_width_us;

  std::map<long long, long long> hist;
  long long trials_a = 0, trials_b = 0;

  std::size_t i = 0;
  while (i < stream.size()) {
    std::size_t j = i;
    while (j < stream.size() && stream[j].trial == stream[i].trial) ++j;

    std::vector<double> a_times, b_times;
    for (std::size_t k = i; k < j; ++k) {
      (stream[k].detector == 0 ? a_times : b_times).push_back(stream[k].t_us);
    }
    if (!a_times.empty()) ++trials_a;
    if (!b_times.empty()) ++trials_b;
    if (j - i == 1) ++res.single_click_trials;
    if (!a_times.empty() && !b_times.empty()) {
      ++res.coincidence_trials;
      for (double ta : a_times) {
        for (double tb : b_times) {
          long long bin = std::llround((ta - tb) / bin_width_us);
          ++hist[bin];
        }
      }
    }
    i = j;
  }

  long long max_bin = 0;
  for (const auto& [bin, n] : hist) max_bin = std::max(max_bin, std::llabs(bin));
  for (long long bin = -max_bin; bin <= max_bin; ++bin) {
    res.tau_us.push_back(static_cast<double>(bin) * bin_width_us);
    auto it = hist.find(bin);
    res.coincidences.push_back(it == hist.end() ? 0 : it->second);
  }

  res.two_photon_fraction =
      res.single_click_trials > 0
          ? 2.0 * static_cast<double>(res.coincidence_trials) /
                static_cast<double>(res.single_click_trials)
          : 0.0;
  res.g2_zero = (trials_a > 0 && trials_b > 0)
                    ? static_cast<double>(res.coincidence_trials) *
                          static_cast<double>(n_trials) /
                          (static_cast<double>(trials_a) *
                           static_cast<double>(trials_b))
                    : 0.0;
  return res;
}

double efficiency_energy_ratio(const std::vector<TrialRecord>& records) {
  double input = 0.0;
  double retrieved = 0.0;
  for (const auto& r : records) {
    input += r.n_bar;
    if (r.has_photon && !r.background) retrieved += 1.0;
  }
  if (input <= 0.0) {
    throw std::invalid_argument("efficiency_energy_ratio: zero input energy");
  }
  return retrieved / input;
}

double efficiency_per_nonempty(const std::vector<TrialRecord>& records) {
  double nonempty = 0.0;
  double retrieved = 0.0;
  for (const auto& r : records) {
    nonempty += 1.0 - std::exp(-r.n_bar);
    if (r.has_photon && !r.background) retrieved += 1.0;
  }
  if (nonempty <= 0.0) {
    throw std::invalid_argument("efficiency_per_nonempty: no non-empty pulses");
  }
  return retrieved / nonempty;
}

double correct_input_reference(double raw_reflected,
                               const DetectionChain& chain) {
  if (raw_reflected < 0.0) {
    throw std::invalid_argument("correct_input_reference: negative signal");
  }
  chain.validate();
  return raw_reflected / (chain.r_resonant * chain.r_detpath);
}

}  // namespace qmem
