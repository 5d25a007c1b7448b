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

#include <cmath>

#include <doctest.h>

using namespace qmem;

namespace {

/// Poisson photon-number source, the classical control for the
/// beam-splitter statistics.
std::vector<SourceEvent> poisson_source(std::uint64_t trials, double mu,
                                        Rng& rng) {
  std::vector<SourceEvent> events;
  for (std::uint64_t t = 0; t < trials; ++t) {
    // Knuth sampling; mu is small here.
    double l = std::exp(-mu);
    int k = 0;
    double p = 1.0;
    while (true) {
      p *= uniform01(rng);
      if (p <= l) break;
      ++k;
    }
    for (int i = 0; i < k; ++i) {
      events.push_back({t, uniform01(rng) * 1.0});
    }
  }
  return events;
}

std::vector<TrialRecord> memory_records(const MemoryConfig& cfg, double n_bar,
                                        long long trials, std::uint64_t seed) {
  return run_trials({{Pol::H, n_bar, 2.0, trials}}, cfg, seed);
}

std::vector<SourceEvent> photon_events(const std::vector<TrialRecord>& records) {
  std::vector<SourceEvent> events;
  for (const auto& r : records) {
    if (r.has_photon) events.push_back({r.trial_id, r.t_click_us});
  }
  return events;
}

}  // namespace

TEST_CASE("hbt_split: empty input, balanced routing, no fake coincidences") {
  Rng rng(1);
  CHECK(hbt_split({}, 100, 0.0, 0.0, 1.0, rng).empty());

  std::vector<SourceEvent> photons;
  for (std::uint64_t t = 0; t < 100000; ++t) photons.push_back({t, 0.5});
  ClickStream stream = hbt_split(photons, photons.size(), 0.0, 0.0, 1.0, rng);
  REQUIRE(stream.size() == photons.size());
  long long on_a = 0;
  for (const auto& c : stream) on_a += c.detector == 0 ? 1 : 0;
  CHECK(static_cast<double>(on_a) / stream.size() ==
        doctest::Approx(0.5).epsilon(0.01));

  // one photon per trial, no stray: a coincidence is impossible
  G2Result res = analyze_g2(stream, photons.size());
  CHECK(res.coincidence_trials == 0);
  CHECK(res.two_photon_fraction == 0.0);
}

TEST_CASE("analyze_g2: memory stream with noise rates lands near 0.5%") {
  MemoryConfig cfg;  // background 1.3%, stray 0.3%
  cfg.b_guide_gauss = 0.0;
  const long long trials = 400000;
  auto records = memory_records(cfg, 0.9, trials, 333);
  Rng rng(334);
  ClickStream stream = hbt_split(photon_events(records), trials, cfg.p_stray,
                                 2.0, cfg.readout_window_us, rng);
  G2Result res = analyze_g2(stream, trials);
  CHECK(res.two_photon_fraction > 0.003);
  CHECK(res.two_photon_fraction < 0.007);
  CHECK(res.g2_zero < 0.5);  // far below the classical value of 1

  // With stray clicks disabled the stream is single-photon: exactly zero.
  MemoryConfig clean = cfg;
  clean.p_stray = 0.0;
  auto clean_records = memory_records(clean, 0.9, trials, 335);
  Rng rng2(336);
  ClickStream clean_stream = hbt_split(photon_events(clean_records), trials,
                                       0.0, 2.0, clean.readout_window_us, rng2);
  G2Result clean_res = analyze_g2(clean_stream, trials);
  CHECK(clean_res.coincidence_trials == 0);
  CHECK(clean_res.two_photon_fraction == 0.0);
}

TEST_CASE("analyze_g2: poisson control source shows g2 = 1") {
  Rng rng(2);
  const std::uint64_t trials = 1000000;
  std::vector<SourceEvent> events = poisson_source(trials, 0.1, rng);
  ClickStream stream = hbt_split(events, trials, 0.0, 0.0, 1.0, rng);
  G2Result res = analyze_g2(stream, trials);
  CHECK(res.g2_zero == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("analyze_g2: histogram covers within-trial delays only") {
  ClickStream stream = {{0, 0, 1.0}, {0, 1, 3.5}, {5, 0, 100.0}, {5, 1, 100.2}};
  G2Result res = analyze_g2(stream, 6, 1.0);
  long long total = 0;
  for (long long c : res.coincidences) total += c;
  CHECK(total == 2);  // one pair per trial, nothing across trials
  CHECK(res.coincidence_trials == 2);
  CHECK(res.single_click_trials == 0);

  CHECK_THROWS_AS(analyze_g2({}, 10), std::invalid_argument);
  CHECK_THROWS_AS(analyze_g2(stream, 6, 0.0), std::invalid_argument);
}

TEST_CASE("efficiency estimators: perfect memory at nbar = 1") {
  MemoryConfig perfect;
  perfect.eta_total = 1.0;
  perfect.eta_read = 1.0;
  perfect.p_background = 0.0;
  perfect.p_stray = 0.0;
  auto records = memory_records(perfect, 1.0, 200000, 11);
  CHECK(efficiency_energy_ratio(records) ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(0.008));
  CHECK(efficiency_per_nonempty(records) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("efficiency estimators: configured memory at nbar = 1") {
  MemoryConfig cfg;
  auto records = memory_records(cfg, 1.0, 200000, 12);
  CHECK(efficiency_energy_ratio(records) ==
        doctest::Approx(0.093).epsilon(0.03));
}

TEST_CASE("per-non-empty estimator dominates the energy estimator") {
  MemoryConfig cfg;
  for (double nb : {0.3, 1.0, 2.5}) {
    auto records = memory_records(cfg, nb, 30000, 13);
    CHECK(efficiency_per_nonempty(records) >=
          efficiency_energy_ratio(records) - 1e-12);
  }
  CHECK_THROWS_AS(efficiency_energy_ratio({}), std::invalid_argument);
}

TEST_CASE("energy estimator is invariant under common loss") {
  // Equal thinning of the retrieved arm and the input reference cancels:
  // thin the retrievals by eta and scale the recorded pulse energy by eta.
  MemoryConfig cfg;
  auto records = memory_records(cfg, 1.0, 200000, 14);
  double before = efficiency_energy_ratio(records);

  const double eta = 0.41;
  std::vector<TrialRecord> thinned = records;
  std::uint64_t i = 0;
  for (auto& r : thinned) {
    Rng rng = Rng::for_trial(15, i++);
    if (r.has_photon && uniform01(rng) > eta) {
      r.has_photon = false;
      r.background = false;
      r.clicked = r.stray;
    }
    r.n_bar *= eta;
  }
  double after = efficiency_energy_ratio(thinned);
  CHECK(after == doctest::Approx(before).epsilon(0.02));
}

TEST_CASE("input reference correction") {
  DetectionChain chain;
  CHECK(correct_input_reference(0.6177, chain) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(correct_input_reference(0.617, chain) ==
        doctest::Approx(1.0).epsilon(2e-3));
  CHECK(correct_input_reference(0.0, chain) == 0.0);

  DetectionChain unit;
  unit.r_resonant = 1.0;
  unit.r_detpath = 1.0;
  CHECK(correct_input_reference(0.37, unit) == doctest::Approx(0.37));

  DetectionChain bad;
  bad.eta_det = 0.0;
  CHECK_THROWS_AS(correct_input_reference(0.1, bad), std::invalid_argument);
}
