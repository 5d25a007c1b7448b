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

#include "qmem/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

using namespace qmem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_dir(const std::string& leaf) {
  auto dir = std::filesystem::temp_directory_path() / "qmemsim_tests" / leaf;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("gaussian decay fit: exact data round trip") {
  double f0 = 0.93, tau = 60.0;
  std::vector<std::pair<double, double>> pts;
  for (double t = 0.0; t <= 120.0; t += 8.0) {
    pts.emplace_back(t, 0.5 + (f0 - 0.5) * std::exp(-t * t / (2 * tau * tau)));
  }
  GaussianDecayFit fit = fit_gaussian_decay(pts);
  CHECK(fit.decaying);
  CHECK(fit.f0 == doctest::Approx(f0).epsilon(1e-6));
  CHECK(fit.tau_us == doctest::Approx(tau).epsilon(1e-6));

  // crossing consistency: F(crossing) = 2/3 exactly on the fitted curve
  double f_at_cross = 0.5 + (fit.f0 - 0.5) *
                                std::exp(-fit.crossing_us * fit.crossing_us /
                                         (2 * fit.tau_us * fit.tau_us));
  CHECK(f_at_cross == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("gaussian decay fit: algebraic inversion at the reference point") {
  // F0 = 0.927 with the crossing pinned at 82 us fixes tau; re-substitution
  // must return the crossing.
  double f0 = 0.927;
  double tau = 82.0 / std::sqrt(2.0 * std::log(6.0 * (f0 - 0.5)));
  std::vector<std::pair<double, double>> pts;
  for (double t = 0.0; t <= 120.0; t += 6.0) {
    pts.emplace_back(t, 0.5 + (f0 - 0.5) * std::exp(-t * t / (2 * tau * tau)));
  }
  GaussianDecayFit fit = fit_gaussian_decay(pts);
  CHECK(fit.tau_us == doctest::Approx(tau).epsilon(1e-6));
  CHECK(fit.crossing_us == doctest::Approx(82.0).epsilon(1e-6));
}

TEST_CASE("gaussian decay fit: degenerate data reported as such") {
  std::vector<std::pair<double, double>> flat;
  for (double t = 0.0; t <= 40.0; t += 5.0) flat.emplace_back(t, 0.5);
  GaussianDecayFit fit = fit_gaussian_decay(flat);
  CHECK_FALSE(fit.decaying);
  CHECK(std::isnan(fit.crossing_us));

  std::vector<std::pair<double, double>> constant;
  for (double t = 0.0; t <= 40.0; t += 5.0) constant.emplace_back(t, 0.9);
  GaussianDecayFit c = fit_gaussian_decay(constant);
  CHECK_FALSE(c.decaying);

  CHECK_THROWS_AS(fit_gaussian_decay({{0.0, 0.9}, {1.0, 0.8}}),
                  std::invalid_argument);
}

TEST_CASE("oscillation fit recovers a known period") {
  std::vector<std::pair<double, double>> pts;
  double period = 21.0, tau = 90.0;
  for (double t = 0.0; t <= 42.0; t += 1.0) {
    double env = std::exp(-t * t / (2 * tau * tau));
    pts.emplace_back(t, 0.55 + 0.38 * std::cos(2 * M_PI * t / period) * env);
  }
  OscillationFit fit = fit_oscillation(pts);
  CHECK(fit.period_us == doctest::Approx(21.0).epsilon(0.01));
  CHECK(fit.amplitude == doctest::Approx(0.38).epsilon(0.05));
}

TEST_CASE("calibrate: hits the crossing target with the analytic channel") {
  MemoryConfig base;
  CalibrationTargets targets;  // 82 us, 0.927
  CalibrationResult res = calibrate(targets, base, 0.9);

  CHECK(res.achieved_t_cross_us == doctest::Approx(82.0).epsilon(1e-3));
  // closed loop through the analytic channel
  double cross = analytic_crossing_time(res.config, 0.9, false, true,
                                        FidelityWeighting::kUniform);
  CHECK(cross == doctest::Approx(82.0).epsilon(1e-3));
  CHECK(std::abs(res.achieved_mean_f2 / targets.mean_fidelity_2us - 1.0) <
        0.05);
  // guided storage lasts at least twice as long
  CHECK(res.achieved_t_cross_guided_us >= 2.0 * res.achieved_t_cross_us);
}

TEST_CASE("calibrate: infinite crossing target returns a quiet channel") {
  MemoryConfig base;
  CalibrationTargets targets;
  targets.t_cross_unguided_us = std::numeric_limits<double>::infinity();
  CalibrationResult res = calibrate(targets, base, 0.9);
  CHECK(res.config.sigma_b_long_gauss == 0.0);
  CHECK(res.config.sigma_b_trans_gauss == 0.0);
}

TEST_CASE("calibrate: unbracketable targets rejected") {
  MemoryConfig base;
  base.eta_total = 0.001;
  base.eta_read = 0.01;  // photon stream dominated by background
  CalibrationTargets targets;
  CHECK_THROWS_AS(calibrate(targets, base, 0.05), std::invalid_argument);
}

TEST_CASE("calibrated config keeps circular decay slower than linear") {
  MemoryConfig base;
  CalibrationResult res = calibrate(CalibrationTargets{}, base, 0.9);
  for (double t = 0.0; t <= 96.0; t += 8.0) {
    double f_circ =
        analytic_state_fidelity(Pol::R, t, res.config, 0.9, false, true);
    double f_lin =
        analytic_state_fidelity(Pol::H, t, res.config, 0.9, false, true);
    CHECK(f_circ >= f_lin - 1e-12);
  }
}

TEST_CASE("analytic guided mean dominates unguided past 30 us") {
  MemoryConfig cal = calibrate(CalibrationTargets{}, MemoryConfig{}, 0.9).config;
  for (double t = 30.0; t <= 240.0; t += 10.0) {
    double guided = analytic_mean_fidelity(t, cal, 0.9, true, true,
                                           FidelityWeighting::kHTwiceL);
    double unguided = analytic_mean_fidelity(t, cal, 0.9, false, true,
                                             FidelityWeighting::kUniform);
    CHECK(guided >= unguided - 1e-9);
  }
}

TEST_CASE("experiment spec validation") {
  ExperimentSpec spec;
  spec.trials = 50;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = ExperimentSpec{};
  spec.times_us = {0.0, 10.0, 10.0};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = ExperimentSpec{};
  spec.n_bar = 0.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("config file round trip and errors") {
  MemoryConfig m;
  m.sigma_b_long_gauss = 0.00123;
  DetectionChain c;
  auto dir = temp_dir("config");
  std::string path = (dir / "roundtrip.cfg").string();
  write_config_file(path, m, c, 0.9);

  FlatConfig flat = read_flat_config(path);
  MemoryConfig m2 = memory_config_from(flat);
  CHECK(m2.sigma_b_long_gauss == doctest::Approx(0.00123).epsilon(1e-12));
  CHECK(m2.eta_total == doctest::Approx(m.eta_total));
  CHECK(default_nbar_from(flat, 0.5) == doctest::Approx(0.9));
  DetectionChain c2 = detection_chain_from(flat);
  CHECK(c2.eta_det == doctest::Approx(0.41));

  CHECK_THROWS(parse_flat_config("this line has no equals sign"));
  CHECK_THROWS(memory_config_from(parse_flat_config("eta_total = banana")));
  CHECK_THROWS_AS(read_flat_config((dir / "missing.cfg").string()),
                  std::runtime_error);
}

TEST_CASE("fidelity experiment: deterministic byte-identical outputs") {
  ExperimentSpec spec;
  spec.experiment = Experiment::kFidelityVsTime;
  spec.config = calibrate(CalibrationTargets{}, MemoryConfig{}, 0.9).config;
  spec.trials = 400;
  spec.seed = 99;
  spec.times_us = {0.0, 30.0, 60.0};

  auto dir_a = temp_dir("det_a");
  auto dir_b = temp_dir("det_b");
  spec.out_dir = dir_a.string();
  RunSummary a = run(spec);
  spec.out_dir = dir_b.string();
  RunSummary b = run(spec);

  REQUIRE(a.files.size() == b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    CHECK(slurp(a.files[i]) == slurp(b.files[i]));
  }
}

TEST_CASE("fidelity experiment: sane output at the reference point") {
  ExperimentSpec spec;
  spec.experiment = Experiment::kFidelityVsTime;
  spec.config = calibrate(CalibrationTargets{}, MemoryConfig{}, 0.9).config;
  spec.trials = 30000;
  spec.seed = 5;
  spec.n_bar = 0.9;
  spec.times_us = {2.0};
  spec.out_dir = temp_dir("ref2us").string();
  RunSummary s = run(spec);
  REQUIRE(s.averages.size() == 1);
  // calibration-consistency: the tomography chain recovers the mean
  // fidelity near the analytic value
  CHECK(s.averages[0].mean_fidelity > 0.90);
  CHECK(s.averages[0].mean_fidelity < 0.95);
}

TEST_CASE("guided experiment extracts the precession period") {
  ExperimentSpec spec;
  spec.experiment = Experiment::kFidelityVsTimeGuided;
  spec.config = calibrate(CalibrationTargets{}, MemoryConfig{}, 0.9).config;
  spec.trials = 5000;
  spec.seed = 17;
  for (double t = 0.0; t <= 42.0; t += 1.5) spec.times_us.push_back(t);
  spec.out_dir = temp_dir("period").string();
  RunSummary s = run(spec);
  REQUIRE(s.oscillation.has_value());
  CHECK(s.oscillation->period_us == doctest::Approx(21.0).epsilon(0.08));
}

TEST_CASE("threshold surface experiment emits the reference cell") {
  ExperimentSpec spec;
  spec.experiment = Experiment::kThresholdSurface;
  spec.out_dir = temp_dir("surface").string();
  RunSummary s = run(spec);
  REQUIRE(!s.files.empty());
  std::string csv = slurp(s.files[0]);
  CHECK(csv.find("n_bar,eta,f_max,feasible") == 0);
  // the (1, 0.093) cell must be present and feasible
  bool found = false;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.rfind("1,0.093,", 0) == 0) {
      found = true;
      CHECK(line.find(",1") != std::string::npos);
      double f = std::stod(line.substr(8));
      CHECK(f == doctest::Approx(0.801).epsilon(2.5e-3));
    }
  }
  CHECK(found);
}

TEST_CASE("process tomography experiment structure") {
  ExperimentSpec spec;
  spec.experiment = Experiment::kProcessTomo;
  spec.config = calibrate(CalibrationTargets{}, MemoryConfig{}, 0.9).config;
  spec.trials = 20000;
  spec.seed = 23;
  spec.out_dir = temp_dir("tomo").string();
  RunSummary s = run(spec);
  REQUIRE(s.process.has_value());
  // dominant identity component, small imaginary parts
  CHECK(s.process->chi(0, 0).real() > 0.8);
  double max_imag = 0.0;
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) {
      max_imag = std::max(max_imag, std::abs(s.process->chi(m, n).imag()));
    }
  }
  CHECK(max_imag <= 0.034);
  CHECK(s.bloch_ellipsoid->semi_axes.maxCoeff() <= 1.0 + 1e-6);
}

TEST_CASE("trial record csv schema") {
  MemoryConfig cfg;
  auto records = run_trials({{Pol::H, 0.9, 2.0, 200}}, cfg, 3);
  auto dir = temp_dir("records");
  std::string path = (dir / "trials.csv").string();
  write_trial_records_csv(path, records);
  std::string csv = slurp(path);
  CHECK(csv.find("trial_id,input_label,n_bar,t_us,stored,clicked,basis,"
                 "outcome,t_click_us,background,stray") == 0);
  // one line per record plus header
  long long lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == 201);
}
