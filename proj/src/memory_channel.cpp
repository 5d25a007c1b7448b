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

#include "qmem/memory_channel.hpp"

#include <cmath>
#include <stdexcept>

namespace qmem {

void MemoryConfig::validate() const {
  if (!(eta_total >= 0.0 && eta_total <= eta_read && eta_read <= 1.0)) {
    throw std::invalid_argument(
        "MemoryConfig: need 0 <= eta_total <= eta_read <= 1");
  }
  if (p_background < 0.0 || p_background > 1.0 || p_stray < 0.0 ||
      p_stray > 1.0) {
    throw std::invalid_argument("MemoryConfig: probabilities must be in [0,1]");
  }
  if (b_guide_gauss < 0.0 || sigma_b_long_gauss < 0.0 ||
      sigma_b_trans_gauss < 0.0) {
    throw std::invalid_argument("MemoryConfig: field magnitudes must be >= 0");
  }
  if (eta_read + p_background > 1.0) {
    throw std::invalid_argument(
        "MemoryConfig: eta_read + p_background exceeds 1");
  }
  if (readout_window_us <= 0.0) {
    throw std::invalid_argument("MemoryConfig: readout window must be > 0");
  }
}

double write_absorption(const MemoryConfig& cfg) {
  if (cfg.eta_read <= 0.0) return 0.0;
  double ratio = cfg.eta_total / cfg.eta_read;
  if (ratio >= 1.0 - std::exp(-1.0)) {
    // Requested efficiency at or beyond the single-photon-output bound;
    // absorb every photon.
    double x = 1.0 - ratio;
    if (x <= 0.0) return 1.0;
    return std::min(1.0, -std::log(x));
  }
  return -std::log(1.0 - ratio);
}

double store_probability(double n_bar, const MemoryConfig& cfg) {
  if (n_bar < 0.0) {
    throw std::invalid_argument("store_probability: negative n_bar");
  }
  return 1.0 - std::exp(-n_bar * write_absorption(cfg));
}

std::optional<AtomicQubit> write(const JonesVector& psi, double n_bar,
                                 const MemoryConfig& cfg, Rng& rng) {
  double p = store_probability(n_bar, cfg);
  if (uniform01(rng) >= p) return std::nullopt;
  StokesVector s = to_stokes(to_density(psi));
  return AtomicQubit{s.vec()};
}

namespace {

/// Suppression of the transverse fluctuation by the guiding field.
double transverse_suppression(const MemoryConfig& cfg) {
  if (cfg.b_guide_gauss <= 0.0) return 1.0;
  return std::min(1.0, cfg.sigma_b_trans_gauss / (2.0 * cfg.b_guide_gauss));
}

Eigen::Vector3d rotate_about_z(const Eigen::Vector3d& v, double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z()};
}

}  // namespace

AtomicQubit evolve(const AtomicQubit& q, double t_us, const MemoryConfig& cfg,
                   Rng& rng) {
  if (t_us < 0.0) throw std::invalid_argument("evolve: negative time");
  const double rate = cfg.phase_rate_per_gauss();  // rad/(us*G)

  double phi = rate * cfg.b_guide_gauss * t_us;
  phi += normal01(rng) * rate * cfg.sigma_b_long_gauss * t_us;

  double theta =
      normal01(rng) * rate * cfg.sigma_b_trans_gauss * t_us * transverse_suppression(cfg);
  double alpha = 2.0 * M_PI * uniform01(rng);

  Eigen::Vector3d v = rotate_about_z(q.bloch, phi);
  Eigen::Vector3d axis(std::cos(alpha), std::sin(alpha), 0.0);
  double c = std::cos(theta), s = std::sin(theta);
  v = v * c + axis.cross(v) * s + axis * axis.dot(v) * (1.0 - c);
  return AtomicQubit{v};
}

ReadOutcome read(const std::optional<AtomicQubit>& q, const MemoryConfig& cfg,
                 double t_read_us, Rng& rng) {
  ReadOutcome out;
  double u = uniform01(rng);
  double p_signal = q.has_value() ? cfg.eta_read : 0.0;
  if (u < p_signal) {
    Eigen::Vector3d s = q->bloch;
    if (cfg.readout_phase_offset_rad != 0.0) {
      s = rotate_about_z(s, cfg.readout_phase_offset_rad);
    }
    out.photon = PhotonEvent{
        s, t_read_us + uniform01(rng) * cfg.readout_window_us, false};
  } else if (u < p_signal + cfg.p_background) {
    out.photon = PhotonEvent{random_unit_vector(rng),
                             t_read_us + uniform01(rng) * cfg.readout_window_us,
                             true};
  }
  out.stray = uniform01(rng) < cfg.p_stray;
  out.stray_t_us = t_read_us + uniform01(rng) * cfg.readout_window_us;
  return out;
}

Eigen::Matrix2cd channel_density(const Eigen::Matrix2cd& rho_in, double t_us,
                                 const MemoryConfig& cfg, double p_store) {
  if (t_us < 0.0) throw std::invalid_argument("channel_density: negative time");
  if (p_store < 0.0 || p_store > 1.0) {
    throw std::invalid_argument("channel_density: p_store outside [0,1]");
  }
  DensityMatrix::from_matrix(rho_in);  // validates the input

  double p_photon = cfg.eta_read * p_store + cfg.p_background;
  if (p_photon <= 0.0) {
    throw std::invalid_argument(
        "channel_density: channel never emits a photon");
  }
  const double rate = cfg.phase_rate_per_gauss();
  double phi = rate * cfg.b_guide_gauss * t_us + cfg.readout_phase_offset_rad;
  double sigma_phi = rate * cfg.sigma_b_long_gauss * t_us;
  double sigma_theta =
      rate * cfg.sigma_b_trans_gauss * t_us * transverse_suppression(cfg);

  // E[cos of a centered Gaussian angle] = exp(-sigma^2/2). A random-axis
  // transverse rotation by theta maps z -> E[cos theta] z and shrinks the
  // equatorial plane by (1 + E[cos theta]) / 2.
  double d = std::exp(-0.5 * sigma_phi * sigma_phi);
  double c = std::exp(-0.5 * sigma_theta * sigma_theta);

  StokesVector s_in = to_stokes(rho_in);
  double eq = d * (1.0 + c) / 2.0;
  double s1 = eq * (std::cos(phi) * s_in.s1 - std::sin(phi) * s_in.s2);
  double s2 = eq * (std::sin(phi) * s_in.s1 + std::cos(phi) * s_in.s2);
  double s3 = c * s_in.s3;

  double w_bg = cfg.p_background / p_photon;
  StokesVector s_out{(1.0 - w_bg) * s1, (1.0 - w_bg) * s2, (1.0 - w_bg) * s3};
  return from_stokes(s_out).m;
}

std::vector<TrialRecord> run_trials(const std::vector<PlanEntry>& plan,
                                    const MemoryConfig& cfg,
                                    std::uint64_t seed) {
  cfg.validate();
  for (const auto& e : plan) {
    if (e.repetitions < 1) {
      throw std::invalid_argument("run_trials: repetitions must be >= 1");
    }
    if (e.n_bar < 0.0) {
      throw std::invalid_argument("run_trials: negative n_bar");
    }
    if (e.storage_time_us < 0.0) {
      throw std::invalid_argument("run_trials: negative storage time");
    }
  }

  std::vector<TrialRecord> records;
  std::uint64_t total = 0;
  for (const auto& e : plan) total += static_cast<std::uint64_t>(e.repetitions);
  records.reserve(total);

  std::uint64_t trial_id = 0;
  for (const auto& e : plan) {
    JonesVector psi = canonical_state(e.input);
    for (long long rep = 0; rep < e.repetitions; ++rep, ++trial_id) {
      Rng rng = Rng::for_trial(seed, trial_id);
      TrialRecord rec;
      rec.trial_id = trial_id;
      rec.input = e.input;
      rec.n_bar = e.n_bar;
      rec.t_us = e.storage_time_us;

      std::optional<AtomicQubit> q = write(psi, e.n_bar, cfg, rng);
      rec.stored = q.has_value();
      if (q) q = evolve(*q, e.storage_time_us, cfg, rng);
      ReadOutcome ro = read(q, cfg, e.storage_time_us, rng);

      rec.stray = ro.stray;
      rec.stray_t_us = ro.stray_t_us;
      if (ro.photon) {
        rec.has_photon = true;
        rec.background = ro.photon->background;
        rec.photon_stokes = ro.photon->stokes;
        rec.t_click_us = ro.photon->t_us;
        rec.basis = 1 + static_cast<int>(rep % 3);
        const Eigen::Vector3d& s = ro.photon->stokes;
        double component = (rec.basis == 1) ? s.x() : (rec.basis == 2) ? s.y() : s.z();
        rec.outcome = (uniform01(rng) < 0.5 * (1.0 + component)) ? +1 : -1;
      } else if (ro.stray) {
        rec.t_click_us = ro.stray_t_us;
      }
      rec.clicked = rec.has_photon || rec.stray;
      records.push_back(rec);
    }
  }
  return records;
}

}  // namespace qmem
