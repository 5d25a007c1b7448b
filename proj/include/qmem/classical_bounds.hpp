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

#include "qmem/rng.hpp"

namespace qmem {

// Fidelity limits of classical (measure-and-reprepare) memories, and the
// efficiency-trading bound for coherent test pulses.

/// Best average fidelity of a classical memory given exactly N identical
/// input photons: (N + 1)/(N + 2). Throws for N < 1.
double classical_fidelity_n_photons(long long n);

/// Poisson probability of N photons at mean n_bar. Evaluated in log space,
/// stable for large N. Throws on negative arguments.
double poisson_pmf(double n_bar, long long n);

/// Best classical fidelity for coherent pulses with mean photon number
/// n_bar when every non-empty pulse is answered:
/// sum_{N>=1} F(N) p(n_bar, N) / (1 - p(n_bar, 0)), truncated once the
/// remaining Poisson mass drops below 1e-12. Throws for n_bar <= 0.
double classical_fidelity_coherent(double n_bar);

/// Largest energy-ratio efficiency any single-photon-output memory can
/// show at mean photon number n_bar: (1 - exp(-n_bar))/n_bar.
double max_classical_efficiency(double n_bar);

struct ClassicalBoundQuery {
  double n_bar = 1.0;        // mean photon number of the probe pulses
  double eta_required = 1.0; // energy-ratio efficiency the memory must show
};

bool feasible(const ClassicalBoundQuery& q);

/// Best classical fidelity at a required efficiency. The optimal strategy
/// answers all pulses above a photon-number threshold N* and a randomized
/// fraction q* of pulses at N*, chosen so the answered probability mass
/// equals eta_required * n_bar; the bound is the mass-weighted mean of
/// the fixed-N fidelities over answered pulses. Throws on infeasible
/// queries (eta_required > max_classical_efficiency).
double max_classical_fidelity(const ClassicalBoundQuery& q);

/// One intercept-resend round for a pure input with Bloch vector s:
/// projective measurement along the fixed S3 axis, the obtained
/// eigenstate re-sent; returns its fidelity against the input.
double intercept_resend_single(const Eigen::Vector3d& s, Rng& rng);

/// Monte Carlo average fidelity of the single-photon intercept-resend
/// strategy over Haar-random pure inputs. Converges to 2/3.
double intercept_resend_fidelity_mc(long long trials, Rng& rng);

struct ThresholdCell {
  double n_bar = 0.0;
  double eta = 0.0;
  double f_max = 0.0;  // meaningful only when feasible
  bool feasible = false;
};

/// Threshold surface over an (n_bar, eta) grid. Infeasible cells are
/// marked, not failed.
std::vector<ThresholdCell> threshold_surface(const std::vector<double>& n_bars,
                                             const std::vector<double>& etas);

}  // namespace qmem
