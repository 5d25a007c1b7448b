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

#include "qmem/classical_bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace qmem {

namespace {
constexpr double kMassTol = 1e-12;

/// Poisson pmf values p(0..N) until the cumulative mass reaches
/// 1 - tail_tol, by the stable upward recurrence.
std::vector<double> poisson_table(double n_bar, double tail_tol) {
  std::vector<double> p;
  p.push_back(std::exp(-n_bar));
  double cumulative = p[0];
  long long n = 0;
  while (cumulative < 1.0 - tail_tol && n < 100000) {
    ++n;
    p.push_back(p.back() * n_bar / static_cast<double>(n));
    cumulative += p.back();
  }
  return p;
}
}  // namespace

double classical_fidelity_n_photons(long long n) {
  if (n < 1) {
    throw std::invalid_argument("classical_fidelity_n_photons: N must be >= 1");
  }
  return static_cast<double>(n + 1) / static_cast<double>(n + 2);
}

double poisson_pmf(double n_bar, long long n) {
  if (n_bar < 0.0 || n < 0) {
    throw std::invalid_argument("poisson_pmf: negative argument");
  }
  if (n_bar == 0.0) return n == 0 ? 1.0 : 0.0;
  double log_p = static_cast<double>(n) * std::log(n_bar) - n_bar -
                 std::lgamma(static_cast<double>(n) + 1.0);
  return std::exp(log_p);
}

double classical_fidelity_coherent(double n_bar) {
  if (n_bar <= 0.0) {
    throw std::invalid_argument("classical_fidelity_coherent: n_bar must be > 0");
  }
  std::vector<double> p = poisson_table(n_bar, kMassTol);
  double sum = 0.0;
  for (std::size_t n = 1; n < p.size(); ++n) {
    sum += classical_fidelity_n_photons(static_cast<long long>(n)) * p[n];
  }
  return sum / (1.0 - p[0]);
}

double max_classical_efficiency(double n_bar) {
  if (n_bar <= 0.0) {
    throw std::invalid_argument("max_classical_efficiency: n_bar must be > 0");
  }
  return (1.0 - std::exp(-n_bar)) / n_bar;
}

bool feasible(const ClassicalBoundQuery& q) {
  return q.n_bar > 0.0 && q.eta_required > 0.0 &&
         q.eta_required <= max_classical_efficiency(q.n_bar) + 1e-12;
}

double max_classical_fidelity(const ClassicalBoundQuery& q) {
  if (!feasible(q)) {
    throw std::domain_error("max_classical_fidelity: infeasible query");
  }
  const double answered_mass = q.eta_required * q.n_bar;
  std::vector<double> p = poisson_table(q.n_bar, 1e-15);

  // suffix[k] = P(N >= k)
  std::vector<double> suffix(p.size() + 1, 0.0);
  for (std::size_t k = p.size(); k-- > 0;) suffix[k] = suffix[k + 1] + p[k];

  // Answer from the largest photon numbers downward; fidelity grows with N.
  std::size_t n_star = 1;
  while (n_star + 1 < suffix.size() && suffix[n_star + 1] > answered_mass) {
    ++n_star;
  }
  double q_star = (answered_mass - suffix[n_star + 1]) / p[n_star];
  q_star = std::min(1.0, std::max(0.0, q_star));

  double f = q_star * p[n_star] *
             classical_fidelity_n_photons(static_cast<long long>(n_star));
  for (std::size_t n = n_star + 1; n < p.size(); ++n) {
    f += p[n] * classical_fidelity_n_photons(static_cast<long long>(n));
  }
  return f / answered_mass;
}

double intercept_resend_single(const Eigen::Vector3d& s, Rng& rng) {
  double p_plus = 0.5 * (1.0 + s.z());
  bool plus = uniform01(rng) < p_plus;
  // Fidelity of the resent eigenstate against the input.
  return plus ? p_plus : 1.0 - p_plus;
}

double intercept_resend_fidelity_mc(long long trials, Rng& rng) {
  if (trials < 1) {
    throw std::invalid_argument("intercept_resend_fidelity_mc: trials < 1");
  }
  double sum = 0.0;
  for (long long i = 0; i < trials; ++i) {
    sum += intercept_resend_single(random_unit_vector(rng), rng);
  }
  return sum / static_cast<double>(trials);
}

std::vector<ThresholdCell> threshold_surface(const std::vector<double>& n_bars,
                                             const std::vector<double>& etas) {
  std::vector<ThresholdCell> cells;
  cells.reserve(n_bars.size() * etas.size());
  for (double nb : n_bars) {
    for (double eta : etas) {
      ThresholdCell cell;
      cell.n_bar = nb;
      cell.eta = eta;
      cell.feasible = feasible({nb, eta});
      if (cell.feasible) cell.f_max = max_classical_fidelity({nb, eta});
      cells.push_back(cell);
    }
  }
  return cells;
}

}  // namespace qmem
