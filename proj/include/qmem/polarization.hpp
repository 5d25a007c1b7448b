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

#include <array>
#include <complex>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qmem {

// Polarization qubit in the circular basis (a_R, a_L).
//
// Axis convention for Stokes/Bloch vectors:
//   S1 hosts H/V (H at +S1), S2 hosts D/A (D at +S2),
//   S3 is the circular axis (R at +S3, L at -S3).
// Superposition phases: H,V = (R +- L)/sqrt(2); D,A = (R +- iL)/sqrt(2).
// With this convention (sigma1, sigma2, sigma3) are the standard Pauli
// matrices in the ordered basis {R, L}.

using Complex = std::complex<double>;

/// The six canonical polarization labels.
enum class Pol { H, V, D, A, R, L };

std::string_view to_string(Pol p);
Pol pol_from_string(std::string_view s);

/// All six labels in canonical order H, V, D, A, R, L.
const std::array<Pol, 6>& all_pols();

struct StokesVector {
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;

  double norm() const { return std::sqrt(s1 * s1 + s2 * s2 + s3 * s3); }
  Eigen::Vector3d vec() const { return {s1, s2, s3}; }
  static StokesVector from_vec(const Eigen::Vector3d& v) {
    return {v.x(), v.y(), v.z()};
  }
};

/// Normalized two-component amplitude vector. Construction normalizes and
/// rejects inputs with norm below 1e-9; global phase is not observable.
class JonesVector {
 public:
  JonesVector(Complex a_r, Complex a_l);

  Complex a_r() const { return a_r_; }
  Complex a_l() const { return a_l_; }

 private:
  Complex a_r_;
  Complex a_l_;
};

/// 2x2 density matrix. `from_matrix` validates Hermiticity (1e-10),
/// unit trace (1e-10) and eigenvalues >= -1e-10.
struct DensityMatrix {
  Eigen::Matrix2cd m;

  static DensityMatrix from_matrix(const Eigen::Matrix2cd& m);
};

/// Pauli basis (sigma0 = I, sigma1, sigma2, sigma3) in the {R, L} basis.
const std::array<Eigen::Matrix2cd, 4>& pauli_basis();

/// Jones amplitudes of one canonical state.
JonesVector canonical_state(Pol p);

/// The six canonical (label, state) pairs in order H, V, D, A, R, L.
std::vector<std::pair<Pol, JonesVector>> canonical_states();

DensityMatrix to_density(const JonesVector& psi);

StokesVector to_stokes(const DensityMatrix& rho);
StokesVector to_stokes(const Eigen::Matrix2cd& rho);

/// Inverse of to_stokes; throws if |S| > 1 + 1e-10.
DensityMatrix from_stokes(const StokesVector& s);

/// Overlap <psi|rho|psi> in [0, 1].
double fidelity(const JonesVector& psi, const DensityMatrix& rho);
double fidelity(const JonesVector& psi, const Eigen::Matrix2cd& rho);

enum class FidelityWeighting {
  kUniform,   // arithmetic mean of all six states
  kHTwiceL,   // mean of H (doubly weighted) and L
};

/// Weighted mean of per-state fidelities. kUniform requires all six labels,
/// kHTwiceL requires H and L.
double average_fidelity(const std::map<Pol, double>& per_state,
                        FidelityWeighting weighting);

/// Rigid rotation of a Stokes vector about a unit axis (Rodrigues).
StokesVector rotate_stokes(const StokesVector& s, const Eigen::Vector3d& axis,
                           double angle_rad);

}  // namespace qmem
