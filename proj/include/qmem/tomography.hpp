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
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qmem/polarization.hpp"

namespace qmem {

// State tomography from three-basis projection counts and single-qubit
// process tomography over the Pauli operator basis.

struct BasisCount {
  double n_plus = 0.0;
  double n_minus = 0.0;
};

/// Projection counts in the three analysis bases (S1, S2, S3 axes).
/// Counts may be fractional (sufficient statistics, not raw clicks).
using BasisCounts = std::array<BasisCount, 3>;

struct StateEstimate {
  DensityMatrix rho;
  StokesVector stokes;                  // after any physicality rescale
  std::array<double, 3> stokes_sigma;   // 1/sqrt(total counts) per basis
  bool rescaled = false;                // true if |S| > 1 was shrunk to 1
};

/// Linear inversion S_b = (n+ - n-)/(n+ + n-), with a radial shrink onto
/// the unit sphere when sampling noise pushes |S| above 1 (for a single
/// qubit this is the closest physical state in Bloch distance).
/// Throws if any basis has zero total counts.
StateEstimate reconstruct_state(const BasisCounts& counts);

/// Process matrix chi over (sigma0..sigma3):
///   rho_out = sum_{mn} chi_mn sigma_m rho_in sigma_n^dagger.
struct ProcessFit {
  Eigen::Matrix4cd chi;
  double residual = 0.0;      // least-squares residual before projection
  double clipped_mass = 0.0;  // negative eigenvalue mass removed by the clip
};

/// Least-squares fit of chi over input/output pairs (overdetermined for
/// the six canonical inputs), followed by projection to Hermitian PSD via
/// eigenvalue clipping and scalar renormalization of the completeness sum.
/// Trace preservation is enforced softly; the residual is reported.
/// Throws if the inputs span fewer than 4 dimensions.
ProcessFit reconstruct_process(
    const std::vector<std::pair<Eigen::Matrix2cd, Eigen::Matrix2cd>>& pairs);

/// Applies chi to rho and renormalizes to unit trace.
/// Throws if the raw output trace falls below 1e-12.
Eigen::Matrix2cd apply_process(const Eigen::Matrix4cd& chi,
                               const Eigen::Matrix2cd& rho);

/// Affine action of the channel on Bloch vectors: v -> M v + c.
struct AffineBlochMap {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  Eigen::Vector3d c = Eigen::Vector3d::Zero();

  /// Max |M u + c| over a grid of directions; <= 1 + 1e-6 for a physical map.
  double max_image_norm(int n_samples = 2000) const;
};

/// M_ij = Tr(sigma_i E(sigma_j))/2, c_i = Tr(sigma_i E(I))/2.
AffineBlochMap process_to_bloch_map(const Eigen::Matrix4cd& chi);

/// Image of the unit sphere under the affine map.
struct Ellipsoid {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d semi_axes = Eigen::Vector3d::Zero();  // sorted descending
  Eigen::Matrix3d axes = Eigen::Matrix3d::Identity();   // columns = directions
};

/// Semi-axes are the singular values of M, directions the left singular
/// vectors. Deterministic output: descending order, degenerate values
/// tie-broken by dominant coordinate axis, first nonzero component of
/// each direction made positive.
Ellipsoid ellipsoid(const AffineBlochMap& map);

}  // namespace qmem
