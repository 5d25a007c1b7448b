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

#include "qmem/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qmem {

namespace {

// Hermitian parametrization of chi: 4 diagonal entries, then (re, im) for
// the 6 upper-triangle entries in order (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
constexpr int kNumParams = 16;

const std::array<std::pair<int, int>, 6>& upper_pairs() {
  static const std::array<std::pair<int, int>, 6> pairs = {
      {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
  return pairs;
}

Eigen::Matrix4cd basis_matrix(int p) {
  Eigen::Matrix4cd b = Eigen::Matrix4cd::Zero();
  const Complex i(0.0, 1.0);
  if (p < 4) {
    b(p, p) = 1.0;
  } else {
    auto [m, n] = upper_pairs()[(p - 4) / 2];
    if ((p - 4) % 2 == 0) {
      b(m, n) = 1.0;
      b(n, m) = 1.0;
    } else {
      b(m, n) = i;
      b(n, m) = -i;
    }
  }
  return b;
}

Eigen::Matrix2cd raw_apply(const Eigen::Matrix4cd& chi,
                           const Eigen::Matrix2cd& rho) {
  const auto& sigma = pauli_basis();
  Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) {
      if (chi(m, n) == Complex(0.0, 0.0)) continue;
      out += chi(m, n) * sigma[m] * rho * sigma[n].adjoint();
    }
  }
  return out;
}

Eigen::Matrix4cd chi_from_params(const Eigen::VectorXd& x) {
  Eigen::Matrix4cd chi = Eigen::Matrix4cd::Zero();
  for (int p = 0; p < kNumParams; ++p) chi += x(p) * basis_matrix(p);
  return chi;
}

}  // namespace

StateEstimate reconstruct_state(const BasisCounts& counts) {
  StokesVector s;
  std::array<double, 3> sigma{};
  std::array<double*, 3> comp = {&s.s1, &s.s2, &s.s3};
  for (int b = 0; b < 3; ++b) {
    double total = counts[b].n_plus + counts[b].n_minus;
    if (counts[b].n_plus < 0.0 || counts[b].n_minus < 0.0) {
      throw std::invalid_argument("reconstruct_state: negative counts");
    }
    if (total <= 0.0) {
      throw std::invalid_argument(
          "reconstruct_state: zero total counts in a basis");
    }
    *comp[b] = (counts[b].n_plus - counts[b].n_minus) / total;
    sigma[b] = 1.0 / std::sqrt(total);
  }
  StateEstimate est;
  est.rescaled = s.norm() > 1.0;
  if (est.rescaled) {
    double n = s.norm();
    s.s1 /= n;
    s.s2 /= n;
    s.s3 /= n;
  }
  est.stokes = s;
  est.stokes_sigma = sigma;
  est.rho = from_stokes(s);
  return est;
}

ProcessFit reconstruct_process(
    const std::vector<std::pair<Eigen::Matrix2cd, Eigen::Matrix2cd>>& pairs) {
  if (pairs.size() < 4) {
    throw std::invalid_argument("reconstruct_process: need at least 4 pairs");
  }
  // The inputs must span the full operator space.
  Eigen::MatrixXd coords(static_cast<int>(pairs.size()), 4);
  for (int k = 0; k < static_cast<int>(pairs.size()); ++k) {
    StokesVector s = to_stokes(pairs[k].first);
    coords(k, 0) = pairs[k].first.trace().real();
    coords(k, 1) = s.s1;
    coords(k, 2) = s.s2;
    coords(k, 3) = s.s3;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> rank_svd(coords);
  rank_svd.setThreshold(1e-9);
  if (rank_svd.rank() < 4) {
    throw std::invalid_argument(
        "reconstruct_process: inputs span fewer than 4 dimensions");
  }

  const int rows_per_pair = 8;
  Eigen::MatrixXd a(rows_per_pair * static_cast<int>(pairs.size()), kNumParams);
  Eigen::VectorXd b(a.rows());
  for (int k = 0; k < static_cast<int>(pairs.size()); ++k) {
    const auto& [rho_in, rho_out] = pairs[k];
    for (int p = 0; p < kNumParams; ++p) {
      Eigen::Matrix2cd c = raw_apply(basis_matrix(p), rho_in);
      int r = k * rows_per_pair;
      a(r + 0, p) = c(0, 0).real();
      a(r + 1, p) = c(0, 0).imag();
      a(r + 2, p) = c(0, 1).real();
      a(r + 3, p) = c(0, 1).imag();
      a(r + 4, p) = c(1, 0).real();
      a(r + 5, p) = c(1, 0).imag();
      a(r + 6, p) = c(1, 1).real();
      a(r + 7, p) = c(1, 1).imag();
    }
    int r = k * rows_per_pair;
    b(r + 0) = rho_out(0, 0).real();
    b(r + 1) = rho_out(0, 0).imag();
    b(r + 2) = rho_out(0, 1).real();
    b(r + 3) = rho_out(0, 1).imag();
    b(r + 4) = rho_out(1, 0).real();
    b(r + 5) = rho_out(1, 0).imag();
    b(r + 6) = rho_out(1, 1).real();
    b(r + 7) = rho_out(1, 1).imag();
  }

  Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
  ProcessFit fit;
  fit.residual = (a * x - b).norm();

  Eigen::Matrix4cd chi = chi_from_params(x);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(chi);
  Eigen::Vector4d ev = es.eigenvalues();
  double clipped = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (ev(i) < 0.0) {
      clipped += -ev(i);
      ev(i) = 0.0;
    }
  }
  fit.clipped_mass = clipped;
  chi = es.eigenvectors() * ev.asDiagonal().toDenseMatrix().cast<Complex>() *
        es.eigenvectors().adjoint();

  // Scalar renormalization of the completeness sum
  // sum_{mn} chi_mn sigma_n^dagger sigma_m = I.
  const auto& sigma = pauli_basis();
  Eigen::Matrix2cd comp = Eigen::Matrix2cd::Zero();
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) {
      comp += chi(m, n) * sigma[n].adjoint() * sigma[m];
    }
  }
  double scale = comp.trace().real() / 2.0;
  if (scale > 1e-12) chi /= scale;

  fit.chi = chi;
  return fit;
}

Eigen::Matrix2cd apply_process(const Eigen::Matrix4cd& chi,
                               const Eigen::Matrix2cd& rho) {
  Eigen::Matrix2cd out = raw_apply(chi, rho);
  double tr = out.trace().real();
  if (tr < 1e-12) {
    throw std::invalid_argument("apply_process: output trace below 1e-12");
  }
  return out / tr;
}

double AffineBlochMap::max_image_norm(int n_samples) const {
  // Fibonacci sphere sampling.
  double best = (m * Eigen::Vector3d(0, 0, 1) + c).norm();
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n_samples; ++i) {
    double z = 1.0 - 2.0 * (i + 0.5) / n_samples;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = golden * i;
    Eigen::Vector3d u(r * std::cos(phi), r * std::sin(phi), z);
    best = std::max(best, (m * u + c).norm());
  }
  return best;
}

AffineBlochMap process_to_bloch_map(const Eigen::Matrix4cd& chi) {
  const auto& sigma = pauli_basis();
  AffineBlochMap map;
  Eigen::Matrix2cd e_id = raw_apply(chi, sigma[0]);
  for (int i = 0; i < 3; ++i) {
    map.c(i) = 0.5 * (sigma[i + 1] * e_id).trace().real();
    for (int j = 0; j < 3; ++j) {
      Eigen::Matrix2cd e_j = raw_apply(chi, sigma[j + 1]);
      map.m(i, j) = 0.5 * (sigma[i + 1] * e_j).trace().real();
    }
  }
  return map;
}

Ellipsoid ellipsoid(const AffineBlochMap& map) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(map.m, Eigen::ComputeFullU);
  Eigen::Vector3d sv = svd.singularValues();
  Eigen::Matrix3d u = svd.matrixU();

  // Deterministic ordering: descending singular value; within degenerate
  // groups, order by the dominant coordinate axis of the direction.
  std::array<int, 3> order = {0, 1, 2};
  auto dominant_axis = [&](int col) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (std::abs(u(i, col)) > std::abs(u(best, col)) + 1e-12) best = i;
    }
    return best;
  };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (std::abs(sv(a) - sv(b)) > 1e-12) return sv(a) > sv(b);
    return dominant_axis(a) < dominant_axis(b);
  });

  Ellipsoid e;
  e.center = map.c;
  for (int k = 0; k < 3; ++k) {
    e.semi_axes(k) = sv(order[k]);
    Eigen::Vector3d dir = u.col(order[k]);
    for (int i = 0; i < 3; ++i) {
      if (std::abs(dir(i)) > 1e-12) {
        if (dir(i) < 0.0) dir = -dir;
        break;
      }
    }
    e.axes.col(k) = dir;
  }
  return e;
}

}  // namespace qmem
