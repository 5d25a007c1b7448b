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

#include "qmem/polarization.hpp"

#include <cmath>
#include <stdexcept>

namespace qmem {

namespace {
constexpr double kMinNorm = 1e-9;
constexpr double kStokesTol = 1e-10;
constexpr double kDensityTol = 1e-10;
}  // namespace

std::string_view to_string(Pol p) {
  switch (p) {
    case Pol::H: return "H";
    case Pol::V: return "V";
    case Pol::D: return "D";
    case Pol::A: return "A";
    case Pol::R: return "R";
    case Pol::L: return "L";
  }
  return "?";
}

Pol pol_from_string(std::string_view s) {
  for (Pol p : all_pols()) {
    if (s == to_string(p)) return p;
  }
  throw std::invalid_argument("unknown polarization label: " + std::string(s));
}

const std::array<Pol, 6>& all_pols() {
  static const std::array<Pol, 6> pols = {Pol::H, Pol::V, Pol::D,
                                          Pol::A, Pol::R, Pol::L};
  return pols;
}

JonesVector::JonesVector(Complex a_r, Complex a_l) : a_r_(a_r), a_l_(a_l) {
  double n = std::sqrt(std::norm(a_r_) + std::norm(a_l_));
  if (n < kMinNorm) {
    throw std::invalid_argument("JonesVector: amplitude norm below 1e-9");
  }
  a_r_ /= n;
  a_l_ /= n;
}

DensityMatrix DensityMatrix::from_matrix(const Eigen::Matrix2cd& m) {
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kDensityTol) {
    throw std::invalid_argument("DensityMatrix: not Hermitian");
  }
  if (std::abs(m.trace().real() - 1.0) > kDensityTol ||
      std::abs(m.trace().imag()) > kDensityTol) {
    throw std::invalid_argument("DensityMatrix: trace != 1");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(m);
  if (es.eigenvalues().minCoeff() < -kDensityTol) {
    throw std::invalid_argument("DensityMatrix: negative eigenvalue");
  }
  return DensityMatrix{m};
}

const std::array<Eigen::Matrix2cd, 4>& pauli_basis() {
  static const std::array<Eigen::Matrix2cd, 4> paulis = [] {
    std::array<Eigen::Matrix2cd, 4> p;
    const Complex i(0.0, 1.0);
    p[0] << 1, 0, 0, 1;
    p[1] << 0, 1, 1, 0;
    p[2] << 0, -i, i, 0;
    p[3] << 1, 0, 0, -1;
    return p;
  }();
  return paulis;
}

JonesVector canonical_state(Pol p) {
  const double r = 1.0 / std::sqrt(2.0);
  const Complex i(0.0, 1.0);
  switch (p) {
    case Pol::R: return {1.0, 0.0};
    case Pol::L: return {0.0, 1.0};
    case Pol::H: return {r, r};
    case Pol::V: return {r, -r};
    case Pol::D: return {r, i * r};
    case Pol::A: return {r, -i * r};
  }
  throw std::invalid_argument("unknown polarization label");
}

std::vector<std::pair<Pol, JonesVector>> canonical_states() {
  std::vector<std::pair<Pol, JonesVector>> out;
  out.reserve(6);
  for (Pol p : all_pols()) out.emplace_back(p, canonical_state(p));
  return out;
}

DensityMatrix to_density(const JonesVector& psi) {
  Eigen::Vector2cd v(psi.a_r(), psi.a_l());
  Eigen::Matrix2cd m = v * v.adjoint();
  return DensityMatrix{m};
}

StokesVector to_stokes(const Eigen::Matrix2cd& rho) {
  const auto& sigma = pauli_basis();
  StokesVector s;
  s.s1 = (rho * sigma[1]).trace().real();
  s.s2 = (rho * sigma[2]).trace().real();
  s.s3 = (rho * sigma[3]).trace().real();
  return s;
}

StokesVector to_stokes(const DensityMatrix& rho) { return to_stokes(rho.m); }

DensityMatrix from_stokes(const StokesVector& s) {
  if (s.norm() > 1.0 + kStokesTol) {
    throw std::invalid_argument("from_stokes: |S| > 1");
  }
  const auto& sigma = pauli_basis();
  Eigen::Matrix2cd m =
      0.5 * (sigma[0] + s.s1 * sigma[1] + s.s2 * sigma[2] + s.s3 * sigma[3]);
  return DensityMatrix{m};
}

double fidelity(const JonesVector& psi, const Eigen::Matrix2cd& rho) {
  Eigen::Vector2cd v(psi.a_r(), psi.a_l());
  return (v.adjoint() * rho * v)(0, 0).real();
}

double fidelity(const JonesVector& psi, const DensityMatrix& rho) {
  return fidelity(psi, rho.m);
}

double average_fidelity(const std::map<Pol, double>& per_state,
                        FidelityWeighting weighting) {
  auto get = [&](Pol p) {
    auto it = per_state.find(p);
    if (it == per_state.end()) {
      throw std::invalid_argument("average_fidelity: missing label " +
                                  std::string(to_string(p)));
    }
    return it->second;
  };
  if (weighting == FidelityWeighting::kHTwiceL) {
    return (2.0 * get(Pol::H) + get(Pol::L)) / 3.0;
  }
  double sum = 0.0;
  for (Pol p : all_pols()) sum += get(p);
  return sum / 6.0;
}

StokesVector rotate_stokes(const StokesVector& s, const Eigen::Vector3d& axis,
                           double angle_rad) {
  double n = axis.norm();
  if (n < kMinNorm) {
    throw std::invalid_argument("rotate_stokes: zero axis");
  }
  Eigen::Vector3d k = axis / n;
  Eigen::Vector3d v = s.vec();
  double c = std::cos(angle_rad);
  double si = std::sin(angle_rad);
  Eigen::Vector3d out = v * c + k.cross(v) * si + k * (k.dot(v)) * (1.0 - c);
  return StokesVector::from_vec(out);
}

}  // namespace qmem
