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

#include <doctest.h>

using namespace qmem;

namespace {

// Independent term-by-term oracle: direct factorials, no log-space, no
// truncation-by-mass logic shared with the implementation.
double coherent_bound_oracle(double n_bar, int terms) {
  double p0 = std::exp(-n_bar);
  double sum = 0.0;
  double factorial = 1.0;
  for (int n = 1; n <= terms; ++n) {
    factorial *= n;
    double p = std::pow(n_bar, n) * std::exp(-n_bar) / factorial;
    sum += p * static_cast<double>(n + 1) / static_cast<double>(n + 2);
  }
  return sum / (1.0 - p0);
}

// Simpson quadrature of the intercept-resend average over the sphere:
// integrand (cos^4(theta/2) + sin^4(theta/2)) * sin(theta)/2.
double intercept_resend_quadrature(int n) {
  auto f = [](double theta) {
    double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    return (std::pow(c, 4) + std::pow(s, 4)) * std::sin(theta) / 2.0;
  };
  double h = M_PI / n;
  double sum = f(0.0) + f(M_PI);
  for (int i = 1; i < n; ++i) sum += f(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("fixed photon number bound") {
  CHECK(classical_fidelity_n_photons(1) == 2.0 / 3.0);
  CHECK(classical_fidelity_n_photons(2) == 0.75);
  CHECK(classical_fidelity_n_photons(1000000) == doctest::Approx(1.0).epsilon(2e-6));
  CHECK_THROWS_AS(classical_fidelity_n_photons(0), std::invalid_argument);

  double prev = 0.0;
  for (long long n = 1; n <= 50; ++n) {
    double f = classical_fidelity_n_photons(n);
    CHECK(f > prev);
    prev = f;
  }
}

TEST_CASE("poisson pmf") {
  CHECK(poisson_pmf(1.0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(poisson_pmf(0.0, 0) == 1.0);
  CHECK(poisson_pmf(0.0, 3) == 0.0);

  double total = 0.0;
  for (long long n = 0; n <= 60; ++n) total += poisson_pmf(5.0, n);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // log-space evaluation stays finite where naive factorials overflow
  double large = poisson_pmf(700.0, 700);
  CHECK(large > 0.0);
  CHECK(large < 1.0);

  CHECK_THROWS_AS(poisson_pmf(-1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(poisson_pmf(1.0, -2), std::invalid_argument);
}

TEST_CASE("coherent-pulse bound") {
  CHECK(classical_fidelity_coherent(1.0) == doctest::Approx(0.709).epsilon(7e-4));
  CHECK(classical_fidelity_coherent(1e-4) ==
        doctest::Approx(2.0 / 3.0).epsilon(1.5e-4));

  // At n_bar = 2 the series telescopes to exactly 3/4; both the oracle
  // summation and the implementation must land there.
  double oracle = coherent_bound_oracle(2.0, 40);
  CHECK(oracle == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(classical_fidelity_coherent(2.0) == doctest::Approx(oracle).epsilon(1e-9));

  double prev = 0.0;
  for (double nb = 0.1; nb <= 10.0; nb += 0.3) {
    double f = classical_fidelity_coherent(nb);
    CHECK(f > prev);
    prev = f;
  }

  CHECK_THROWS_AS(classical_fidelity_coherent(0.0), std::invalid_argument);
}

TEST_CASE("maximum classical efficiency") {
  CHECK(max_classical_efficiency(1e-4) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(max_classical_efficiency(1.0) ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
  CHECK(max_classical_efficiency(100.0) == doctest::Approx(0.01).epsilon(1e-9));
  CHECK_THROWS_AS(max_classical_efficiency(0.0), std::invalid_argument);
}

TEST_CASE("efficiency-trading bound") {
  CHECK(max_classical_fidelity({1.0, 0.093}) ==
        doctest::Approx(0.801).epsilon(2.5e-3));

  // Answer-all limit equals the coherent bound.
  for (double nb : {0.2, 0.7, 1.0, 3.0}) {
    double eta = max_classical_efficiency(nb);
    CHECK(max_classical_fidelity({nb, eta}) ==
          doctest::Approx(classical_fidelity_coherent(nb)).epsilon(1e-9));
  }

  // Nonincreasing in the required efficiency, bounded by [f_coh, 1].
  for (double nb : {0.5, 1.0, 2.0}) {
    double prev = 1.0 + 1e-12;
    double fc = classical_fidelity_coherent(nb);
    for (double eta = 0.001; eta <= max_classical_efficiency(nb); eta += 0.01) {
      double f = max_classical_fidelity({nb, eta});
      CHECK(f <= prev + 1e-12);
      CHECK(f >= fc - 1e-12);
      CHECK(f <= 1.0 + 1e-12);
      prev = f;
    }
  }

  // Shrinking the required efficiency pushes the bound toward 1.
  double f2 = max_classical_fidelity({1.0, 1e-2});
  double f4 = max_classical_fidelity({1.0, 1e-4});
  double f8 = max_classical_fidelity({1.0, 1e-8});
  CHECK(f2 < f4);
  CHECK(f4 < f8);
  CHECK(f8 > 0.92);

  CHECK_THROWS_AS(max_classical_fidelity({1.0, 0.7}), std::domain_error);
}

TEST_CASE("threshold surface feasibility boundary") {
  std::vector<double> n_bars, etas;
  for (int k = 0; k <= 20; ++k) {
    n_bars.push_back(std::pow(10.0, -2.0 + 3.0 * k / 20.0));
  }
  for (double eta = 0.001; eta <= 1.0; eta += 0.028) etas.push_back(eta);

  for (const auto& cell : threshold_surface(n_bars, etas)) {
    bool expect = cell.eta <= max_classical_efficiency(cell.n_bar) + 1e-12;
    CHECK(cell.feasible == expect);
    if (cell.feasible) {
      CHECK(cell.f_max >= classical_fidelity_coherent(cell.n_bar) - 1e-12);
      CHECK(cell.f_max <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("intercept-resend monte carlo") {
  // The spherical average of the per-trial fidelity is exactly 2/3.
  CHECK(intercept_resend_quadrature(2000) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-10));

  Rng rng(12345);
  double f = intercept_resend_fidelity_mc(200000, rng);
  CHECK(f == doctest::Approx(2.0 / 3.0).epsilon(6e-3));

  CHECK_THROWS_AS(intercept_resend_fidelity_mc(0, rng), std::invalid_argument);
}

TEST_CASE("intercept-resend fixed inputs") {
  Rng rng(5);
  // Input aligned with the measurement axis: the eigenstate is the input.
  for (int i = 0; i < 100; ++i) {
    CHECK(intercept_resend_single(Eigen::Vector3d(0, 0, 1), rng) == 1.0);
  }
  // Input on the orthogonal equator: either outcome resends a state at
  // fidelity 1/2.
  for (int i = 0; i < 100; ++i) {
    CHECK(intercept_resend_single(Eigen::Vector3d(1, 0, 0), rng) == 0.5);
  }
}
