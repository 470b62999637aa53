// Copyright 2026 The harperlab Authors
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

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "harperlab/diophantine.hpp"
#include "harperlab/error.hpp"
#include "harperlab/lattice_sums.hpp"
#include "harperlab/spectral.hpp"
#include "harperlab/weyl_phase_space.hpp"

using namespace harperlab;
using namespace harperlab::lattice_sums;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

double theta_1d(double a, double x0, double period) {
  double s = 0.0;
  for (int k = -60; k <= 60; ++k) s += std::exp(-a * (x0 + k * period) * (x0 + k * period));
  return s;
}

}  // namespace

TEST_CASE("gaussian lattice sum basics") {
  // delta = 1: F = 2(x^2 + y^2) and the sum factorizes.
  const double s = gaussian_lattice_sum(kGolden, 1.0, 1.0, 0.2, 0.1).value;
  CHECK(s == doctest::Approx(theta_1d(2.0, 0.2, 1.0) * theta_1d(2.0, 0.1, kGolden)).epsilon(1e-12));
  CHECK(s < 10.0);

  const auto origin = gaussian_lattice_sum(kGolden, 1.0, 1e-3, 0.0, 0.0);
  CHECK(origin.value >= 1.0);
  CHECK(origin.tail_bound <= 1e-10 * origin.value);
  CHECK(origin.terms > 0);

  const double base = gaussian_lattice_sum(kGolden, 0.7, 0.01, 0.3, 0.2).value;
  CHECK(std::fabs(gaussian_lattice_sum(kGolden, 0.7, 0.01, 1.3, 0.2).value - base) <= 1e-10 * base);
  CHECK(std::fabs(gaussian_lattice_sum(kGolden, 0.7, 0.01, 0.3, 0.2 + kGolden).value - base) <= 1e-10 * base);
  CHECK(std::fabs(gaussian_lattice_sum(kGolden, 0.7, 0.01, -2.7, 0.2 - 3 * kGolden).value - base) <= 1e-10 * base);

  CHECK_THROWS_AS(gaussian_lattice_sum(kGolden, 1.0, 0.0, 0, 0), DomainError);
  CHECK_THROWS_AS(gaussian_lattice_sum(kGolden, 1.0, 1.5, 0, 0), DomainError);
  CHECK_THROWS_AS(gaussian_lattice_sum(kGolden, 0.0, 0.5, 0, 0), DomainError);
}

TEST_CASE("nested crowns increase the sum") {
  double prev = 0.0;
  for (double c : {1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 60.0}) {
    const auto s = gaussian_lattice_sum(kGolden, 1.0, 1e-3, 0.4, 0.1, c);
    CHECK(s.value >= prev);
    prev = s.value;
  }
  const auto full = gaussian_lattice_sum(kGolden, 1.0, 1e-3, 0.4, 0.1);
  CHECK(full.value - prev <= 1e-10 * full.value);
  // The bound really dominates the omitted terms.
  const auto small = gaussian_lattice_sum(kGolden, 1.0, 1e-3, 0.4, 0.1, 5.0);
  CHECK(full.value - small.value <= small.tail_bound);
}

TEST_CASE("cell sup and scans") {
  const double s = gaussian_lattice_sum(kGolden, 1.0, 0.01, 0.0, 0.0).value;
  const auto sup = gaussian_cell_sup(kGolden, 1.0, 0.01, 8);
  CHECK(sup.sup >= s);
  CHECK(sup.sup >= gaussian_lattice_sum(kGolden, 1.0, 0.01, 0.5, 0.25 * kGolden).value);
  CHECK(sup.max_tail_ratio <= 1e-10);
  CHECK_THROWS_AS(gaussian_cell_sup(kGolden, 1.0, 0.01, 7), RefusedError);

  const auto deltas = spectral::geometric_grid(1e-4, 1e-1, std::pow(10.0, 0.25));
  const auto coarse = lattice_sum_scan(kGolden, 1.0, deltas, 8);
  const auto fine = lattice_sum_scan(kGolden, 1.0, deltas, 16);
  CHECK(coarse.exponent <= 0.3);
  CHECK(std::fabs(coarse.exponent - fine.exponent) <= 0.02);
  for (std::size_t i = 0; i < deltas.size(); ++i) CHECK(fine.sups[i].sup >= coarse.sups[i].sup - 1e-12);
  CHECK(coarse.to_csv().rfind("delta,sup,", 0) == 0);

  CHECK_THROWS_AS(lattice_sum_scan(kGolden, 1.0, deltas, 4), RefusedError);
  CHECK_THROWS_AS(lattice_sum_scan(kGolden, 1.0, spectral::geometric_grid(1e-3, 1e-1, 2.0), 8), DomainError);
  CHECK_THROWS_AS(lattice_sum_scan(kGolden, 1.0, {1e-4, 1e-3, 3e-3, 1e-1}, 8), DomainError);
}

TEST_CASE("near-resonant angles grow") {
  const auto deltas = spectral::geometric_grid(1e-4, 1e-1, std::pow(10.0, 0.25));
  const auto near = lattice_sum_scan(0.5 + 1e-7, 1.0, deltas, 8, true);
  CHECK(near.diagnostic);
  CHECK(near.exponent > 0.4);

  // A single huge partial quotient: a jump between plateaus.
  std::vector<std::int64_t> cf(40, 1);
  cf[3] = 10000;
  const double alpha = diophantine::from_partial_quotients(cf);
  const auto spike = lattice_sum_scan(alpha, 1.0, deltas, 8, true);
  const auto golden = lattice_sum_scan(kGolden, 1.0, deltas, 8);
  CHECK(spike.sups.front().sup > 5.0 * golden.sups.front().sup);
}

TEST_CASE("mehler lattice sums") {
  const double theta = 2.0 * std::numbers::pi * (1.0 + kGolden);
  for (double t : {1.0, 0.3, 0.01, 0.001}) {
    for (double x : {0.0, 0.37, 1.9}) {
      const double direct = mehler_lattice_sum_at(symmetry::kS4, theta, t, x, 0.61);
      const double reduced = mehler_lattice_sum_reduced(symmetry::kS4, theta, t, x, 0.61);
      CHECK(std::fabs(direct - reduced) <= 1e-8 * reduced);
    }
  }
  // Each term of the sum is bounded by the kernel prefactor (2 pi rho sinh mu t)^{-1/2}; the sum exceeds the largest term.
  const auto osc = weyl::build_oscillator(symmetry::kS4);
  const double v = mehler_lattice_sum_at(symmetry::kS4, theta, 1.0, 0.0, 0.0);
  CHECK(v >= std::abs(weyl::mehler_kernel(osc, 1.0, 0.0, 0.0)));
  CHECK(std::isfinite(v));

  const double s3 = mehler_lattice_sum_at(symmetry::kS3, theta, 0.2, 0.4, 0.1);
  CHECK(std::fabs(s3 - mehler_lattice_sum_reduced(symmetry::kS3, theta, 0.2, 0.4, 0.1)) <= 1e-8 * s3);

  CHECK_THROWS_AS(mehler_lattice_sum_at(symmetry::kS4, theta, 0.0, 0, 0), DomainError);
  CHECK_THROWS_AS(mehler_lattice_sum(symmetry::kS4, theta, 0.5, 4), RefusedError);

  const auto ts = spectral::geometric_grid(1e-3, 1.0, std::pow(10.0, 0.25));
  const auto scan = mehler_scan(symmetry::kS4, "S4", theta, ts, 8);
  CHECK(scan.exponent >= 0.45);
  CHECK(scan.exponent <= 0.7);
  const auto fine = mehler_scan(symmetry::kS4, "S4", theta, ts, 16);
  CHECK(std::fabs(scan.exponent - fine.exponent) <= 0.02);
  CHECK(scan.to_csv().rfind("t,sup,", 0) == 0);
  CHECK_THROWS_AS(mehler_scan(symmetry::kS4, "S4", theta, spectral::geometric_grid(1e-2, 1.0, 2.0), 8), DomainError);
}
