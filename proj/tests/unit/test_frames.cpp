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

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "harperlab/error.hpp"
#include "harperlab/frames.hpp"

using namespace harperlab;
using namespace harperlab::frames;

namespace {

constexpr double kPi = std::numbers::pi;

const Grid& golden_grid() {
  static const Grid g = Grid::lattice(55, 21, 110, 2, 2.0 * kPi * 55.0 / 21.0);
  return g;
}

GridFunction probe(const Grid& g) {
  return GridFunction::sample(g, [](double x) {
    return Complex(std::exp(-0.3 * (x - 0.4) * (x - 0.4)), 0.2 * x * std::exp(-0.5 * x * x));
  });
}

}  // namespace

TEST_CASE("tracial vector: orthonormal lattice translates") {
  const Grid& g = golden_grid();
  const auto psi = tracial_vector(g, 2.0);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(tracial_defect(psi, 4) < 1e-12);
  const auto fo = frame_operator(psi, 4);
  CHECK_FALSE(fo.tail_flagged);
  CHECK(std::abs(fo.d.coefficient({0, 0}) - 1.0) < 1e-12);
  CHECK((fo.d - FourierElement::identity(g.theta)).pruned(0.0).max_abs() < 1e-12);
}

TEST_CASE("tracial vector: refusals") {
  const Grid below = Grid::lattice(1, 2, 8, 4, kPi);
  CHECK_THROWS_AS(tracial_vector(below, 0.1), RefusedError);
  const Grid critical = Grid::lattice(1, 1, 16, 8, 2.0 * kPi);
  CHECK_THROWS_AS(tracial_vector(critical, 0.1), RefusedError);
  const auto ind = tracial_vector(critical, 0.0, true);
  CHECK(tracial_defect(ind, 2) < 1e-12);
  CHECK_THROWS_AS(tracial_vector(golden_grid(), 7.0), DomainError);
  CHECK_THROWS_AS(tracial_vector(golden_grid(), 0.0), DomainError);
}

TEST_CASE("frame operator: Gaussian coefficients and dual-lattice identity") {
  const Grid& g = golden_grid();
  const auto gs = named_vector("gauss-S4", g);
  const auto fo = frame_operator(gs, 6);
  CHECK_FALSE(fo.tail_flagged);
  for (int m1 = -2; m1 <= 2; ++m1) {
    for (int m2 = -2; m2 <= 2; ++m2) {
      const double expect = std::exp(-g.theta * (m1 * m1 + m2 * m2) / 4.0);
      CHECK(std::abs(fo.d.coefficient({m1, m2}) - expect) < 1e-12);
    }
  }
  const auto phi = probe(g);
  const auto lhs = dual_lattice_frame_apply(gs, phi, 6);
  auto rhs = apply_weyl_element(fo.d, phi);
  rhs.v *= g.theta / (2.0 * kPi);
  CHECK((lhs.v - rhs.v).norm() / lhs.v.norm() < 1e-8);
}

TEST_CASE("frame bounds, inverse and reconstruction") {
  const Grid& g = golden_grid();
  const auto gs = named_vector("gauss-S4", g);
  const auto fo = frame_operator(gs, 6);
  const auto fb = frame_bounds(fo.d, 200, 8);
  // Symbol bounds: 1 +- sum_{m != 0} e^{-theta |m|^2 / 4}.
  double off = 0.0;
  for (int m1 = -6; m1 <= 6; ++m1)
    for (int m2 = -6; m2 <= 6; ++m2)
      if (m1 || m2) off += std::exp(-g.theta * (m1 * m1 + m2 * m2) / 4.0);
  CHECK(fb.lower >= 1.0 - off - 1e-12);
  CHECK(fb.upper <= 1.0 + off + 1e-12);
  CHECK(fb.lower > 0.9);

  const auto dinv = functional_calculus(fo.d, [](double x) { return 1.0 / x; }, 12);
  CHECK((weyl_product(dinv, fo.d) - FourierElement::identity(g.theta)).pruned(0.0).max_abs() < 1e-12);
  const auto phi = probe(g);
  const auto rec = reconstruct(gs, dinv, phi, 16);
  CHECK((rec.v - phi.v).norm() / phi.v.norm() < 1e-10);

  const auto hat = normalized_frame_vector(gs, fo.d);
  CHECK(tracial_defect(hat, 3) < 1e-12);
}

TEST_CASE("functional calculus against algebraic identities") {
  const double theta = 2.0 * kPi * 3.0 / 7.0;
  const auto h = hamiltonian_preset("harper4", theta).element;
  const auto sq = functional_calculus(h, [](double x) { return x * x; }, 4, 4);
  CHECK((sq - weyl_product(h, h)).pruned(0.0).max_abs() < 1e-12);
  const auto shifted = h + FourierElement::identity(theta) * 5.0;
  const auto root = functional_calculus(shifted, [](double x) { return std::sqrt(x); }, 12, 8);
  CHECK((weyl_product(root, root) - shifted).pruned(0.0).max_abs() < 1e-6);
  const auto nonsa = FourierElement::word(theta, {1, 0});
  CHECK_THROWS_AS(functional_calculus(nonsa, [](double x) { return x; }, 2), DomainError);
  const auto irr = hamiltonian_preset("harper4", 2.0).element;
  CHECK_THROWS_AS(functional_calculus(irr, [](double x) { return x; }, 2), DomainError);
}

TEST_CASE("dual element: projection and trace law") {
  const Grid& g = golden_grid();
  const auto psi = named_vector("tracial", g);
  const auto tp = dual_frame_element(psi, 32);
  CHECK(tp.theta() == doctest::Approx(4.0 * kPi * kPi / g.theta).epsilon(1e-14));
  CHECK(trace(tp).real() == doctest::Approx(2.0 * kPi / g.theta).epsilon(1e-12));
  CHECK((weyl_product(tp, tp) - tp).max_abs() < 1e-6);
  const auto comp = FourierElement::identity(tp.theta()) - tp;
  double acc = 0.0;
  for (int k = 0; k < 8; ++k) acc += trace_per_volume(comp, 2.0 * kPi * k / 8.0, 2000).real();
  CHECK(acc / 8.0 == doctest::Approx(1.0 - 2.0 * kPi / g.theta).epsilon(1e-3));
}

TEST_CASE("theta function zero certificate") {
  const auto r = theta_zero_certificate(30);
  CHECK(r.f_at_zero > 1.0);
  CHECK(r.zero_residual < 1e-12);
  CHECK(r.winding == 1);
  CHECK(r.winding_integral == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.periodicity_error < 1e-9);
  CHECK(r.quasi_periodicity_error < 1e-9);
  CHECK(r.c1 > 0.0);
  CHECK(r.lower_bound_exponent == doctest::Approx(1.0).epsilon(0.05));
  CHECK(r.passed);
  // f(0) = sum e^{-pi n^2}
  double s = 0.0;
  for (int n = -10; n <= 10; ++n) s += std::exp(-kPi * n * n);
  CHECK(r.f_at_zero == doctest::Approx(s).epsilon(1e-14));
  CHECK_THROWS_AS(theta_zero_certificate(5), DomainError);
}

TEST_CASE("density of states sandwich") {
  const Grid& g = golden_grid();
  const auto gs = named_vector("gauss-S4", g);
  const auto fo = frame_operator(gs, 6);
  const auto h = hamiltonian_preset("harper4", g.theta).element;
  const auto r = dos_equivalence_check(h, fo.d, 200, 8, 64, 10);
  CHECK(r.holds);
  CHECK(r.violations == 0);
  CHECK(r.c > 0.9);
  CHECK(r.dos_total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.rho_2d_total == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.max_2d_difference < 0.1);
  // Tracial vector: D = 1 so rho and N coincide.
  const auto tr = frame_operator(named_vector("tracial", g), 4);
  const auto r1 = dos_equivalence_check(h, tr.d.pruned(1e-10), 200, 4, 64, 0);
  for (const auto& b : r1.bins) CHECK(std::fabs(b.rho - b.dos) < 1e-10);
}

TEST_CASE("frame report json") {
  const auto rep = frame_report("gauss-S3", golden_grid(), 6, 2, 100, 4);
  CHECK(rep.q == 21);
  CHECK(rep.frame_lower > 0.0);
  CHECK(rep.to_json().find("\"vector\": \"gauss-S3\"") != std::string::npos);
  CHECK_THROWS_AS(named_vector("bogus", golden_grid()), ConfigError);
}
