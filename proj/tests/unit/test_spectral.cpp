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
#include <random>

#include "doctest.h"
#include "harperlab/error.hpp"
#include "harperlab/spectral.hpp"

using namespace harperlab;
using namespace harperlab::spectral;

namespace {
const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;
const std::vector<double> kQs{-1.0, 0.25, 0.5, 2.0};

EmpiricalMeasure coincident(double e, int n) {
  return EmpiricalMeasure(std::vector<Atom>(n, Atom{e, 1.0 / n}));
}
}  // namespace

TEST_CASE("eigensolver paths agree with dense reference") {
  std::mt19937 rng(2);
  std::normal_distribution<double> g;
  const double th = 2.0 * M_PI * kGolden;
  std::vector<FourierElement::Term> terms{{{1, 0}, {g(rng), g(rng)}}, {{0, 1}, {g(rng), g(rng)}}, {{0, 0}, g(rng)}};
  FourierElement a(th, terms);
  a = a + a.adjoint();
  for (auto elem : {a, hamiltonian_preset("triangular6", th).element, hamiltonian_preset("cosine_potential", th).element}) {
    auto m = represent_1d(elem, 0.3, SiteWindow{1, 80});
    auto es = hermitian_eigensystem(m, true);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ref(m.to_dense());
    CHECK((es.values - ref.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::MatrixXcd dense = m.to_dense();
    CHECK((dense * es.vectors - es.vectors * es.values.cast<Complex>().asDiagonal()).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("DOS of H4: mass, moments, support, symmetry") {
  const double th = 2.0 * M_PI * 377.0 / 610.0;
  auto h = hamiltonian_preset("harper4", th).element;
  auto mu = dos_estimate(h, 400, 16);
  CHECK(mu.size() == 6400);
  CHECK(std::fabs(mu.total_mass() - 1.0) <= 2.3e-16);
  CHECK(std::fabs(mu.moment(1)) < 0.01);
  CHECK(std::fabs(mu.moment(2) - (2.0 * 399.0 / 400.0 + 2.0)) < 1e-10);
  CHECK(std::fabs(mu.moment(3)) < 0.05);
  CHECK(mu.min_energy() >= -4.01);
  CHECK(mu.max_energy() <= 4.01);
  const double err = 2.0 / std::sqrt(400.0 * 16.0);
  for (double e : {0.5, 1.3, 2.2, 3.1}) CHECK(std::fabs(mu.mass(-e, 0.0) - mu.mass(0.0, e)) < err + 1e-12);
  CHECK_THROWS_AS(dos_estimate(h, 10, 16), DomainError);
  auto bl = dos_estimate_bloch(hamiltonian_preset("harper4", 2.0 * M_PI * 21.0 / 34.0).element, 4, 4);
  CHECK(bl.size() == 34u * 16u);
  CHECK(std::fabs(bl.moment(2) - 4.0) < 1e-12);
  CHECK(std::fabs(bl.moment(1)) < 1e-12);
  CHECK_THROWS_AS(dos_estimate_bloch(hamiltonian_preset("harper4", 2.0 * M_PI * kGolden).element, 2, 2), DomainError);
}

TEST_CASE("smoothed mass") {
  auto pm = point_mass(0.4, 0.7);
  for (double t : {0.1, 1.0, 100.0}) CHECK(smoothed_mass(pm, 0.4, t) == doctest::Approx(0.7));
  auto u = uniform_measure(100000);
  CHECK(smoothed_mass(u, 0.5, 100.0) == doctest::Approx(std::sqrt(M_PI) / 100.0).epsilon(1e-4));
  CHECK(smoothed_mass(u, 0.5, 1e-4) == doctest::Approx(1.0).epsilon(1e-6));
  // binned FFT path and direct path agree
  auto d_small = smoothed_masses_at_atoms(uniform_measure(20000), 3.0, Kernel::kGaussian);
  auto u2 = uniform_measure(20000);
  for (std::size_t i : {0u, 5000u, 19999u})
    CHECK(d_small[i] == doctest::Approx(smoothed_mass(u2, u2.atoms()[i].e, 3.0)).epsilon(1e-3));
  auto ind = smoothed_masses_at_atoms(u2, 10.0, Kernel::kIndicator);
  CHECK(ind[10000] == doctest::Approx(0.2).epsilon(1e-3));
}

TEST_CASE("scaling fit") {
  std::vector<double> t = geometric_grid(1.0, 1000.0, 1.5), v;
  for (double x : t) v.push_back(3.0 * std::pow(x, -0.7));
  auto f = fit_scaling(t, v);
  CHECK(f.slope == doctest::Approx(-0.7));
  CHECK(f.limsup >= f.liminf);
  CHECK(f.residual_rms < 1e-12);
  CHECK(f.t_min < f.t_max);
  CHECK_THROWS_AS(fit_scaling({1.0, 2.0}, {1.0, 2.0}), RefusedError);
  auto g = geometric_grid(2.0, 128.0, std::pow(2.0, 0.25));
  CHECK(g.size() == 25);
  CHECK(g.back() == doctest::Approx(128.0));
}

TEST_CASE("dimension calibration: Lebesgue, Cantor, point mass") {
  const auto tg = geometric_grid(10.0, 1e5, std::pow(2.0, 0.25));
  for (const auto& d : multifractal_dimensions(uniform_measure(100000), {0.0, 1.0}, kQs, tg))
    CHECK(std::fabs(d.d_mid - 1.0) <= 0.05);
  for (const auto& d : multifractal_dimensions(cantor_measure(12), {0.0, 1.0}, kQs, tg)) {
    CHECK(std::fabs(d.d_mid - std::log(2.0) / std::log(3.0)) <= 0.03);
    CHECK(d.capped);
    CHECK(d.d_plus >= d.d_minus);
  }
  for (const auto& d : multifractal_dimensions(coincident(0.3, 64), {0.0, 1.0}, kQs, tg))
    CHECK(std::fabs(d.d_mid) <= 0.01);
  CHECK_THROWS_AS(multifractal_dimension(point_mass(0.3), {0.0, 1.0}, 0.5, tg), RefusedError);
  CHECK_THROWS_AS(multifractal_dimension(cantor_measure(8), {0.0, 1.0}, 1.0, tg), DomainError);
}

TEST_CASE("indicator kernel agrees with Gaussian kernel") {
  const auto tg = geometric_grid(10.0, 4096.0, std::pow(2.0, 0.25));
  DimensionOptions ind;
  ind.kernel = Kernel::kIndicator;
  auto c = cantor_measure(12);
  auto g = multifractal_dimensions(c, {0.0, 1.0}, kQs, tg);
  auto i = multifractal_dimensions(c, {0.0, 1.0}, kQs, tg, ind);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(std::fabs(g[k].d_mid - i[k].d_mid) <= 0.02);
}

TEST_CASE("affine invariance and nested intervals") {
  auto c = cantor_measure(10);
  const auto tg = geometric_grid(10.0, 1000.0, std::pow(2.0, 0.25));
  std::vector<double> tg2;
  for (double t : tg) tg2.push_back(t / 2.5);
  auto a = multifractal_dimensions(c, {0.0, 1.0}, kQs, tg);
  auto b = multifractal_dimensions(c.affine(2.5, -1.0), {-1.0, 1.5}, kQs, tg2);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::fabs(a[k].d_mid_raw - b[k].d_mid_raw) <= 0.01);
  // I_q is monotone in Delta for q < 1
  auto inner = multifractal_dimension(c, {0.0, 0.4}, 0.5, tg);
  auto outer = multifractal_dimension(c, {0.0, 1.0}, 0.5, tg);
  for (std::size_t k = 0; k < inner.fit.log_value.size(); ++k)
    CHECK(inner.fit.log_value[k] <= outer.fit.log_value[k] + 1e-14);
}

TEST_CASE("level set partition") {
  auto u = uniform_measure(20000);
  auto r = level_set_partition(u, 100.0, 0.5);
  CHECK(r.margin >= 0.0);
  CHECK(std::fabs(r.alpha - 1.0) < 0.3);
  CHECK(r.kappa == 4.0);
  auto c = cantor_measure(12);
  auto rc = level_set_partition(c, std::pow(3.0, 6), 0.5);
  CHECK(rc.margin >= 0.0);
  CHECK(rc.c_fit > 0.0);
  CHECK(rc.c_fit <= std::log(rc.t));
  auto pm = coincident(0.5, 2000);
  auto rp = level_set_partition(pm, 50.0, 0.5);
  CHECK(std::fabs(rp.alpha) < 1.0 / std::log(50.0) + 1e-12);
  CHECK_THROWS_AS(level_set_partition(cantor_measure(5), 10.0, 0.5), RefusedError);
  CHECK_THROWS_AS(level_set_partition(c, 10.0, 0.0), DomainError);
}

TEST_CASE("measure CSV and restriction") {
  auto u = uniform_measure(10);
  CHECK(u.restricted(0.0, 0.5).size() == 5);
  CHECK(u.mass(0.0, 0.5) == doctest::Approx(0.5));
  CHECK(u.to_csv().rfind("E,w\n", 0) == 0);
  CHECK_THROWS_AS(EmpiricalMeasure({{0.0, -1.0}}), DomainError);
}
