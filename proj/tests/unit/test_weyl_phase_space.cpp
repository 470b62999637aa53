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
#include "harperlab/fft.hpp"
#include "harperlab/weyl_phase_space.hpp"

using namespace harperlab;
using namespace harperlab::weyl;

namespace {

// Random Schwartz-like vector: a few Gaussians with random centres, widths and phases.
GridFunction schwartz(const Grid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::array<double, 5>> bumps;
  for (int k = 0; k < 4; ++k) bumps.push_back({2.0 * u(rng), 0.8 + 0.3 * u(rng), u(rng), u(rng), 2.0 * u(rng)});
  return GridFunction::sample(g, [&](double x) {
    Complex s = 0.0;
    for (const auto& b : bumps) {
      const double d = (x - b[0]) / b[1];
      s += Complex(b[2], b[3]) * std::exp(-0.5 * d * d) * std::polar(1.0, b[4] * x);
    }
    return s;
  }).normalized();
}

double distance(const GridFunction& a, const GridFunction& b) {
  GridFunction d = a;
  d.v -= b.v;
  return d.norm();
}

// min over global phases of ||a - e^{ic} b||
double distance_up_to_phase(const GridFunction& a, const GridFunction& b) {
  const Complex ip = b.inner(a);
  GridFunction c = b;
  c.v *= std::abs(ip) > 0 ? ip / std::abs(ip) : Complex(1.0);
  return distance(a, c);
}

}  // namespace

TEST_CASE("lattice grid commensuration") {
  auto g = Grid::lattice(55, 21, 110, 2, 0.0);
  CHECK(g.n == 4620);
  CHECK(g.dual_exact());
  CHECK(g.shift_points(g.sqrt_theta() * 3) == 330);
  CHECK(g.shift_points(2.0 * M_PI / g.sqrt_theta()) == 110 * 21 / 55);
  CHECK_THROWS_AS(g.shift_points(0.5 * g.h), DomainError);
  auto c = theta_convergent(2.0 * M_PI * (1.0 + (std::sqrt(5.0) - 1.0) / 2.0), 700);
  CHECK(c.p == 987);
  CHECK(c.q == 610);
  auto g2 = Grid::for_theta(2.0 * M_PI * 0.3819660112501051, 16, 0, 13);
  CHECK(g2.q <= 13);
  CHECK(g2.L >= 24.0 * std::sqrt(g2.theta_target) * 0.99);
  CHECK(g2.theta_error() < 2.0 * M_PI / (13.0 * 13.0));
}

TEST_CASE("Weyl operators") {
  auto g = Grid::plain(20.0, 512);
  auto psi = schwartz(g, 1);
  auto id = weyl_operator(0.0, 0.0, psi);
  CHECK(distance(id, psi) == 0.0);
  auto w = weyl_operator(7 * g.h, 0.9, psi);
  CHECK(std::fabs(w.norm() - 1.0) < 1e-12);
  const double a1 = 5 * g.h, a2 = 0.4, b1 = -9 * g.h, b2 = 1.3;
  auto lhs = weyl_operator(a1, a2, weyl_operator(b1, b2, psi));
  auto rhs = weyl_operator(a1 + b1, a2 + b2, psi);
  rhs.v *= std::polar(1.0, 0.5 * (a1 * b2 - a2 * b1));
  CHECK(distance(lhs, rhs) < 1e-12);
  CHECK_THROWS_AS(weyl_operator(0.3 * g.h, 0.0, psi), DomainError);

  auto osc = build_oscillator(symmetry::kS4);
  auto phi = ground_state(osc, g);
  for (int k : {0, 1, 3, 10}) {
    const double b = k * g.h;
    const Complex num = weyl_matrix_element(phi, b, 0.7, phi);
    CHECK(std::abs(num - std::exp(-(b * b + 0.49) / 4.0)) < 1e-12);
  }
  for (auto s : {symmetry::kS3, symmetry::kS6}) {
    auto o = build_oscillator(s);
    auto f = ground_state(o, g);
    CHECK(std::fabs(f.norm() - 1.0) < 1e-12);
    for (int k : {-4, 0, 7}) {
      const Complex num = weyl_matrix_element(f, k * g.h, -0.6, f);
      CHECK(std::abs(num - ground_state_overlap(o, k * g.h, -0.6)) < 1e-12);
    }
  }
}

TEST_CASE("Fourier transform matches FFT and direct sums on a self-dual grid") {
  const int n = 256;
  const double h = std::sqrt(2.0 * M_PI / n);
  auto g = Grid::plain(0.5 * n * h, n);
  auto f = schwartz(g, 2);
  auto ft = fourier_transform(f);
  auto s4 = metaplectic(to_matrix(symmetry::kS4), f);
  CHECK(distance(ft, s4) < 1e-12);
  // FFT oracle: x_j y_m = L^2 - L h (j + m) + 2 pi j m / n
  Eigen::VectorXcd a(n);
  for (int j = 0; j < n; ++j) a(j) = f.v(j) * std::polar(1.0, g.L * g.h * j);
  fft::dft(a, -1);
  double worst = 0.0, direct = 0.0;
  for (int m = 0; m < n; ++m) {
    const Complex oracle = h / std::sqrt(2.0 * M_PI) * a(m) *
                           std::polar(1.0, -g.L * g.L + g.L * g.h * m);
    worst = std::max(worst, std::abs(oracle - ft.v(m)));
    if (m % 17 == 0) {
      Complex d = 0.0;
      for (int j = 0; j < n; ++j) d += std::polar(1.0, -g.x(j) * g.x(m)) * f.v(j);
      direct = std::max(direct, std::abs(d * h / std::sqrt(2.0 * M_PI) - ft.v(m)));
    }
  }
  CHECK(worst < 1e-10);
  CHECK(direct < 1e-10);
  // Gaussian is a fixed point
  auto gauss = ground_state(build_oscillator(symmetry::kS4), g);
  CHECK(distance(fourier_transform(gauss), gauss) < 1e-10);
}

TEST_CASE("metaplectic transforms") {
  auto g = Grid::plain(24.0, 1024);
  auto f = schwartz(g, 3);
  CHECK(distance(metaplectic(Eigen::Matrix2d::Identity(), f), f) == 0.0);
  auto d3 = decompose(to_matrix(symmetry::kS3));
  CHECK(d3.kappa == doctest::Approx(1.0));
  CHECK(d3.lambda == doctest::Approx(1.0));
  CHECK(d3.s == doctest::Approx(M_PI / 2));
  auto d6 = decompose(to_matrix(symmetry::kS6));
  CHECK(d6.kappa == doctest::Approx(0.5));
  CHECK(d6.lambda == doctest::Approx(std::sqrt(2.0)));
  CHECK(d6.s == doctest::Approx(M_PI / 4));
  Eigen::Matrix2d bad;
  bad << 2, 0, 0, 1;
  CHECK_THROWS_AS(decompose(bad), DomainError);

  for (auto s : {symmetry::kS3, symmetry::kS4, symmetry::kS6}) {
    const auto sm = to_matrix(s);
    auto fs = metaplectic(sm, f);
    CHECK(std::fabs(fs.norm() - 1.0) < 1e-8);
    const int k1 = 6, k2 = -11;
    const double a1 = k1 * g.h, a2 = k2 * g.h;
    const Eigen::Vector2d sa = sm * Eigen::Vector2d(a1, a2);
    auto lhs = metaplectic(sm, weyl_operator(a1, a2, f));
    auto rhs = weyl_operator(g.h * std::round(sa(0) / g.h), sa(1), fs);
    CHECK(distance(lhs, rhs) < 1e-6);
  }
  auto s3 = to_matrix(symmetry::kS3);
  auto cube = metaplectic(s3, metaplectic(s3, metaplectic(s3, f)));
  CHECK(distance_up_to_phase(cube, f) < 1e-6);
  // rotation group law up to phase and the small-angle branch
  auto r1 = rotation(0.3, rotation(0.5, f));
  CHECK(distance_up_to_phase(r1, rotation(0.8, f)) < 1e-6);
  CHECK(distance(rotation(1e-8, f), f) == 0.0);
  CHECK(distance_up_to_phase(rotation(M_PI, f), rotation(M_PI / 2, rotation(M_PI / 2, f))) < 1e-8);
}

TEST_CASE("symmetry oscillators") {
  auto o4 = build_oscillator(symmetry::kS4);
  CHECK(o4.r == 4);
  CHECK((o4.m - Eigen::Matrix2d::Identity()).norm() < 1e-15);
  CHECK(o4.lambda == doctest::Approx(1.0));
  CHECK(std::abs(o4.sigma - 1.0) < 1e-15);
  auto o3 = build_oscillator(symmetry::kS3);
  CHECK(o3.r == 3);
  CHECK(o3.mu_minus > 0.0);
  Eigen::Matrix2d m3;
  m3 << 2, 1, 1, 2;
  CHECK((o3.m - m3 * (2.0 / 3.0)).norm() < 1e-14);
  auto o6 = build_oscillator(symmetry::kS6);
  CHECK(o6.r == 6);
  CHECK(o6.mu_plus * o6.mu_minus == doctest::Approx(o6.m.determinant()));
  CHECK(o6.mu == doctest::Approx(std::sqrt(o6.m.determinant())));
  CHECK(o6.sigma.real() > 0.0);
  CHECK_THROWS_AS(build_oscillator(IntMatrix2{}), DomainError);
  CHECK_THROWS_AS(build_oscillator(IntMatrix2{-1, 0, 0, -1}), DomainError);
  CHECK_THROWS_AS(build_oscillator(IntMatrix2{1, 1, 0, 1}), DomainError);
}

TEST_CASE("oscillator spectra, ground states and symmetry on the grid") {
  auto g = Grid::plain(16.0, 400);
  for (auto s : {symmetry::kS3, symmetry::kS4, symmetry::kS6}) {
    auto osc = build_oscillator(s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(oscillator_matrix(osc, g));
    for (int n = 0; n < 20; ++n)
      CHECK(std::fabs(es.eigenvalues()(n) - osc.mu * (n + 0.5)) < 1e-8 * (n + 1));
    GridFunction v0;
    v0.grid = g;
    v0.v = es.eigenvectors().col(0) / std::sqrt(g.h);
    auto phi = ground_state(osc, g);
    CHECK(distance_up_to_phase(v0, phi) < 1e-8);
    auto hphi = apply_oscillator(osc, phi);
    CHECK(distance(hphi, GridFunction{g, phi.v * (0.5 * osc.mu)}) < 1e-8);
    const auto sm = to_matrix(s);
    CHECK(distance_up_to_phase(metaplectic(sm, phi), phi) < 1e-6);
    double worst = 0.0;
    for (int n = 0; n < 50; ++n) {
      GridFunction v{g, es.eigenvectors().col(n) / std::sqrt(g.h)};
      auto lhs = metaplectic(sm, apply_oscillator(osc, v));
      auto rhs = apply_oscillator(osc, metaplectic(sm, v));
      worst = std::max(worst, distance(lhs, rhs) / (n + 1));
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("Mehler kernel") {
  auto o4 = build_oscillator(symmetry::kS4);
  CHECK(std::abs(mehler_kernel(o4, 1.0, 0.0, 0.0) - 1.0 / std::sqrt(2.0 * M_PI * std::sinh(1.0))) < 1e-15);
  CHECK_THROWS_AS(mehler_kernel(o4, 0.0, 0.0, 0.0), DomainError);
  for (double t : {0.1, 0.5, 2.0}) {
    for (double x : {-1.3, 0.0, 0.7}) {
      for (double y : {-0.4, 1.1}) {
        auto hx = hermite_functions(200, x), hy = hermite_functions(200, y);
        double s = 0.0;
        for (int n = 0; n < 200; ++n) s += std::exp(-t * (n + 0.5)) * hx[n] * hy[n];
        CHECK(std::abs(mehler_kernel(o4, t, x, y) - s) < 1e-6);
      }
    }
  }
  auto g = Grid::plain(14.0, 320);
  for (auto s : {symmetry::kS3, symmetry::kS6}) {
    auto osc = build_oscillator(s);
    CHECK(std::abs(mehler_kernel(osc, 0.7, 0.3, -0.8) - std::conj(mehler_kernel(osc, 0.7, -0.8, 0.3))) < 1e-15);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(oscillator_matrix(osc, g));
    const double t = 0.6;
    Eigen::VectorXd decay = (-t * es.eigenvalues().array()).exp();
    Eigen::MatrixXcd k = es.eigenvectors() * decay.asDiagonal() * es.eigenvectors().adjoint() / g.h;
    double worst = 0.0;
    for (int j : {140, 160, 175}) {
      for (int l : {150, 165, 190}) worst = std::max(worst, std::abs(k(j, l) - mehler_kernel(osc, t, g.x(j), g.x(l))));
    }
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("gauge slices and the direct integral") {
  auto g = Grid::lattice(987, 610, 8, 1, 0.0);
  const double theta = g.theta;
  auto gauss = GridFunction::sample(g, [](double x) { return std::exp(-0.5 * (x - 0.3) * (x - 0.3)); });
  auto mix = GridFunction::sample(g, [](double x) {
    return std::exp(-0.5 * x * x) * std::polar(1.0, 0.4 * x) + 0.5 * std::exp(-(x - 2.0) * (x - 2.0));
  });
  auto sl = gauge_slices(mix);
  double q = 0.0;
  for (const auto& s : sl.slices) q += sl.d_omega * s.squaredNorm();
  CHECK(std::fabs(q - mix.norm() * mix.norm()) < 1e-6);

  const double r = g.sqrt_theta();
  auto bump = GridFunction::sample(g, [&](double x) { return x >= 0.0 && x < r - 1e-9 ? 1.0 : 0.0; });
  for (const auto& s : gauge_slices(bump).slices) CHECK((s.array() != Complex(0.0)).count() == 1);

  auto sg = gauge_slices(gauss);
  auto w10 = FourierElement::word(theta, {1, 0});
  CHECK(std::abs(direct_integral(sl, w10, sg) - weyl_representation_element(mix, w10, gauss)) < 1e-6);
  std::mt19937 rng(4);
  std::normal_distribution<double> nd;
  std::vector<FourierElement::Term> terms;
  for (int k = 0; k < 6; ++k) terms.push_back({{int(rng() % 5) - 2, int(rng() % 5) - 2}, {nd(rng), nd(rng)}});
  FourierElement a(theta, terms);
  CHECK(std::abs(direct_integral(sl, a, sg) - weyl_representation_element(mix, a, gauss)) < 1e-6);
}

TEST_CASE("resolution of identity by coherent states") {
  auto g = Grid::plain(16.0, 256);
  auto psi = ground_state(build_oscillator(symmetry::kS4), g);
  auto phi = schwartz(g, 8);
  GridFunction rec{g, Eigen::VectorXcd::Zero(g.n)};
  const int step = 2;
  const double db1 = step * g.h, db2 = 0.2;
  for (int i = -60; i <= 60; ++i) {
    for (int k = -60; k <= 60; ++k) {
      auto w = weyl_operator(i * db1, k * db2, psi);
      rec.v += w.v * (w.inner(phi) * db1 * db2 / (2.0 * M_PI));
    }
  }
  CHECK(distance(rec, phi) < 1e-3);
}

TEST_CASE("grid function CSV") {
  auto g = Grid::plain(1.0, 4);
  auto f = GridFunction::sample(g, [](double x) { return Complex(x, 1.0); });
  auto csv = f.to_csv();
  CHECK(csv.rfind("x,re,im\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
