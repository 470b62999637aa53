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
#include "harperlab/dynamics.hpp"
#include "harperlab/error.hpp"

using namespace harperlab;
using namespace harperlab::dynamics;

namespace {

constexpr double kPi = std::numbers::pi;
const double kTheta = 2.0 * kPi * 55.0 / 34.0;

FourierElement preset(const std::string& name, double theta = kTheta) {
  return hamiltonian_preset(name, theta).element;
}

}  // namespace

TEST_CASE("chebyshev order bounds the Bessel tail") {
  for (double x : {0.1, 1.0, 10.0, 100.0}) {
    const int k = chebyshev_order(x, 1e-10);
    CHECK(k > x);
    double tail = 0.0;
    for (int j = k + 1; j < k + 200; ++j) tail += 2.0 * std::fabs(std::cyl_bessel_j(j, x));
    CHECK(tail <= 1e-10);
  }
}

TEST_CASE("evolve: identity, Bessel propagator, unitarity, horizon") {
  const auto fc = preset("free_chain");
  const BandedMatrix h = represent_1d(fc, 0.3, SiteWindow::symmetric(60));
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(h.dim());
  psi(60) = 1.0;
  CHECK((evolve(h, psi, 0.0) - psi).norm() == 0.0);
  const auto out = evolve(h, psi, 5.0);
  CHECK(out.norm() == doctest::Approx(1.0).epsilon(1e-10));
  for (int n = -20; n <= 20; ++n) CHECK(std::fabs(std::abs(out(60 + n)) - std::fabs(std::cyl_bessel_j(std::abs(n), 10.0))) < 1e-8);

  const BandedMatrix h4 = represent_1d(preset("harper4"), 0.7, SiteWindow::symmetric(80));
  const ChebyshevPropagator prop(
      [&h4](const Eigen::VectorXcd& in, Eigen::VectorXcd& o) { o = h4.apply(in); }, gershgorin(h4), 0.1);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(h4.dim());
  v(80) = 1.0;
  for (int k = 0; k < 100; ++k) v = prop.step(v);
  CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-8));
  const Eigen::VectorXcd direct = evolve(h4, [&] { Eigen::VectorXcd e = Eigen::VectorXcd::Zero(h4.dim()); e(80) = 1.0; return e; }(), 10.0);
  CHECK((direct - v).norm() < 1e-8);

  const double tmax = max_admissible_time(h, psi);
  CHECK(tmax == doctest::Approx(25.0));
  try {
    evolve(h, psi, 30.0);
    CHECK(false);
  } catch (const RefusedError& e) {
    CHECK(std::string(e.what()).find("maximal admissible t = 25") != std::string::npos);
  }
}

TEST_CASE("moment_1d: origin, Taylor limit, ballistic sum rule") {
  const auto h4 = preset("harper4");
  CHECK(moment_1d(h4, 2.0, 0.0, std::nullopt, 0, 8) == 0.0);
  CHECK(taylor_coefficient_1d(h4) == doctest::Approx(2.0));
  CHECK(moment_1d(h4, 2.0, 0.05, std::nullopt, 0, 16) / 0.0025 == doctest::Approx(2.0).epsilon(0.01));
  const auto fc = preset("free_chain");
  for (double t : {1.0, 5.0, 10.0}) CHECK(moment_1d(fc, 2.0, t, std::nullopt, 0, 4) == doctest::Approx(2.0 * t * t).epsilon(1e-3));
  // Window doubling leaves the moments unchanged.
  TransportOptions o;
  o.t_end = 20.0;
  o.n_omega = 4;
  const auto a = transport_1d(h4, {1.0, 2.0}, o);
  o.half_width = 2 * std::stoi(a[0].metadata.at("half_width"));
  const auto b = transport_1d(h4, {1.0, 2.0}, o);
  for (std::size_t i = 0; i < a[1].m.size(); ++i) CHECK(std::fabs(a[1].m[i] - b[1].m[i]) <= 0.01 * a[1].m[i] + 1e-12);
  CHECK(a[0].metadata.at("time_reversal") == "symmetric");
  for (std::size_t i = 0; i < a[0].m.size(); ++i) {
    CHECK(a[0].m[i] >= 0.0);
    CHECK(a[0].error_bound[i] <= 0.01 * a[0].m[i] + 1e-300);
  }
  o.half_width = 10;
  CHECK_THROWS_AS(transport_1d(h4, {2.0}, o), RefusedError);
  o.half_width = 0;
  CHECK_THROWS_AS(transport_1d(h4, {2.5}, o), DomainError);
}

TEST_CASE("moment_1d: spectral filter") {
  const auto h4 = preset("harper4");
  const double full = moment_1d(h4, 2.0, 3.0, std::nullopt, 0, 4);
  CHECK(moment_1d(h4, 2.0, 3.0, Interval{-5.0, 5.0}, 0, 4) == doctest::Approx(full).epsilon(1e-10));
  const double lower = moment_1d(h4, 1.0, 0.0, Interval{-5.0, 0.0}, 0, 4);
  CHECK(lower > 0.0);
}

TEST_CASE("moment_2d: origin, Taylor limit, filter") {
  const auto h4 = preset("harper4");
  CHECK(moment_2d(h4, 1.0, 0.0, std::nullopt, 0) == 0.0);
  CHECK(taylor_coefficient_2d(h4) == doctest::Approx(4.0));
  CHECK(moment_2d(h4, 2.0, 0.05, std::nullopt, 0) / 0.0025 == doctest::Approx(4.0).epsilon(0.01));
  const double full = moment_2d(h4, 2.0, 2.0, std::nullopt, 0);
  CHECK(moment_2d(h4, 2.0, 2.0, Interval{-5.0, 5.0}, 0) == doctest::Approx(full).epsilon(1e-10));
}

TEST_CASE("moment_weyl: ground-state energy") {
  const auto h4 = preset("harper4");
  CHECK(moment_weyl(h4, "S4", 2.0, 0.0, std::nullopt) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(moment_weyl(h4, "S4", 1.0, 0.0, std::nullopt) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
  const auto h6 = preset("triangular6");
  const double mu = weyl::build_oscillator(symmetry::kS3).mu;
  CHECK(moment_weyl(h6, "S3", 2.0, 0.0, std::nullopt) == doctest::Approx(0.5 * mu).epsilon(1e-9));
  CHECK_THROWS_AS(moment_weyl(h4, "S3", 2.0, 0.0, std::nullopt), DomainError);
  // Short-time growth is quadratic: M_W(2, t) - 1/2 ~ c t^2.
  const double m1 = moment_weyl(h4, "S4", 2.0, 0.1, std::nullopt) - 0.5;
  const double m2 = moment_weyl(h4, "S4", 2.0, 0.2, std::nullopt) - 0.5;
  CHECK(m1 > 0.0);
  CHECK(m2 / m1 == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("lanczos expectation") {
  Eigen::VectorXd d(200);
  for (int i = 0; i < 200; ++i) d(i) = 0.5 + i;
  const LinearMap a = [&d](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) { out = d.cast<Complex>().cwiseProduct(in); };
  Eigen::VectorXcd psi(200);
  for (int i = 0; i < 200; ++i) psi(i) = std::exp(-0.05 * i);
  double exact = 0.0;
  for (int i = 0; i < 200; ++i) exact += std::norm(psi(i)) * std::sqrt(d(i));
  double err = 0.0;
  CHECK(lanczos_expectation(a, psi, [](double x) { return std::sqrt(x); }, 80, &err) == doctest::Approx(exact).epsilon(1e-8));
  CHECK(err < 1e-6);
}

TEST_CASE("time averages") {
  std::vector<double> t, c, sq;
  for (int k = 0; k <= 8000; ++k) {
    t.push_back(0.01 * k);
    c.push_back(3.0);
    sq.push_back(0.0001 * k * k);
  }
  for (auto mode : {AverageMode::kCesaro, AverageMode::kGaussian}) CHECK(time_average(t, c, 10.0, mode) == doctest::Approx(3.0).epsilon(1e-4));
  CHECK(time_average(t, sq, 10.0, AverageMode::kCesaro) == doctest::Approx(100.0 / 3.0).epsilon(1e-4));
  CHECK(time_average(t, sq, 10.0, AverageMode::kGaussian) == doctest::Approx(200.0).epsilon(1e-4));
  CHECK(time_average(t, sq, 12.5, AverageMode::kCesaro) == doctest::Approx(12.5 * 12.5 / 3.0).epsilon(1e-4));
  CHECK_THROWS_AS(time_average(t, c, 20.0, AverageMode::kGaussian), DomainError);
  CHECK_THROWS_AS(time_average(t, c, 10.0, AverageMode::kCesaro, 100.0), DomainError);
  std::vector<double> t1(t.begin() + 1, t.end()), c1(c.begin() + 1, c.end());
  CHECK_THROWS_AS(time_average(t1, c1, 1.0, AverageMode::kCesaro), DomainError);
}

TEST_CASE("beta estimates: calibration models") {
  TransportOptions o;
  o.t_end = 64.0;
  o.n_omega = 4;
  const auto fc = transport_1d(preset("free_chain"), {2.0}, o, "free_chain").front();
  const auto b = beta_estimate(fc, AverageMode::kCesaro);
  CHECK(b.beta == doctest::Approx(1.0).epsilon(0.05));
  CHECK(b.fit.log_t.size() >= 12u);
  const auto cp = transport_1d(preset("cosine_potential"), {2.0}, o, "cosine_potential").front();
  CHECK(beta_estimate(cp, AverageMode::kCesaro).beta == doctest::Approx(0.0).epsilon(0.05));
  o.t_end = 16.0;
  const auto short_trace = transport_1d(preset("free_chain"), {2.0}, o).front();
  CHECK_THROWS_AS(beta_estimate(short_trace, AverageMode::kCesaro), RefusedError);
  CHECK(short_trace.to_csv().rfind("t,M,error_bound\n0,0,0\n", 0) == 0);
}

TEST_CASE("beta estimates: Harper mode agreement and q ordering") {
  TransportOptions o;
  o.t_end = 384.0;
  o.n_omega = 4;
  const auto traces = transport_1d(preset("harper4"), {0.5, 1.0, 2.0}, o, "harper4");
  const auto grid = spectral::geometric_grid(2.0, 64.0, std::pow(2.0, 0.25));
  std::vector<double> betas;
  for (const auto& tr : traces) {
    const auto c = beta_estimate(tr, AverageMode::kCesaro);
    const auto g = beta_estimate(tr, AverageMode::kGaussian, grid);
    if (tr.q >= 1.0) CHECK(std::fabs(c.beta - g.beta) <= 0.05);
    betas.push_back(c.beta);
    CHECK(c.beta > 0.4);
    CHECK(c.beta < 0.8);
  }
  for (std::size_t i = 1; i < betas.size(); ++i) CHECK(betas[i] <= betas[i - 1] + 0.05);
}

TEST_CASE("main bound: free chain passes, multiplication operator is flagged") {
  BoundOptions opt;
  opt.transport.t_end = 64.0;
  opt.transport.n_omega = 4;
  opt.dos_t_min = 2.0;
  const double theta = 2.0 * kPi * 21.0 / 34.0;
  const auto free = verify_main_bound(preset("free_chain", theta), {0.25, 0.5}, opt, "free_chain");
  for (const auto& e : free.entries) {
    CHECK(e.beta.beta == doctest::Approx(1.0).epsilon(0.05));
    CHECK(e.pass);
  }
  // Diagonal model: distinct energies need one k point and a fine omega grid.
  opt.dos_n_k = 1;
  opt.dos_n_omega = 64;
  const auto neg = verify_main_bound(preset("cosine_potential", theta), {0.5}, opt, "cosine_potential");
  CHECK(neg.entries.front().beta.beta == 0.0);
  CHECK(neg.entries.front().dimension.d_mid > 0.8);
  CHECK_FALSE(neg.entries.front().pass);
  CHECK(neg.to_json().find("\"verdict\": \"FLAG\"") != std::string::npos);
  CHECK_THROWS_AS(verify_main_bound(preset("free_chain", theta), {1.5}, opt), DomainError);
}
