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

#include "harperlab/weyl_phase_space.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "harperlab/error.hpp"
#include "harperlab/fft.hpp"

namespace harperlab::weyl {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

void require_same_grid(const GridFunction& a, const GridFunction& b) {
  if (a.grid.n != b.grid.n || a.grid.h != b.grid.h || a.grid.L != b.grid.L)
    throw DomainError("grid functions live on different grids");
}

GridFunction with_values(const Grid& g, Eigen::VectorXcd v) {
  GridFunction out;
  out.grid = g;
  out.v = std::move(v);
  return out;
}

GridFunction parity(const GridFunction& f) {
  const int n = f.grid.n;
  Eigen::VectorXcd v(n);
  for (int j = 0; j < n; ++j) v(j) = f.v((n - j) % n);
  return with_values(f.grid, std::move(v));
}

GridFunction spectral_multiply(const GridFunction& f, const std::function<Complex(double)>& mult) {
  Eigen::VectorXcd v = f.v;
  fft::dft(v, -1);
  for (int m = 0; m < f.grid.n; ++m) v(m) *= mult(f.grid.wavenumber(m));
  fft::dft(v, +1);
  return with_values(f.grid, v / static_cast<double>(f.grid.n));
}

}  // namespace

Grid Grid::plain(double half_width, int n_points) {
  if (!(half_width > 0.0) || n_points < 2) throw DomainError("Grid: need L > 0 and n >= 2");
  Grid g;
  g.n = n_points;
  g.L = half_width;
  g.h = 2.0 * half_width / n_points;
  return g;
}

Grid Grid::lattice(std::int64_t p, std::int64_t q, int K, int n_cells, double theta_target) {
  if (p <= 0 || q <= 0 || K < 1 || n_cells < 1) throw DomainError("Grid: bad lattice parameters");
  Grid g;
  g.p = p;
  g.q = q;
  g.K = K;
  g.n_cells = n_cells;
  g.theta = kTwoPi * static_cast<double>(p) / static_cast<double>(q);
  g.theta_target = theta_target > 0.0 ? theta_target : g.theta;
  const std::int64_t n = static_cast<std::int64_t>(n_cells) * q * K;
  if (n > (1 << 26)) throw DomainError("Grid: too many points");
  if (n % 2 != 0) throw DomainError("Grid: n_cells * q * K must be even");
  g.n = static_cast<int>(n);
  g.h = std::sqrt(g.theta) / K;
  g.L = 0.5 * g.n * g.h;
  return g;
}

Grid Grid::for_theta(double theta_target, int K, int n_cells, std::int64_t max_q) {
  const auto c = theta_convergent(theta_target, max_q);
  if (n_cells <= 0) {
    const double cell = c.q * std::sqrt(kTwoPi * static_cast<double>(c.p) / c.q);
    n_cells = std::max<int>(1, static_cast<int>(std::ceil(48.0 * std::sqrt(theta_target) / cell)));
    if ((static_cast<std::int64_t>(n_cells) * c.q * K) % 2 != 0) ++n_cells;
  }
  return lattice(c.p, c.q, K, n_cells, theta_target);
}

int Grid::shift_points(double a1) const {
  const double r = a1 / h;
  const double k = std::nearbyint(r);
  if (std::fabs(r - k) > 1e-9 * std::max(1.0, std::fabs(r))) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "off-grid shift a1=%.17g; nearest admissible value %.17g", a1,
                  k * h);
    throw DomainError(buf);
  }
  return static_cast<int>(k);
}

double Grid::wavenumber(int m) const {
  const int signed_m = m < n / 2 ? m : m - n;
  return kTwoPi * signed_m / (n * h);
}

diophantine::Convergent theta_convergent(double theta, std::int64_t max_q) {
  if (!(theta > 0.0)) throw DomainError("theta must be positive");
  if (max_q < 1) throw DomainError("max_q must be >= 1");
  const double beta = theta / kTwoPi;
  const double n0 = std::floor(beta);
  const double frac = beta - n0;
  const auto whole = static_cast<std::int64_t>(n0);
  diophantine::Convergent best{whole, 1};
  if (frac <= 0.0) return best;
  const auto cf = diophantine::continued_fraction(frac, 60);
  for (const auto& c : cf.convergents) {
    if (c.q > max_q) break;
    best = {whole * c.q + c.p, c.q};
  }
  return best;
}

GridFunction GridFunction::sample(const Grid& g, const std::function<Complex(double)>& f) {
  Eigen::VectorXcd v(g.n);
  for (int j = 0; j < g.n; ++j) v(j) = f(g.x(j));
  return with_values(g, std::move(v));
}

double GridFunction::norm() const { return std::sqrt(grid.h) * v.norm(); }

Complex GridFunction::inner(const GridFunction& other) const {
  require_same_grid(*this, other);
  return grid.h * v.dot(other.v);
}

GridFunction GridFunction::normalized() const {
  const double nrm = norm();
  if (!(nrm > 0.0)) throw NumericalError("cannot normalize a zero grid function");
  return with_values(grid, v / nrm);
}

std::string GridFunction::to_csv() const {
  std::string out = "x,re,im\n";
  char buf[128];
  for (int j = 0; j < grid.n; ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", grid.x(j), v(j).real(), v(j).imag());
    out += buf;
  }
  return out;
}

GridFunction weyl_operator(double a1, double a2, const GridFunction& psi) {
  const Grid& g = psi.grid;
  const int k = g.shift_points(a1);
  const int n = g.n;
  const int shift = ((k % n) + n) % n;
  const Complex global = std::polar(1.0, 0.5 * a1 * a2);
  Eigen::VectorXcd v(n);
  for (int j = 0; j < n; ++j) {
    v(j) = global * std::polar(1.0, a2 * g.x(j)) * psi.v((j + shift) % n);
  }
  return with_values(g, std::move(v));
}

Complex weyl_matrix_element(const GridFunction& phi, double a1, double a2, const GridFunction& psi) {
  return phi.inner(weyl_operator(a1, a2, psi));
}

GridFunction apply_q(const GridFunction& f) {
  Eigen::VectorXcd v(f.grid.n);
  for (int j = 0; j < f.grid.n; ++j) v(j) = f.grid.x(j) * f.v(j);
  return with_values(f.grid, std::move(v));
}

GridFunction apply_p(const GridFunction& f) {
  return spectral_multiply(f, [](double k) { return Complex(k, 0.0); });
}

// ---------------------------------------------------------------------------

MetaplecticDecomposition decompose(const Eigen::Matrix2d& s) {
  const double a = s(0, 0), b = s(0, 1), c = s(1, 0), d = s(1, 1);
  if (std::fabs(a * d - b * c - 1.0) > 1e-12) throw DomainError("metaplectic: det S must be 1");
  MetaplecticDecomposition out;
  out.lambda = std::hypot(a, b);
  out.s = std::atan2(-b, a);
  out.kappa = (a * c + b * d) / (a * a + b * b);
  return out;
}

Eigen::Matrix2d to_matrix(const IntMatrix2& s) {
  Eigen::Matrix2d m;
  m << s.a, s.b, s.c, s.d;
  return m;
}

GridFunction chirp(double kappa, const GridFunction& f) {
  Eigen::VectorXcd v(f.grid.n);
  for (int j = 0; j < f.grid.n; ++j) {
    const double x = f.grid.x(j);
    v(j) = std::polar(1.0, -0.5 * kappa * x * x) * f.v(j);
  }
  return with_values(f.grid, std::move(v));
}

GridFunction dilation(double lambda, const GridFunction& f) {
  if (!(lambda > 0.0)) throw DomainError("dilation: lambda must be positive");
  if (lambda == 1.0) return f;
  const Grid& g = f.grid;
  const double dk = kTwoPi / (g.n * g.h);
  const double k0 = -M_PI / g.h;
  Eigen::VectorXcd fhat = fft::chirp_z(f.v, -g.L, g.h, k0, dk, g.n, -1) * g.h;
  Eigen::VectorXcd v = fft::chirp_z(fhat, k0, dk, -g.L / lambda, g.h / lambda, g.n, +1);
  return with_values(g, v * (1.0 / (g.n * g.h * std::sqrt(lambda))));
}

GridFunction rotation(double s, const GridFunction& f) {
  s = std::remainder(s, kTwoPi);
  if (std::fabs(s) < 1e-6) return f;
  if (std::fabs(std::fabs(s) - M_PI) < 1e-6) return parity(f);
  if (s < 0.0) return parity(rotation(s + M_PI, f));
  const Grid& g = f.grid;
  const double sn = std::sin(s), cot = std::cos(s) / sn;
  Eigen::VectorXcd in(g.n);
  for (int j = 0; j < g.n; ++j) {
    const double y = g.x(j);
    in(j) = f.v(j) * std::polar(1.0, 0.5 * cot * y * y);
  }
  Eigen::VectorXcd v = fft::chirp_z(in, -g.L, g.h, -g.L / sn, g.h / sn, g.n, -1);
  const double pre = g.h / std::sqrt(kTwoPi * sn);
  for (int j = 0; j < g.n; ++j) {
    const double x = g.x(j);
    v(j) *= pre * std::polar(1.0, 0.5 * cot * x * x);
  }
  return with_values(g, std::move(v));
}

GridFunction fourier_transform(const GridFunction& f) { return rotation(0.5 * M_PI, f); }

GridFunction metaplectic(const Eigen::Matrix2d& s, const GridFunction& f) {
  const auto d = decompose(s);
  return chirp(d.kappa, dilation(d.lambda, rotation(d.s, f)));
}

// ---------------------------------------------------------------------------

SymmetryOscillator build_oscillator(const IntMatrix2& s) {
  if (s.det() != 1) throw DomainError("oscillator: det S must be 1");
  SymmetryOscillator osc;
  osc.s = s;
  IntMatrix2 power = s;
  for (int n = 1; n <= 6; ++n) {
    if (power == IntMatrix2{}) {
      osc.r = n;
      break;
    }
    power = power * s;
  }
  if (osc.r != 3 && osc.r != 4 && osc.r != 6)
    throw DomainError("oscillator: S must have order 3, 4 or 6");
  osc.n_conjugates = osc.r;
  if (osc.r % 2 == 0) {
    IntMatrix2 half{};
    for (int n = 0; n < osc.r / 2; ++n) half = half * s;
    if (half == IntMatrix2{-1, 0, 0, -1}) osc.n_conjugates = osc.r / 2;
  }
  osc.m.setZero();
  Eigen::Vector2d v(0.0, 1.0);
  const Eigen::Matrix2d sm = to_matrix(s);
  for (int n = 0; n < osc.n_conjugates; ++n) {
    osc.m += v * v.transpose();
    v = sm * v;
  }
  osc.m *= 2.0 / osc.n_conjugates;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(osc.m);
  osc.mu_minus = es.eigenvalues()(0);
  osc.mu_plus = es.eigenvalues()(1);
  if (!(osc.mu_minus > 0.0)) throw NumericalError("oscillator: M_S not positive definite");
  Eigen::Vector2d u = es.eigenvectors().col(1);
  if (u(0) < 0.0 || (u(0) == 0.0 && u(1) < 0.0)) u = -u;
  osc.gamma = std::atan2(u(1), u(0));
  osc.lambda = std::pow(osc.mu_plus / osc.mu_minus, 0.25);
  osc.mu = std::sqrt(osc.mu_plus * osc.mu_minus);
  osc.sigma = Complex(osc.mu, osc.m(0, 1)) / osc.m(0, 0);
  return osc;
}

std::string SymmetryOscillator::to_json() const {
  nlohmann::json j{{"r", r},
                   {"M_S", {{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}}},
                   {"mu_plus", mu_plus},
                   {"mu_minus", mu_minus},
                   {"gamma", gamma},
                   {"lambda", lambda},
                   {"mu", mu},
                   {"sigma_re", sigma.real()},
                   {"sigma_im", sigma.imag()}};
  return j.dump();
}

GridFunction ground_state(const SymmetryOscillator& osc, const Grid& g) {
  const double nrm = std::pow(osc.sigma.real() / M_PI, 0.25);
  return GridFunction::sample(g, [&](double x) { return nrm * std::exp(-0.5 * osc.sigma * x * x); });
}

Complex ground_state_overlap(const SymmetryOscillator& osc, double a1, double a2) {
  const Complex s = osc.sigma;
  const Complex lin = Complex(0.0, a2) - s * a1;
  return std::polar(1.0, 0.5 * a1 * a2) * std::exp(lin * lin / (4.0 * s.real()) - 0.5 * s * a1 * a1);
}

GridFunction apply_oscillator(const SymmetryOscillator& osc, const GridFunction& f) {
  const GridFunction pf = apply_p(f), qf = apply_q(f);
  const GridFunction ppf = apply_p(pf), pqf = apply_p(qf), qpf = apply_q(pf), qqf = apply_q(qf);
  const double m11 = osc.m(0, 0), m12 = osc.m(0, 1), m22 = osc.m(1, 1);
  return with_values(f.grid, 0.5 * (m11 * ppf.v + m12 * (pqf.v + qpf.v) + m22 * qqf.v));
}

Eigen::MatrixXcd oscillator_matrix(const SymmetryOscillator& osc, const Grid& g) {
  Eigen::MatrixXcd p(g.n, g.n);
  for (int l = 0; l < g.n; ++l) {
    GridFunction e = with_values(g, Eigen::VectorXcd::Zero(g.n));
    e.v(l) = 1.0;
    p.col(l) = apply_p(e).v;
  }
  p = 0.5 * (p + p.adjoint()).eval();
  Eigen::VectorXd x(g.n);
  for (int j = 0; j < g.n; ++j) x(j) = g.x(j);
  const Eigen::MatrixXcd q = x.cast<Complex>().asDiagonal();
  Eigen::MatrixXcd pq = p * q;
  Eigen::MatrixXcd h = 0.5 * (osc.m(0, 0) * (p * p) + osc.m(0, 1) * (pq + pq.adjoint()) +
                              osc.m(1, 1) * (q * q));
  return 0.5 * (h + h.adjoint());
}

Complex mehler_kernel(const SymmetryOscillator& osc, double t, double x, double y) {
  if (!(t > 0.0)) throw DomainError("mehler_kernel: t must be positive");
  const double tau = osc.mu * t;
  const double rho = osc.m(0, 0) / osc.mu;
  const double c = osc.m(0, 1) / osc.m(0, 0);
  const double th = std::tanh(0.5 * tau);
  const double log_sinh = tau + std::log1p(-std::exp(-2.0 * tau)) - std::log(2.0);
  const double expo =
      -((x + y) * (x + y) * th + (x - y) * (x - y) / th) / (4.0 * rho) -
      0.5 * (std::log(kTwoPi * rho) + log_sinh);
  return std::exp(expo) * std::polar(1.0, -0.5 * c * (x * x - y * y));
}

std::vector<double> hermite_functions(int n, double x) {
  std::vector<double> out(std::max(n, 0));
  if (n <= 0) return out;
  out[0] = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
  if (n > 1) out[1] = std::sqrt(2.0) * x * out[0];
  for (int k = 1; k + 1 < n; ++k) {
    out[k + 1] = std::sqrt(2.0 / (k + 1)) * x * out[k] - std::sqrt(double(k) / (k + 1)) * out[k - 1];
  }
  return out;
}

// ---------------------------------------------------------------------------

GaugeSlices gauge_slices(const GridFunction& phi) {
  const Grid& g = phi.grid;
  if (!g.is_lattice()) throw DomainError("gauge_slices: grid is not commensurate with theta");
  GaugeSlices out;
  out.theta = g.theta;
  out.d_omega = g.h * g.sqrt_theta();
  const int half = g.n / 2;
  // index j = k - n K + half in [0, n) for some k in [0, K)
  const int n_max = (half + g.K - 1) / g.K;
  const int n_min = -((g.n - half - 1) / g.K);
  out.n_first = n_min - 1;
  out.n_count = n_max - n_min + 3;
  const double pre = std::pow(g.theta, -0.25);
  for (int k = 0; k < g.K; ++k) {
    out.omegas.push_back(k * out.d_omega);
    Eigen::VectorXcd s = Eigen::VectorXcd::Zero(out.n_count);
    for (int i = 0; i < out.n_count; ++i) {
      const long long site = out.n_first + i;
      const long long j = k - site * g.K + half;
      if (j >= 0 && j < g.n) s(i) = pre * phi.v(j);
    }
    out.slices.push_back(std::move(s));
  }
  return out;
}

Complex direct_integral(const GaugeSlices& phi, const FourierElement& a, const GaugeSlices& psi) {
  if (phi.slices.size() != psi.slices.size() || phi.n_first != psi.n_first ||
      phi.n_count != psi.n_count)
    throw DomainError("direct_integral: slice layouts differ");
  Complex sum = 0.0;
  for (std::size_t k = 0; k < phi.slices.size(); ++k) {
    const auto m = represent_1d(a, phi.omegas[k], phi.window());
    sum += phi.d_omega * phi.slices[k].dot(m.apply(psi.slices[k]));
  }
  return sum;
}

Complex weyl_representation_element(const GridFunction& phi, const FourierElement& a,
                                    const GridFunction& psi) {
  const double r = std::sqrt(a.theta());
  Complex sum = 0.0;
  for (const auto& t : a.terms())
    sum += t.value * weyl_matrix_element(phi, r * t.mode.m1, r * t.mode.m2, psi);
  return sum;
}

}  // namespace harperlab::weyl
