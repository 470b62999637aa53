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

#include "harperlab/lattice_sums.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "harperlab/error.hpp"
#include "harperlab/weyl_phase_space.hpp"

namespace harperlab::lattice_sums {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// int_{R}^{inf} a N(r) e^{-a r} dr with N(r) = (c0 + c1 sqrt r)(d0 + d1 sqrt r), R = crown / a.
double tail_integral(double a, double crown, double c0, double c1, double d0, double d1) {
  const double e = std::exp(-crown);
  const double g32 = std::sqrt(crown) * e + 0.5 * std::sqrt(kPi) * std::erfc(std::sqrt(crown));  // Gamma(3/2, C)
  const double g2 = (1.0 + crown) * e;                                                           // Gamma(2, C)
  return c0 * d0 * e + (c0 * d1 + c1 * d0) * g32 / std::sqrt(a) + c1 * d1 * g2 / a;
}

// Visits every (x, y) = (x0 + k, y0 + m alpha) with F_delta <= r.
template <class F>
long long for_crown(double alpha, double delta, double x0, double y0, double r, F&& f) {
  const double w_minus = std::sqrt(r * delta);  // |x - y| bound
  const double w_plus = std::sqrt(r / delta);   // |x + y| bound
  const double y_max = 0.5 * (w_plus + w_minus);
  const long long m_lo = static_cast<long long>(std::floor((-y_max - y0) / alpha));
  const long long m_hi = static_cast<long long>(std::ceil((y_max - y0) / alpha));
  long long count = 0;
  for (long long m = m_lo; m <= m_hi; ++m) {
    const double y = y0 + m * alpha;
    const double lo = std::max(y - w_minus, -y - w_plus), hi = std::min(y + w_minus, -y + w_plus);
    if (lo > hi) continue;
    for (long long k = static_cast<long long>(std::ceil(lo - x0)); k <= static_cast<long long>(std::floor(hi - x0)); ++k) {
      const double x = x0 + k;
      const double fv = quadratic_form(delta, x, y);
      if (fv <= r) {
        f(x, y, fv);
        ++count;
      }
    }
  }
  return count;
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("lattice sum: delta must lie in (0, 1]");
}

void check_grid(const std::vector<double>& g, double upper, const char* what) {
  if (g.size() < 3) throw DomainError(std::string(what) + ": need >= 3 grid values");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] > 0.0 && g[i] <= upper)) throw DomainError(std::string(what) + ": grid value out of range");
    if (i && !(g[i] > g[i - 1])) throw DomainError(std::string(what) + ": grid must increase");
  }
  const double ratio = g[1] / g[0];
  for (std::size_t i = 2; i < g.size(); ++i)
    if (std::fabs(g[i] / g[i - 1] / ratio - 1.0) > 1e-6) throw DomainError(std::string(what) + ": grid must be geometric");
  if (std::log10(g.back() / g.front()) < 3.0 - 1e-9) throw DomainError(std::string(what) + ": grid must span >= 3 decades");
}

spectral::ScalingFit fit_excluding_top(const std::vector<double>& param, const std::vector<CellSup>& sups) {
  const double cut = param.back() / std::sqrt(10.0);
  std::vector<double> inv, val;
  for (std::size_t i = 0; i < param.size(); ++i) {
    if (param[i] <= cut * (1.0 + 1e-12)) {
      inv.push_back(1.0 / param[i]);
      val.push_back(sups[i].sup);
    }
  }
  return spectral::fit_scaling(inv, val);
}

}  // namespace

double quadratic_form(double delta, double x, double y) {
  return delta * (x + y) * (x + y) + (x - y) * (x - y) / delta;
}

LatticeSum gaussian_lattice_sum(double alpha, double a, double delta, double x0, double y0, double crown) {
  check_delta(delta);
  if (!(alpha > 0.0) || !(a > 0.0)) throw DomainError("gaussian_lattice_sum: need alpha > 0 and a > 0");
  const bool automatic = crown <= 0.0;
  double c = automatic ? 40.0 : crown;
  for (;;) {
    LatticeSum s;
    s.crown = c;
    const double r = c / a;
    s.terms = for_crown(alpha, delta, x0, y0, r, [&](double, double, double f) { s.value += std::exp(-a * f); });
    // Row count (sqrt(r/delta) + sqrt(r delta)) / alpha + 1 times k count 2 sqrt(r delta) + 1.
    const double c0 = 1.0, c1 = (1.0 / std::sqrt(delta) + std::sqrt(delta)) / alpha;
    const double d0 = 1.0, d1 = 2.0 * std::sqrt(delta);
    s.tail_bound = tail_integral(a, c, c0, c1, d0, d1);
    if (!automatic || s.tail_bound <= 1e-10 * s.value || c > 400.0) return s;
    c += 10.0;
  }
}

CellSup gaussian_cell_sup(double alpha, double a, double delta, int n) {
  if (n < 8) throw RefusedError("cell grid must be at least 8 x 8");
  check_delta(delta);
  CellSup out;
  out.sup = -1.0;
  double grad_max = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x0 = static_cast<double>(i) / n, y0 = alpha * j / n;
      const auto s = gaussian_lattice_sum(alpha, a, delta, x0, y0);
      double gx = 0.0, gy = 0.0;
      for_crown(alpha, delta, x0, y0, s.crown / a, [&](double x, double y, double f) {
        const double w = a * std::exp(-a * f);
        gx += w * (2.0 * delta * (x + y) + 2.0 * (x - y) / delta);
        gy += w * (2.0 * delta * (x + y) - 2.0 * (x - y) / delta);
      });
      grad_max = std::max(grad_max, std::hypot(gx, gy));
      out.max_tail_ratio = std::max(out.max_tail_ratio, s.tail_bound / s.value);
      if (s.value > out.sup) {
        out.sup = s.value;
        out.x0 = x0;
        out.y0 = y0;
      }
    }
  }
  out.lipschitz_gap = grad_max * 0.5 * std::hypot(1.0 / n, alpha / n);
  return out;
}

LatticeSumScan lattice_sum_scan(double alpha, double a, const std::vector<double>& deltas, int n, bool diagnostic) {
  if (n < 8) throw RefusedError("cell grid must be at least 8 x 8");
  check_grid(deltas, 1.0, "lattice_sum_scan");
  if (deltas.back() >= 1.0) throw DomainError("lattice_sum_scan: delta must lie in (0, 1)");
  LatticeSumScan scan;
  scan.kind = "delta";
  scan.alpha = alpha;
  scan.a = a;
  scan.cell_n = n;
  scan.parameter = deltas;
  scan.diagnostic = diagnostic;
  for (double d : deltas) scan.sups.push_back(gaussian_cell_sup(alpha, a, d, n));
  scan.fit = fit_excluding_top(deltas, scan.sups);
  scan.exponent = scan.fit.slope;
  return scan;
}

// ---------------------------------------------------------------------------

namespace {

struct MehlerForm {
  double prefactor = 0.0;
  double alpha = 0.0;
  double a = 0.0;
  double delta = 0.0;
  double scale = 0.0;  // 2 pi / sqrt(theta)
};

MehlerForm mehler_form(const weyl::SymmetryOscillator& osc, double theta, double t) {
  if (!(t > 0.0)) throw DomainError("mehler lattice sum: t must be positive");
  if (!(theta > 0.0)) throw DomainError("mehler lattice sum: theta must be positive");
  const double tau = osc.mu * t;
  const double rho = osc.m(0, 0) / osc.mu;
  MehlerForm f;
  const double log_sinh = tau + std::log1p(-std::exp(-2.0 * tau)) - std::log(2.0);
  f.prefactor = std::exp(-0.5 * (std::log(2.0 * kPi * rho) + log_sinh));
  f.alpha = theta / (2.0 * kPi);
  f.a = kPi * kPi / (theta * rho);
  f.delta = std::tanh(0.5 * tau);
  f.scale = 2.0 * kPi / std::sqrt(theta);
  return f;
}

}  // namespace

double mehler_lattice_sum_reduced(const IntMatrix2& s, double theta, double t, double x, double y) {
  const auto f = mehler_form(weyl::build_oscillator(s), theta, t);
  return f.prefactor * gaussian_lattice_sum(f.alpha, f.a, f.delta, x / f.scale, y / f.scale).value;
}

double mehler_lattice_sum_at(const IntMatrix2& s, double theta, double t, double x, double y) {
  const auto osc = weyl::build_oscillator(s);
  const auto f = mehler_form(osc, theta, t);
  const double st = std::sqrt(theta);
  const double dx = f.scale, dy = st;
  // Lattice points with |M| >= prefactor e^{-C}: (u+v)^2 th + (u-v)^2 / th <= 4 rho C.
  const double rho = osc.m(0, 0) / osc.mu;
  const double th = f.delta;
  double crown = 40.0, sum = 0.0;
  for (;;) {
    const double r = 4.0 * rho * crown;
    const double w_minus = std::sqrt(r * th), w_plus = std::sqrt(r / th);
    const double v_max = 0.5 * (w_plus + w_minus);
    sum = 0.0;
    const long long m2_lo = static_cast<long long>(std::floor((-v_max - y) / dy));
    const long long m2_hi = static_cast<long long>(std::ceil((v_max - y) / dy));
    for (long long m2 = m2_lo; m2 <= m2_hi; ++m2) {
      const double v = y + dy * m2;
      const double lo = std::max(v - w_minus, -v - w_plus), hi = std::min(v + w_minus, -v + w_plus);
      if (lo > hi) continue;
      for (long long m1 = static_cast<long long>(std::ceil((lo - x) / dx)); m1 <= static_cast<long long>(std::floor((hi - x) / dx)); ++m1)
        sum += std::abs(weyl::mehler_kernel(osc, t, x + dx * m1, v));
    }
    const double c1 = (w_plus + w_minus) / (dy * std::sqrt(crown)), d1 = 2.0 * w_minus / (dx * std::sqrt(crown));
    const double tail = f.prefactor * tail_integral(1.0, crown, 1.0, c1, 1.0, d1);
    if (tail <= 1e-10 * sum || crown > 400.0) return sum;
    crown += 10.0;
  }
}

CellSup mehler_lattice_sum(const IntMatrix2& s, double theta, double t, int n) {
  if (n < 8) throw RefusedError("cell grid must be at least 8 x 8");
  const auto f = mehler_form(weyl::build_oscillator(s), theta, t);
  std::vector<double> v(static_cast<std::size_t>(n) * n);
  CellSup out;
  out.sup = -1.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = f.scale * i / n, y = std::sqrt(theta) * j / n;
      v[i * n + j] = mehler_lattice_sum_at(s, theta, t, x, y);
      if (v[i * n + j] > out.sup) {
        out.sup = v[i * n + j];
        out.x0 = x;
        out.y0 = y;
      }
    }
  }
  // Periodic neighbour differences; half the largest one bounds the gap for a grid-resolved sum.
  double jump = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      jump = std::max({jump, std::fabs(v[i * n + j] - v[((i + 1) % n) * n + j]),
                       std::fabs(v[i * n + j] - v[i * n + (j + 1) % n])});
  out.lipschitz_gap = 0.5 * jump;
  return out;
}

LatticeSumScan mehler_scan(const IntMatrix2& s, const std::string& symmetry_name, double theta,
                           const std::vector<double>& ts, int n) {
  if (n < 8) throw RefusedError("cell grid must be at least 8 x 8");
  check_grid(ts, 1.0, "mehler_scan");
  LatticeSumScan scan;
  scan.kind = "mehler";
  scan.theta = theta;
  scan.alpha = theta / (2.0 * kPi);
  scan.symmetry = symmetry_name;
  scan.cell_n = n;
  scan.parameter = ts;
  for (double t : ts) scan.sups.push_back(mehler_lattice_sum(s, theta, t, n));
  scan.fit = fit_excluding_top(ts, scan.sups);
  scan.exponent = scan.fit.slope;
  return scan;
}

std::string LatticeSumScan::to_csv() const {
  std::ostringstream os;
  os << (kind == "mehler" ? "t" : "delta") << ",sup,x0,y0,lipschitz_gap,fitted_exponent\n";
  for (std::size_t i = 0; i < parameter.size(); ++i) {
    os << fmt(parameter[i]) << ',' << fmt(sups[i].sup) << ',' << fmt(sups[i].x0) << ',' << fmt(sups[i].y0) << ','
       << fmt(sups[i].lipschitz_gap) << ',' << fmt(exponent) << '\n';
  }
  return os.str();
}

}  // namespace harperlab::lattice_sums
