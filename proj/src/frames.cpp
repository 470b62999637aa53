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

#include "harperlab/frames.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "harperlab/error.hpp"
#include "harperlab/spectral.hpp"
#include "json.hpp"

namespace harperlab::frames {

namespace {

constexpr double kPi = std::numbers::pi;

double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

// b on [0, 2 pi + eps]: rises on [0, eps], falls on [2 pi, 2 pi + eps].
double bump(double u, double eps) {
  const double two_pi = 2.0 * kPi;
  if (u < 0.0 || u > two_pi + eps) return 0.0;
  if (eps == 0.0) return u < two_pi ? 1.0 : 0.0;
  if (u < eps) return std::sin(0.5 * kPi * smoothstep(u / eps));
  if (u <= two_pi) return 1.0;
  return std::cos(0.5 * kPi * smoothstep((u - two_pi) / eps));
}

void require_same_theta(const FourierElement& a, const Grid& g, const char* where) {
  if (std::fabs(a.theta() - g.theta) > 1e-12 * std::max(1.0, g.theta)) {
    throw DomainError(std::string(where) + ": element angle differs from the grid angle");
  }
}

}  // namespace

GridFunction tracial_vector(const Grid& g, double epsilon, bool allow_critical) {
  const double two_pi = 2.0 * kPi;
  const double theta = g.theta;
  if (theta < two_pi - 1e-12) throw RefusedError("tracial_vector: theta < 2 pi has no tracial vector");
  if (std::fabs(theta - two_pi) <= 1e-12) {
    if (!allow_critical) throw RefusedError("tracial_vector: theta = 2 pi needs allow_critical");
    epsilon = 0.0;
  } else if (!(epsilon > 0.0 && epsilon < std::min(two_pi, theta - two_pi))) {
    throw DomainError("tracial_vector: eps must lie in (0, min(2 pi, theta - 2 pi))");
  }
  const double s = std::sqrt(theta);
  const double c = std::sqrt(s / two_pi);
  double shift = 0.5 * (two_pi + epsilon);
  if (epsilon == 0.0) shift += 0.5 * s * g.h;  // keep grid points off the indicator edges
  auto f = GridFunction::sample(g, [&](double x) { return Complex(c * bump(s * x + shift, epsilon), 0.0); });
  return f.normalized();
}

double tracial_defect(const GridFunction& psi, int l_max) {
  const double s = psi.grid.sqrt_theta();
  double worst = 0.0;
  for (int l1 = -l_max; l1 <= l_max; ++l1) {
    for (int l2 = -l_max; l2 <= l_max; ++l2) {
      Complex v = weyl::weyl_matrix_element(psi, s * l1, s * l2, psi);
      if (l1 == 0 && l2 == 0) v -= 1.0;
      worst = std::max(worst, std::abs(v));
    }
  }
  return worst;
}

FrameOperator frame_operator(const GridFunction& psi, int cutoff) {
  if (cutoff < 0) throw DomainError("frame_operator: cutoff must be >= 0");
  const double s = psi.grid.sqrt_theta();
  std::vector<FourierElement::Term> terms;
  for (int m1 = -cutoff; m1 <= cutoff; ++m1) {
    for (int m2 = -cutoff; m2 <= cutoff; ++m2) {
      terms.push_back({{m1, m2}, weyl::weyl_matrix_element(psi, -s * m1, -s * m2, psi)});
    }
  }
  FrameOperator out;
  out.cutoff = cutoff;
  out.d = FourierElement(psi.grid.theta, std::move(terms)).pruned(1e-16);
  const int n = psi.grid.n;
  const int edge = std::max(1, n / 100);
  const double peak = psi.v.cwiseAbs().maxCoeff();
  double tail = 0.0;
  for (int j = 0; j < edge; ++j) tail = std::max({tail, std::abs(psi.v(j)), std::abs(psi.v(n - 1 - j))});
  out.tail = peak > 0.0 ? tail / peak : 0.0;
  out.tail_flagged = out.tail > 1e-12;
  return out;
}

FrameBounds frame_bounds(const FourierElement& d, int n_sites, int n_omega) {
  if (n_sites < 2 || n_omega < 1) throw DomainError("frame_bounds: need n_sites >= 2, n_omega >= 1");
  FrameBounds b;
  b.n_sites = n_sites;
  b.n_omega = n_omega;
  b.lower = INFINITY;
  b.upper = -INFINITY;
  for (int k = 0; k < n_omega; ++k) {
    const double omega = 2.0 * kPi * k / n_omega;
    auto es = spectral::hermitian_eigensystem(represent_1d(d, omega, {1, n_sites}), false);
    b.lower = std::min(b.lower, es.values(0));
    b.upper = std::max(b.upper, es.values(es.values.size() - 1));
  }
  return b;
}

FourierElement functional_calculus(const FourierElement& a, const std::function<double(double)>& f,
                                   int cutoff, int n_grid) {
  if (!a.is_self_adjoint(1e-12 * std::max(1.0, a.max_abs()))) {
    throw DomainError("functional_calculus: element is not self-adjoint");
  }
  const auto ra = rational_angle(a.theta());
  if (!ra) throw DomainError("functional_calculus: angle is not a rational multiple of 2 pi");
  if (cutoff < 0 || n_grid < 1) throw DomainError("functional_calculus: bad cutoff or grid");
  const int q = static_cast<int>(ra->q);
  const double theta = a.theta();
  const int side = 2 * cutoff + 1;
  std::vector<Complex> acc(static_cast<std::size_t>(side) * side, 0.0);
  const double cell = 2.0 * kPi / q;
  for (int io = 0; io < n_grid; ++io) {
    const double omega = cell * (io + 0.5) / n_grid;
    for (int ik = 0; ik < n_grid; ++ik) {
      const double k = cell * (ik + 0.5) / n_grid;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(represent_bloch(a, omega, k));
      if (es.info() != Eigen::Success) throw NumericalError("functional_calculus: eigensolver failed");
      Eigen::VectorXd fv = es.eigenvalues().unaryExpr(f);
      if (!fv.allFinite()) throw DomainError("functional_calculus: f is not finite on the spectrum");
      const Eigen::MatrixXcd F = es.eigenvectors() * fv.asDiagonal() * es.eigenvectors().adjoint();
      // Tr(pi(W(-m)) F): pi(W(-m)) maps l to (l - m1) mod q.
      for (int m1 = -cutoff; m1 <= cutoff; ++m1) {
        for (int m2 = -cutoff; m2 <= cutoff; ++m2) {
          Complex tr = 0.0;
          for (int l = 0; l < q; ++l) {
            const int n = (((l - m1) % q) + q) % q;
            const double phase = -0.5 * theta * m1 * m2 - k * m1 - (omega - l * theta) * m2;
            tr += std::polar(1.0, phase) * F(l, n);
          }
          acc[static_cast<std::size_t>(m1 + cutoff) * side + (m2 + cutoff)] += tr;
        }
      }
    }
  }
  const double norm = 1.0 / (static_cast<double>(q) * n_grid * n_grid);
  std::vector<FourierElement::Term> terms;
  for (int m1 = -cutoff; m1 <= cutoff; ++m1) {
    for (int m2 = -cutoff; m2 <= cutoff; ++m2) {
      terms.push_back({{m1, m2}, acc[static_cast<std::size_t>(m1 + cutoff) * side + (m2 + cutoff)] * norm});
    }
  }
  return FourierElement(theta, std::move(terms)).pruned(1e-16);
}

GridFunction apply_weyl_element(const FourierElement& a, const GridFunction& f) {
  require_same_theta(a, f.grid, "apply_weyl_element");
  const double s = f.grid.sqrt_theta();
  GridFunction out = f;
  out.v.setZero();
  for (const auto& t : a.terms()) {
    out.v += t.value * weyl::weyl_operator(s * t.mode.m1, s * t.mode.m2, f).v;
  }
  return out;
}

GridFunction dual_lattice_frame_apply(const GridFunction& psi, const GridFunction& phi, int l_max) {
  const double b = 2.0 * kPi / psi.grid.sqrt_theta();
  GridFunction out = phi;
  out.v.setZero();
  for (int l1 = -l_max; l1 <= l_max; ++l1) {
    for (int l2 = -l_max; l2 <= l_max; ++l2) {
      const GridFunction w = weyl::weyl_operator(b * l1, b * l2, psi);
      out.v += w.inner(phi) * w.v;
    }
  }
  return out;
}

GridFunction normalized_frame_vector(const GridFunction& psi, const FourierElement& d, int cutoff) {
  const auto inv_sqrt = functional_calculus(
      d, [](double x) { return x > 0.0 ? 1.0 / std::sqrt(x) : NAN; }, cutoff);
  return apply_weyl_element(inv_sqrt, psi);
}

FourierElement dual_frame_element(const GridFunction& psi, int cutoff) {
  const double theta = psi.grid.theta;
  const double b = 2.0 * kPi / std::sqrt(theta);
  std::vector<FourierElement::Term> terms;
  for (int l1 = -cutoff; l1 <= cutoff; ++l1) {
    for (int l2 = -cutoff; l2 <= cutoff; ++l2) {
      const Complex v = weyl::weyl_matrix_element(psi, -b * l1, -b * l2, psi);
      terms.push_back({{l1, l2}, (2.0 * kPi / theta) * v});
    }
  }
  return FourierElement(4.0 * kPi * kPi / theta, std::move(terms)).pruned(1e-16);
}

GridFunction reconstruct(const GridFunction& psi, const FourierElement& d_inverse, const GridFunction& phi,
                         int l_max) {
  GridFunction t_inv_phi = apply_weyl_element(d_inverse, phi);
  t_inv_phi.v *= 2.0 * kPi / psi.grid.theta;
  return dual_lattice_frame_apply(psi, t_inv_phi, l_max);
}

// ---------------------------------------------------------------------------

Complex theta_function(Complex z, int n_max) {
  Complex sum = 0.0;
  for (int n = -n_max; n <= n_max; ++n) sum += std::exp(-kPi * n * n - static_cast<double>(n) * z);
  return sum;
}

ThetaZeroReport theta_zero_certificate(int n_max) {
  if (n_max < 20) throw DomainError("theta_zero_certificate: n_max must be >= 20");
  ThetaZeroReport r;
  r.n_max = n_max;
  auto f = [&](Complex z) { return theta_function(z, n_max); };
  const Complex z0(kPi, kPi);
  r.f_at_zero = f(0.0).real();
  r.zero_residual = std::abs(f(z0));

  for (int i = 0; i <= 8; ++i) {
    for (int j = 0; j <= 8; ++j) {
      const Complex z(2.0 * kPi * i / 8.0, 2.0 * kPi * j / 8.0);
      r.periodicity_error = std::max(r.periodicity_error, std::abs(f(z + Complex(0, 2 * kPi)) - f(z)));
      r.quasi_periodicity_error =
          std::max(r.quasi_periodicity_error, std::abs(std::exp(-z - kPi) * f(z + 2.0 * kPi) - f(z)));
    }
  }

  // Argument principle on the period square, nudged off zeros on the boundary.
  auto winding_on = [&](double off, double& min_abs, double& integral) {
    const int per_side = 4096;
    const Complex corners[4] = {{off, off}, {off + 2 * kPi, off}, {off + 2 * kPi, off + 2 * kPi}, {off, off + 2 * kPi}};
    double total_arg = 0.0;
    Complex sum_integral = 0.0;
    min_abs = INFINITY;
    Complex prev = f(corners[0]);
    for (int side = 0; side < 4; ++side) {
      const Complex a = corners[side], b = corners[(side + 1) % 4];
      const Complex dz = (b - a) / static_cast<double>(per_side);
      for (int s = 1; s <= per_side; ++s) {
        const Complex z = a + dz * static_cast<double>(s);
        const Complex cur = f(z);
        min_abs = std::min(min_abs, std::abs(cur));
        total_arg += std::arg(cur / prev);
        sum_integral += std::log(cur / prev);
        prev = cur;
      }
    }
    integral = (sum_integral / Complex(0.0, 2.0 * kPi)).real();
    return static_cast<int>(std::lround(total_arg / (2.0 * kPi)));
  };
  double off = 0.0;
  r.winding = winding_on(off, r.contour_min_abs, r.winding_integral);
  if (r.contour_min_abs < 1e-6) {
    off = 0.1;
    r.contour_refined = true;
    r.winding = winding_on(off, r.contour_min_abs, r.winding_integral);
  }

  // Lower bound |f(z)| >= c1 r^2 near the zero.
  const int n_r = 21;
  std::vector<double> lr, lf;
  r.c1 = INFINITY;
  for (int i = 0; i < n_r; ++i) {
    const double rad = std::pow(10.0, -3.0 + 2.0 * i / (n_r - 1));
    double m = INFINITY;
    for (int a = 0; a < 64; ++a) m = std::min(m, std::abs(f(z0 + std::polar(rad, 2 * kPi * a / 64.0))));
    r.c1 = std::min(r.c1, m / (rad * rad));
    lr.push_back(std::log(rad));
    lf.push_back(std::log(m));
  }
  double mx = 0, my = 0;
  for (int i = 0; i < n_r; ++i) { mx += lr[i]; my += lf[i]; }
  mx /= n_r;
  my /= n_r;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < n_r; ++i) {
    sxy += (lr[i] - mx) * (lf[i] - my);
    sxx += (lr[i] - mx) * (lr[i] - mx);
  }
  r.lower_bound_exponent = sxy / sxx;
  r.passed = r.zero_residual < 1e-12 && r.winding == 1 && std::fabs(r.winding_integral - 1.0) < 1e-6 &&
             r.periodicity_error < 1e-9 && r.quasi_periodicity_error < 1e-9 && r.c1 > 0.0 &&
             r.lower_bound_exponent < 2.0;
  return r;
}

// ---------------------------------------------------------------------------

SandwichReport dos_equivalence_check(const FourierElement& h, const FourierElement& d, int n_sites,
                                     int n_omega, int n_bins, int half_width_2d) {
  if (std::fabs(h.theta() - d.theta()) > 1e-12 * std::max(1.0, h.theta())) {
    throw DomainError("dos_equivalence_check: H and D live at different angles");
  }
  if (n_sites < 8 || n_omega < 1 || n_bins < 1) throw DomainError("dos_equivalence_check: bad sizes");
  SandwichReport r;
  const double range = h.l1_norm() + 0.1;
  const double width = 2.0 * range / n_bins;
  r.bins.resize(n_bins);
  for (int b = 0; b < n_bins; ++b) {
    r.bins[b].lo = -range + b * width;
    r.bins[b].hi = r.bins[b].lo + width;
  }
  auto bin_of = [&](double e) { return std::clamp(static_cast<int>(std::floor((e + range) / width)), 0, n_bins - 1); };

  r.c = INFINITY;
  r.cc = -INFINITY;
  const double weight = 1.0 / (static_cast<double>(n_sites) * n_omega);
  const SiteWindow window{1, n_sites};
  for (int k = 0; k < n_omega; ++k) {
    const double omega = 2.0 * kPi * k / n_omega;
    const auto hs = spectral::hermitian_eigensystem(represent_1d(h, omega, window), true);
    const BandedMatrix dm = represent_1d(d, omega, window);
    const auto ds = spectral::hermitian_eigensystem(dm, false);
    r.c = std::min(r.c, ds.values(0));
    r.cc = std::max(r.cc, ds.values(ds.values.size() - 1));
    for (int i = 0; i < hs.values.size(); ++i) {
      const Eigen::VectorXcd v = hs.vectors.col(i);
      const double rho = v.dot(dm.apply(v)).real();
      auto& bin = r.bins[bin_of(hs.values(i))];
      bin.dos += weight;
      bin.rho += weight * rho;
    }
  }

  if (half_width_2d > 0) {
    r.cross_checked = true;
    const auto d_half = functional_calculus(
        d, [](double x) { return x >= 0.0 ? std::sqrt(x) : NAN; }, 12);
    const auto h2 = represent_2d(h, half_width_2d);
    const auto s2 = represent_2d(d_half, half_width_2d);
    const int origin = h2.lattice.index(0, 0);
    const Eigen::VectorXcd v = Eigen::MatrixXcd(s2.matrix).col(origin);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es{Eigen::MatrixXcd(h2.matrix)};
    if (es.info() != Eigen::Success) throw NumericalError("dos_equivalence_check: 2D eigensolver failed");
    const Eigen::VectorXcd proj = es.eigenvectors().adjoint() * v;
    for (int i = 0; i < proj.size(); ++i) r.bins[bin_of(es.eigenvalues()(i))].rho_2d += std::norm(proj(i));
  }

  r.violations = 0;
  for (auto& bin : r.bins) {
    const double tol = 1e-12 * std::max(1.0, bin.dos);
    bin.holds = bin.rho >= r.c * bin.dos - tol && bin.rho <= r.cc * bin.dos + tol;
    if (bin.dos > 0.0) ++r.nonempty_bins;
    if (!bin.holds) ++r.violations;
    r.dos_total += bin.dos;
    r.rho_total += bin.rho;
    r.rho_2d_total += bin.rho_2d;
    if (r.cross_checked) r.max_2d_difference = std::max(r.max_2d_difference, std::fabs(bin.rho - bin.rho_2d));
  }
  r.holds = r.violations == 0 && r.c > 0.0;
  return r;
}

// ---------------------------------------------------------------------------

GridFunction named_vector(const std::string& id, const Grid& g) {
  if (id == "tracial") {
    const double eps = 0.9 * std::min(2.0 * kPi, g.theta - 2.0 * kPi);
    return tracial_vector(g, eps, true);
  }
  if (id.rfind("gauss-", 0) == 0) {
    const auto osc = weyl::build_oscillator(symmetry::by_name(id.substr(6)));
    return weyl::ground_state(osc, g);
  }
  throw ConfigError("unknown frame vector '" + id + "'");
}

FrameReport frame_report(const std::string& vector_id, const Grid& g, int cutoff, int l_max, int n_sites,
                         int n_omega) {
  const GridFunction psi = named_vector(vector_id, g);
  const auto fo = frame_operator(psi, cutoff);
  const auto fb = frame_bounds(fo.d, n_sites, n_omega);
  FrameReport r;
  r.theta = g.theta;
  r.theta_target = g.theta_target;
  r.p = g.p;
  r.q = g.q;
  r.K = g.K;
  r.n_cells = g.n_cells;
  r.vector_id = vector_id;
  r.tracial_defect = tracial_defect(psi, l_max);
  r.frame_lower = fb.lower;
  r.frame_upper = fb.upper;
  r.cutoff = cutoff;
  r.l_max = l_max;
  r.n_sites = n_sites;
  r.n_omega = n_omega;
  r.tail_flagged = fo.tail_flagged;
  return r;
}

std::string FrameReport::to_json() const {
  nlohmann::json j;
  j["theta"] = theta;
  j["theta_target"] = theta_target;
  j["p"] = p;
  j["q"] = q;
  j["K"] = K;
  j["n_cells"] = n_cells;
  j["vector"] = vector_id;
  j["tracial_defect"] = tracial_defect;
  j["frame_lower"] = frame_lower;
  j["frame_upper"] = frame_upper;
  j["cutoff"] = cutoff;
  j["l_max"] = l_max;
  j["n_sites"] = n_sites;
  j["n_omega"] = n_omega;
  j["tail_flagged"] = tail_flagged;
  return j.dump(2);
}

}  // namespace harperlab::frames
