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

#ifndef HARPERLAB_FRAMES_HPP
#define HARPERLAB_FRAMES_HPP

#include <functional>
#include <string>
#include <vector>

#include "harperlab/rotation_algebra.hpp"
#include "harperlab/weyl_phase_space.hpp"

namespace harperlab::frames {

using weyl::Grid;
using weyl::GridFunction;

/// Smooth bump psi(x) = c b(sqrt(theta) x + (2 pi + eps)/2), with b = 1 on
/// [eps, 2 pi], b(u)^2 + b(u + 2 pi)^2 = 1 on [0, eps], support [0, 2 pi + eps].
/// Requires theta > 2 pi and 0 < eps < min(2 pi, theta - 2 pi); the
/// indicator variant at theta = 2 pi needs allow_critical.
GridFunction tracial_vector(const Grid& g, double epsilon, bool allow_critical = false);

/// max_{|l|_inf <= l_max} |<psi|W(sqrt(theta) l)|psi> - delta_{l,0}|.
double tracial_defect(const GridFunction& psi, int l_max);

/// D_psi = sum_m <psi|W(sqrt(theta) m)^{-1}|psi> W(m), |m|_inf <= cutoff.
/// The frame operator over the dual lattice is T_psi = (theta/2pi) pi_W(D_psi).
struct FrameOperator {
  FourierElement d;
  int cutoff = 0;
  double tail = 0.0;  // max |psi| on the outer 1% of the grid, relative to max |psi|
  bool tail_flagged = false;
};

FrameOperator frame_operator(const GridFunction& psi, int cutoff);

struct FrameBounds {
  double lower = 0.0;
  double upper = 0.0;
  int n_sites = 0;
  int n_omega = 0;
};

/// Extreme eigenvalues of pi_omega(D) on sites 1..n_sites over omega_k = 2 pi k / n_omega.
FrameBounds frame_bounds(const FourierElement& d, int n_sites, int n_omega);

/// f(A) for self-adjoint A at a rational angle, returned through the Fourier
/// coefficients tau(W(m)^{-1} f(A)), |m|_inf <= cutoff, evaluated on the
/// n_grid x n_grid midpoint grid of Bloch representations.
FourierElement functional_calculus(const FourierElement& a, const std::function<double(double)>& f,
                                   int cutoff, int n_grid = 16);

/// pi_W(A) f = sum_m a_m W(sqrt(theta) m) f.
GridFunction apply_weyl_element(const FourierElement& a, const GridFunction& f);

/// sum_{|l|_inf <= l_max} W(b_l) psi <W(b_l) psi|phi>, b_l = 2 pi l / sqrt(theta).
GridFunction dual_lattice_frame_apply(const GridFunction& psi, const GridFunction& phi, int l_max);

/// psi_hat = pi_W(D^{-1/2}) psi, a tracial vector for any frame psi.
GridFunction normalized_frame_vector(const GridFunction& psi, const FourierElement& d, int cutoff = 12);

/// T'_psi in the dual algebra at theta' = 4 pi^2 / theta, coefficients
/// (2 pi / theta) <psi|W(2 pi l / sqrt(theta))^{-1}|psi>, |l|_inf <= cutoff.
FourierElement dual_frame_element(const GridFunction& psi, int cutoff);

/// phi ~ sum_l c_l W(b_l) psi with c_l = <W(b_l) psi|T^{-1} phi>, T^{-1} = (2 pi/theta) pi_W(d_inverse).
GridFunction reconstruct(const GridFunction& psi, const FourierElement& d_inverse, const GridFunction& phi,
                         int l_max);

struct ThetaZeroReport {
  int n_max = 0;
  double f_at_zero = 0.0;             // f(0)
  double zero_residual = 0.0;         // |f(pi + i pi)|
  double periodicity_error = 0.0;     // max |f(z + 2 pi i) - f(z)|
  double quasi_periodicity_error = 0.0;  // max |e^{-z - pi} f(z + 2 pi) - f(z)|
  int winding = 0;                    // argument-principle count
  double winding_integral = 0.0;      // Re (1/2 pi i) \oint f'/f
  double contour_min_abs = 0.0;
  bool contour_refined = false;
  double c1 = 0.0;                    // min_r min_phi |f(z0 + r e^{i phi})| / r^2
  double lower_bound_exponent = 0.0;  // fitted slope of log min|f| vs log r
  bool passed = false;
};

/// f(z) = sum_{|n| <= n_max} exp(-pi n^2 - n z).
Complex theta_function(Complex z, int n_max);
ThetaZeroReport theta_zero_certificate(int n_max);

struct SandwichBin {
  double lo = 0.0;
  double hi = 0.0;
  double dos = 0.0;  // N(Delta)
  double rho = 0.0;  // rho(Delta)
  double rho_2d = 0.0;
  bool holds = true;
};

struct SandwichReport {
  double c = 0.0;  // window lower bound of pi_omega(D)
  double cc = 0.0; // window upper bound
  std::vector<SandwichBin> bins;
  int nonempty_bins = 0;
  int violations = 0;
  double dos_total = 0.0;
  double rho_total = 0.0;
  double rho_2d_total = 0.0;
  double max_2d_difference = 0.0;
  bool cross_checked = false;
  bool holds = false;
};

/// rho(Delta) = tau(chi_Delta(H) D) from the eigenvectors of pi_omega(H)
/// (same windows as the DOS), compared bin-wise with c N(Delta) and C N(Delta).
/// half_width_2d > 0 adds the cross-check rho(Delta) = <v|chi_Delta(H_2D)|v>,
/// v = pi_2D(D^{1/2})|0>.
SandwichReport dos_equivalence_check(const FourierElement& h, const FourierElement& d, int n_sites,
                                     int n_omega, int n_bins = 64, int half_width_2d = 0);

struct FrameReport {
  double theta = 0.0;
  double theta_target = 0.0;
  long long p = 0;
  long long q = 0;
  int K = 0;
  int n_cells = 0;
  std::string vector_id;
  double tracial_defect = 0.0;
  double frame_lower = 0.0;
  double frame_upper = 0.0;
  int cutoff = 0;
  int l_max = 0;
  int n_sites = 0;
  int n_omega = 0;
  bool tail_flagged = false;

  std::string to_json() const;
};

/// Builds the named vector (tracial | gauss-s4 | gauss-s3 | gauss-s6) on g.
GridFunction named_vector(const std::string& id, const Grid& g);

FrameReport frame_report(const std::string& vector_id, const Grid& g, int cutoff, int l_max,
                         int n_sites, int n_omega);

}  // namespace harperlab::frames

#endif  // HARPERLAB_FRAMES_HPP
