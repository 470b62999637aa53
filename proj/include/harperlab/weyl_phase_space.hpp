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

#ifndef HARPERLAB_WEYL_PHASE_SPACE_HPP
#define HARPERLAB_WEYL_PHASE_SPACE_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "harperlab/diophantine.hpp"
#include "harperlab/rotation_algebra.hpp"

namespace harperlab::weyl {

/// Uniform periodic grid x_j = -L + j h, j = 0 .. n-1, torus length 2L = n h.
///
/// Lattice grids carry an angle theta = 2 pi p / q (a convergent of the
/// target angle) and use h = sqrt(theta) / K, n = n_cells * q * K. Shifts by
/// sqrt(theta) m are then K m points, and shifts by 2 pi l / sqrt(theta) are
/// K q l / p points, exact when p divides K.
struct Grid {
  double theta_target = 0.0;
  double theta = 0.0;
  std::int64_t p = 0;
  std::int64_t q = 0;
  int K = 0;
  int n_cells = 0;
  int n = 0;
  double h = 0.0;
  double L = 0.0;

  static Grid plain(double half_width, int n_points);
  static Grid lattice(std::int64_t p, std::int64_t q, int K, int n_cells, double theta_target);
  /// Deepest convergent of theta/2pi with denominator <= max_q. A zero
  /// n_cells picks the smallest count with L >= 24 sqrt(theta).
  static Grid for_theta(double theta_target, int K, int n_cells, std::int64_t max_q);

  bool is_lattice() const { return q > 0; }
  double x(int j) const { return -L + j * h; }
  double sqrt_theta() const { return std::sqrt(theta); }
  double theta_error() const { return std::fabs(theta - theta_target); }
  /// Points per dual shift 2 pi / sqrt(theta); integral iff p | K.
  bool dual_exact() const { return is_lattice() && K % p == 0; }
  /// Number of grid points for a shift a1; throws DomainError naming the
  /// nearest admissible value if a1 is not a multiple of h.
  int shift_points(double a1) const;
  /// Wavenumber of DFT mode m (signed frequencies).
  double wavenumber(int m) const;
};

/// Best rational approximation p/q of theta/2pi among principal convergents
/// with q <= max_q (theta/2pi may exceed 1).
diophantine::Convergent theta_convergent(double theta, std::int64_t max_q);

struct GridFunction {
  Grid grid;
  Eigen::VectorXcd v;
  bool wraparound = true;

  static GridFunction sample(const Grid& g, const std::function<Complex(double)>& f);
  double norm() const;
  /// <this|other> = h sum conj(this_j) other_j.
  Complex inner(const GridFunction& other) const;
  GridFunction normalized() const;
  std::string to_csv() const;
};

/// Weyl operator W(a) psi(x) = e^{i a1 a2/2} e^{i a2 x} psi(x + a1), wraparound shift.
GridFunction weyl_operator(double a1, double a2, const GridFunction& psi);

/// <phi|W(a)|psi>.
Complex weyl_matrix_element(const GridFunction& phi, double a1, double a2, const GridFunction& psi);

/// Spectral position and momentum on the periodic grid.
GridFunction apply_q(const GridFunction& f);
GridFunction apply_p(const GridFunction& f);

// ---------------------------------------------------------------------------
// Metaplectic transforms

/// S = torsion(kappa) * dilation(lambda) * rotation(s), with
/// torsion = [[1,0],[kappa,1]], dilation = diag(lambda, 1/lambda),
/// rotation = [[cos s, -sin s],[sin s, cos s]] acting on a = (a1, a2).
struct MetaplecticDecomposition {
  double kappa = 0.0;
  double lambda = 1.0;
  double s = 0.0;
};

MetaplecticDecomposition decompose(const Eigen::Matrix2d& s);
Eigen::Matrix2d to_matrix(const IntMatrix2& s);

/// e^{-i kappa Q^2 / 2}.
GridFunction chirp(double kappa, const GridFunction& f);
/// f(x) -> lambda^{-1/2} f(x / lambda), band-limited resampling.
GridFunction dilation(double lambda, const GridFunction& f);
/// Kernel (2 pi sin s)^{-1/2} e^{i(cos s (x^2 + y^2) - 2xy)/(2 sin s)}; parity at s = pi,
/// identity for |s| < 1e-6.
GridFunction rotation(double s, const GridFunction& f);
/// Unitary Fourier transform with kernel e^{-ixy}/sqrt(2 pi), sampled on the same grid.
GridFunction fourier_transform(const GridFunction& f);

/// F_S = chirp(kappa) dilation(lambda) rotation(s), so that
/// F_S W(a) F_S^{-1} = W(S a) (up to grid truncation).
GridFunction metaplectic(const Eigen::Matrix2d& s, const GridFunction& f);

// ---------------------------------------------------------------------------
// Symmetry oscillators

/// H_S = (1/2) K^T M_S K with K = (P, Q) and M_S the average of
/// S^n e2 e2^T (S^T)^n over the distinct conjugates of Q^2. With this
/// normalization H_{S4} = (P^2 + Q^2)/2 and the spectrum is mu (n + 1/2).
struct SymmetryOscillator {
  IntMatrix2 s;
  int r = 0;             // order of S
  int n_conjugates = 0;  // distinct conjugates of Q^2
  Eigen::Matrix2d m;
  double mu_plus = 0.0;
  double mu_minus = 0.0;
  double gamma = 0.0;  // angle of the mu_plus eigenvector from the P axis
  double lambda = 1.0;  // (mu_plus / mu_minus)^{1/4}
  double mu = 0.0;      // sqrt(mu_plus mu_minus)
  Complex sigma;        // ground state exp(-sigma x^2 / 2)

  std::string to_json() const;
};

SymmetryOscillator build_oscillator(const IntMatrix2& s);

/// Normalized ground state (Re sigma / pi)^{1/4} e^{-sigma x^2/2}.
GridFunction ground_state(const SymmetryOscillator& osc, const Grid& g);

/// Closed form <phi_S|W(a)|phi_S>.
Complex ground_state_overlap(const SymmetryOscillator& osc, double a1, double a2);

/// Matrix-free application of H_S.
GridFunction apply_oscillator(const SymmetryOscillator& osc, const GridFunction& f);
/// Dense matrix of H_S on the grid (Hermitian).
Eigen::MatrixXcd oscillator_matrix(const SymmetryOscillator& osc, const Grid& g);

/// Kernel of e^{-t H_S}:
///   (2 pi rho sinh tau)^{-1/2} exp(-[(x^2 + y^2) cosh tau - 2xy] / (2 rho sinh tau))
///   * exp(-i c (x^2 - y^2)/2),  tau = mu t, rho = M11/mu, c = M12/M11.
Complex mehler_kernel(const SymmetryOscillator& osc, double t, double x, double y);

/// Normalized Hermite functions phi_0 .. phi_{n-1} at x (stable recurrence).
std::vector<double> hermite_functions(int n, double x);

// ---------------------------------------------------------------------------
// Direct integral over 1D representations

/// G_omega phi(n) = theta^{-1/4} phi((omega - n theta)/sqrt(theta)) on the
/// omega grid omega_k = k h sqrt(theta), k = 0 .. K-1; sites n = n_first ...
struct GaugeSlices {
  double theta = 0.0;
  double d_omega = 0.0;
  std::vector<double> omegas;
  int n_first = 0;
  int n_count = 0;
  std::vector<Eigen::VectorXcd> slices;

  SiteWindow window() const { return {n_first, n_count}; }
};

GaugeSlices gauge_slices(const GridFunction& phi);

/// sum_k d_omega <G phi|pi_omega(A)|G psi>.
Complex direct_integral(const GaugeSlices& phi, const FourierElement& a, const GaugeSlices& psi);

/// <phi|pi_W(A)|psi> with pi_W(W(m)) = W(sqrt(theta) m).
Complex weyl_representation_element(const GridFunction& phi, const FourierElement& a,
                                    const GridFunction& psi);

}  // namespace harperlab::weyl

#endif  // HARPERLAB_WEYL_PHASE_SPACE_HPP
