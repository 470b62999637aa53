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

#ifndef HARPERLAB_SPECTRAL_HPP
#define HARPERLAB_SPECTRAL_HPP

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "harperlab/rotation_algebra.hpp"

namespace harperlab::spectral {

struct Eigensystem {
  Eigen::VectorXd values;     // ascending
  Eigen::MatrixXcd vectors;   // columns, empty unless requested
};

/// Hermitian eigensolver for a banded matrix. Tridiagonal input is gauged to
/// a real symmetric tridiagonal and solved with the implicit QL routine.
Eigensystem hermitian_eigensystem(const BandedMatrix& m, bool with_vectors);

struct Atom {
  double e = 0.0;
  double w = 0.0;
};

/// Weighted point masses sorted by energy.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  explicit EmpiricalMeasure(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double total_mass() const { return total_; }
  double moment(int k) const;
  /// Mass of [lo, hi).
  double mass(double lo, double hi) const;
  EmpiricalMeasure restricted(double lo, double hi) const;
  /// Pushforward under E -> a E + b.
  EmpiricalMeasure affine(double a, double b) const;
  double min_energy() const { return atoms_.front().e; }
  double max_energy() const { return atoms_.back().e; }
  std::string to_csv() const;

  std::map<std::string, std::string> provenance;

 private:
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;  // cumulative_[i] = sum_{k<i} w_k
  double total_ = 0.0;
};

/// Log-log regression with windowed slopes for limsup / liminf estimates.
struct ScalingFit {
  std::vector<double> log_t;
  std::vector<double> log_value;
  double slope = 0.0;
  double intercept = 0.0;
  double limsup = 0.0;  // max windowed slope
  double liminf = 0.0;  // min windowed slope
  std::vector<double> window_slopes;
  double residual_rms = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  double window_width = 0.0;  // in log T
};

/// Windows of width window_fraction * (log range), stepped by step_fraction * (log range).
ScalingFit fit_scaling(const std::vector<double>& t, const std::vector<double>& values,
                       double window_fraction = 1.0 / 3.0, double step_fraction = 1.0 / 12.0);

/// Geometric grid t_min, t_min r, ..., <= t_max (t_max included when it lands within 1e-9).
std::vector<double> geometric_grid(double t_min, double t_max, double ratio);

// ---------------------------------------------------------------------------

/// Pooled eigenvalues of pi_omega(H) on sites 1..n_sites over omega_k = 2 pi k / n_omega,
/// each with weight 1/(n_sites n_omega).
EmpiricalMeasure dos_estimate(const FourierElement& h, int n_sites, int n_omega);

/// DOS of a rational angle theta = 2 pi p/q from the q x q Bloch matrices
/// on the midpoint grid omega, k in [0, 2 pi / q) (n_omega x n_k points),
/// each eigenvalue with weight 1/(q n_omega n_k). Free of open-edge states.
EmpiricalMeasure dos_estimate_bloch(const FourierElement& h, int n_omega, int n_k);

enum class Kernel { kGaussian, kIndicator };

/// sum_i w_i exp(-(E - E_i)^2 T^2).
double smoothed_mass(const EmpiricalMeasure& mu, double e, double t);

/// Smoothed masses at every atom of mu. Gaussian: direct windowed sums
/// (|dE| T <= 6) when cheap, binned FFT convolution otherwise. Indicator:
/// exact mass of [E_i - 1/T, E_i + 1/T].
std::vector<double> smoothed_masses_at_atoms(const EmpiricalMeasure& mu, double t, Kernel kernel);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct DimensionEstimate {
  double q = 0.0;
  ScalingFit fit;      // log I_q vs log T
  double d_mid = 0.0;  // global slope / (1 - q), clamped to [0, 1]
  double d_plus = 0.0;
  double d_minus = 0.0;
  double d_mid_raw = 0.0;
  double d_plus_raw = 0.0;
  double d_minus_raw = 0.0;
  double t_cap = 0.0;  // c_spacing / mean spacing in Delta
  bool capped = false;
  std::size_t atoms_in_delta = 0;
};

struct DimensionOptions {
  Kernel kernel = Kernel::kGaussian;
  double c_spacing = 1.0;
};

/// D(Delta; q) from I_q(T) = sum_{E_i in Delta} w_i m_i(T)^{q-1}, m_i the
/// smoothed mass of the full measure. T values beyond the spacing cap are dropped.
DimensionEstimate multifractal_dimension(const EmpiricalMeasure& mu, Interval delta, double q,
                                         const std::vector<double>& t_grid,
                                         const DimensionOptions& options = {});

/// Several q values sharing the smoothed masses for each T.
std::vector<DimensionEstimate> multifractal_dimensions(const EmpiricalMeasure& mu, Interval delta,
                                                       const std::vector<double>& qs,
                                                       const std::vector<double>& t_grid,
                                                       const DimensionOptions& options = {});

struct LevelSetResult {
  double t = 0.0;
  double p = 0.0;
  double kappa = 0.0;
  int n_bands = 0;
  int band = 0;           // maximizing j
  double alpha = 0.0;     // kappa - j / log T
  std::vector<double> band_masses;  // rho(Omega_j), j = 0 .. n_bands
  double integral = 0.0;  // J = sum w m^{p-1}
  double integral_outside = 0.0;  // contribution of Omega_0
  double c_fit = 0.0;
  double c_proof = 0.0;
  double margin = 0.0;
  bool kappa_doubled = false;
  bool flagged = false;
};

/// Level-set partition by m_i = T^{-s_i}: Omega_0 = {s > kappa},
/// Omega_j = {kappa - j/log T < s <= kappa - (j-1)/log T}, j = 1 .. ceil(kappa log T).
LevelSetResult level_set_partition(const EmpiricalMeasure& mu, double t, double p, double kappa = 0.0);

// Calibration measures.
EmpiricalMeasure uniform_measure(int n, double a = 0.0, double b = 1.0);
EmpiricalMeasure cantor_measure(int depth);
EmpiricalMeasure point_mass(double e, double w = 1.0);

}  // namespace harperlab::spectral

#endif  // HARPERLAB_SPECTRAL_HPP
