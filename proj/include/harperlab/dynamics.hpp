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

#ifndef HARPERLAB_DYNAMICS_HPP
#define HARPERLAB_DYNAMICS_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "harperlab/rotation_algebra.hpp"
#include "harperlab/spectral.hpp"
#include "harperlab/weyl_phase_space.hpp"

namespace harperlab::dynamics {

using spectral::Interval;
using spectral::ScalingFit;

/// out = H in.
using LinearMap = std::function<void(const Eigen::VectorXcd& in, Eigen::VectorXcd& out)>;

struct SpectralBounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// Smallest order K with 2 sum_{k>K} |J_k(x)| <= tol (bounded by the power series tail).
int chebyshev_order(double x, double tol);

/// e^{-i H dt} by a Chebyshev expansion on the supplied spectral interval.
class ChebyshevPropagator {
 public:
  ChebyshevPropagator(LinearMap h, SpectralBounds bounds, double dt, double tol = 1e-10);
  Eigen::VectorXcd step(const Eigen::VectorXcd& psi) const;
  int order() const { return static_cast<int>(coeffs_.size()) - 1; }
  double dt() const { return dt_; }

 private:
  LinearMap h_;
  double center_ = 0.0;
  double half_width_ = 1.0;
  double dt_ = 0.0;
  std::vector<Complex> coeffs_;
};

/// Gershgorin interval of a banded Hermitian matrix.
SpectralBounds gershgorin(const BandedMatrix& h);

/// max_i sum_j |h_ij| |i - j|, the speed bound of the position operator.
double hopping_speed(const BandedMatrix& h);

/// Largest t with the wavefront of psi0 (support +- speed t) still `margin` sites inside the window.
double max_admissible_time(const BandedMatrix& h, const Eigen::VectorXcd& psi0, double margin = 10.0);

/// e^{-i H t} psi0; refuses t beyond the leakage horizon.
Eigen::VectorXcd evolve(const BandedMatrix& h, const Eigen::VectorXcd& psi0, double t, double margin = 10.0);

enum class Representation { k1D, k2D, kWeyl };
enum class AverageMode { kCesaro, kGaussian };

std::string to_string(Representation r);
std::string to_string(AverageMode m);

/// Moment samples M(q, t_k) on t_k = k dt with per-point truncation bounds.
struct TransportTrace {
  std::string model;
  Representation rep = Representation::k1D;
  double q = 0.0;
  std::optional<Interval> delta;  // empty: the whole spectrum
  std::vector<double> t;
  std::vector<double> m;
  std::vector<double> error_bound;
  std::map<std::string, std::string> metadata;

  /// Largest reported t with error_bound <= 1% of M (every earlier point also passing).
  double controlled_until() const;
  std::string to_csv() const;
};

struct TransportOptions {
  double t_end = 64.0;
  double dt = 0.0;        // 0: min(0.125, 0.5 / ||H||_1)
  int half_width = 0;     // 1D/2D window -R..R; 0: speed t_end + margin
  double margin = 24.0;
  int n_omega = 16;       // 1D phase quadrature
  std::optional<Interval> delta;
  int jackson_degree = 400;  // 2D / Weyl spectral filter
  // Weyl grid
  std::string symmetry = "S4";
  int grid_k = 0;       // points per sqrt(theta); 0: automatic
  int grid_cells = 0;   // 0: automatic
  int lanczos_steps = 48;
};

/// sum_m m1^2 |a_m|^2 (1D) and sum_m |m|^2 |a_m|^2 (2D): small-t limits of M(2, t)/t^2.
double taylor_coefficient_1d(const FourierElement& h);
double taylor_coefficient_2d(const FourierElement& h);

/// One trace per q from a single evolution.
std::vector<TransportTrace> transport_1d(const FourierElement& h, const std::vector<double>& qs,
                                         const TransportOptions& options, const std::string& model = "custom");
std::vector<TransportTrace> transport_2d(const FourierElement& h, const std::vector<double>& qs,
                                         const TransportOptions& options, const std::string& model = "custom");
/// Weyl representation on a commensurate grid at the element's (rational) angle.
std::vector<TransportTrace> transport_weyl(const FourierElement& h, const std::vector<double>& qs,
                                           const TransportOptions& options, const std::string& model = "custom");

double moment_1d(const FourierElement& h, double q, double t, std::optional<Interval> delta, int half_width,
                 int n_omega);
double moment_2d(const FourierElement& h, double q, double t, std::optional<Interval> delta, int half_width);
double moment_weyl(const FourierElement& h, const std::string& symmetry, double q, double t,
                   std::optional<Interval> delta);

/// <psi|f(A)|psi> by Lanczos-Gauss quadrature; err receives the change over the last 4 steps.
double lanczos_expectation(const LinearMap& a, const Eigen::VectorXcd& psi, const std::function<double(double)>& f,
                           int steps, double* err = nullptr);

/// Several functions from one Krylov space; stops early once every estimate is stable.
std::vector<double> lanczos_expectations(const LinearMap& a, const Eigen::VectorXcd& psi,
                                         const std::vector<std::function<double(double)>>& fs, int steps,
                                         std::vector<double>* errs = nullptr);

/// (1/T) int_0^T f (cesaro) or 2 int_0^inf f e^{-t^2/4T^2} / (2 T sqrt(pi)) (gaussian).
/// Samples must start at t = 0 and be increasing; h_norm > 0 enforces dt ||H||_1 <= 0.5.
double time_average(const std::vector<double>& t, const std::vector<double>& f, double T, AverageMode mode,
                    double h_norm = 0.0);

/// Largest T usable by time_average for samples ending at t_end.
double max_average_time(double t_end, AverageMode mode);

struct BetaEstimate {
  double q = 0.0;
  AverageMode mode = AverageMode::kCesaro;
  ScalingFit fit;  // log <M>_T vs log T
  std::vector<double> averages;
  double beta = 0.0;
  double beta_plus = 0.0;
  double beta_minus = 0.0;
  double beta_raw = 0.0;
  double beta_plus_raw = 0.0;
  double beta_minus_raw = 0.0;
  double slope_error = 0.0;  // standard error of the global slope / q
};

/// Needs >= 12 T values spanning >= 1.5 decades. Empty grid: ratio 2^{1/4} from 2.
BetaEstimate beta_estimate(const TransportTrace& trace, AverageMode mode, std::vector<double> t_grid = {});

struct BoundEntry {
  double q = 0.0;
  BetaEstimate beta;
  BetaEstimate beta_gaussian;
  spectral::DimensionEstimate dimension;  // at 1 - q
  double margin = 0.0;                    // beta_minus - D_plus(1 - q)
  double margin_mid = 0.0;                // beta - D(1 - q)
  double uncertainty = 0.0;
  bool pass = false;
};

struct BoundReport {
  std::string model;
  double theta = 0.0;
  std::vector<BoundEntry> entries;
  std::map<std::string, std::string> metadata;
  std::string to_json() const;
};

struct BoundOptions {
  TransportOptions transport;
  int dos_n_omega = 8;
  int dos_n_k = 8;
  double dos_t_min = 8.0;
  double dos_t_max = 4096.0;
};

/// beta_-(q) of the 1D transport against D_+(1 - q) of the Bloch DOS (rational angle).
BoundReport verify_main_bound(const FourierElement& h, const std::vector<double>& qs, const BoundOptions& options,
                              const std::string& model = "custom");

}  // namespace harperlab::dynamics

#endif  // HARPERLAB_DYNAMICS_HPP
