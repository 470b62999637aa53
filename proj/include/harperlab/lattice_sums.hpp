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

#ifndef HARPERLAB_LATTICE_SUMS_HPP
#define HARPERLAB_LATTICE_SUMS_HPP

#include <string>
#include <vector>

#include "harperlab/rotation_algebra.hpp"
#include "harperlab/spectral.hpp"

namespace harperlab::lattice_sums {

/// F_delta(x, y) = delta (x + y)^2 + (x - y)^2 / delta.
double quadratic_form(double delta, double x, double y);

struct LatticeSum {
  double value = 0.0;
  double crown = 0.0;       // terms with a F_delta <= crown are summed
  double tail_bound = 0.0;  // rigorous bound on the omitted terms
  long long terms = 0;
};

/// S = sum_{k,m} exp(-a F_delta(x0 + k, y0 + m alpha)), delta in (0, 1]. crown = 0 picks the
/// smallest crown >= 40 whose tail bound is <= 1e-10 S.
LatticeSum gaussian_lattice_sum(double alpha, double a, double delta, double x0, double y0, double crown = 0.0);

struct CellSup {
  double sup = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;
  double lipschitz_gap = 0.0;  // max |grad| on the grid times half the grid diagonal
  double max_tail_ratio = 0.0;
};

/// Sup of S over the n x n grid of the cell [0,1) x [0, alpha).
CellSup gaussian_cell_sup(double alpha, double a, double delta, int n);

struct LatticeSumScan {
  std::string kind;  // delta | mehler
  double alpha = 0.0;
  double theta = 0.0;
  double a = 0.0;
  std::string symmetry;
  int cell_n = 0;
  std::vector<double> parameter;  // delta or t
  std::vector<CellSup> sups;
  spectral::ScalingFit fit;       // log sup vs log(1 / parameter), largest half-decade excluded
  double exponent = 0.0;
  bool diagnostic = false;

  std::string to_csv() const;
};

/// Needs a geometric grid over >= 3 decades in (0, 1) and n >= 8.
LatticeSumScan lattice_sum_scan(double alpha, double a, const std::vector<double>& deltas, int n,
                                bool diagnostic = false);

/// sup over the n x n grid of [0, 2 pi / sqrt(theta)) x [0, sqrt(theta)) of
/// sum_m |M_S(t; x + 2 pi m1 / sqrt(theta), y + sqrt(theta) m2)|, evaluated with the kernel itself.
CellSup mehler_lattice_sum(const IntMatrix2& s, double theta, double t, int n);

/// The same sum from gaussian_lattice_sum: prefactor (2 pi rho sinh(mu t))^{-1/2},
/// alpha = theta / 2 pi, a = pi^2 / (theta rho), delta = tanh(mu t / 2), cell point (x, y) / (2 pi / sqrt(theta)).
double mehler_lattice_sum_reduced(const IntMatrix2& s, double theta, double t, double x, double y);
double mehler_lattice_sum_at(const IntMatrix2& s, double theta, double t, double x, double y);

/// Needs a geometric grid over >= 3 decades in (0, 1] and n >= 8.
LatticeSumScan mehler_scan(const IntMatrix2& s, const std::string& symmetry_name, double theta,
                           const std::vector<double>& ts, int n);

}  // namespace harperlab::lattice_sums

#endif  // HARPERLAB_LATTICE_SUMS_HPP
