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

#ifndef HARPERLAB_DIOPHANTINE_HPP
#define HARPERLAB_DIOPHANTINE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace harperlab::diophantine {

struct Convergent {
  std::int64_t p = 0;
  std::int64_t q = 1;
};

/// Continued-fraction expansion alpha = [0; a_1, a_2, ...] of a number in
/// (0,1) together with its principal convergents p_k/q_k, k = 1..n.
struct ContinuedFraction {
  double alpha = 0.0;
  std::vector<std::int64_t> partial_quotients;  // a_1 .. a_n
  std::vector<Convergent> convergents;          // (p_k, q_k), k = 1 .. n
  bool terminated = false;  // remainder fell below the precision floor
  bool overflow = false;    // next denominator would not fit in 64 bits

  std::size_t size() const { return partial_quotients.size(); }
};

/// Remainders below this fraction of the unit scale end the expansion.
inline constexpr long double kPrecisionFloor = 0x1p-40L;

ContinuedFraction continued_fraction(double alpha, int n_terms);

/// Partial sums S_N = sum_{n=1}^{N} a_{n+1} / q_n^epsilon, N = 1 .. n-1.
/// The sequence is diagnostic data: finitely many terms decide nothing.
std::vector<double> roth_diagnostic(const ContinuedFraction& cf, double epsilon);

/// A 1-periodic function of bounded variation. The variation over one
/// period is declared by the caller; the period mean may be supplied exactly.
struct PeriodicBV {
  std::function<double(double)> f;
  double variation = 0.0;
  std::optional<double> mean;
};

struct DenjoyKoksmaResult {
  double ergodic_sum = 0.0;   // sum_{j=1}^{q} phi(x + j alpha)
  double mean = 0.0;          // period integral used
  double discrepancy = 0.0;   // |ergodic_sum - q * mean|
  double quadrature_slack = 0.0;  // q * (midpoint error bound), 0 if mean exact
  double variation = 0.0;
};

/// Evaluates the Denjoy-Koksma ergodic sum at a rational-approximant
/// denominator q of alpha and asserts discrepancy <= Var(phi).
/// Throws DomainError if q is not an approximant denominator, NumericalError
/// if the inequality fails.
DenjoyKoksmaResult denjoy_koksma(const PeriodicBV& phi, double x, double alpha,
                                 std::int64_t q);

/// Checks |alpha - p/q| < 1/q^2 for p = round(q alpha) with gcd(p, q) = 1.
bool is_approximant_denominator(double alpha, std::int64_t q);

/// Named irrationals accepted on the command line.
double named_alpha(const std::string& name);

/// [0; a_1, a_2, ..., a_n] evaluated backward in long double; every a_k >= 1.
double from_partial_quotients(const std::vector<std::int64_t>& a);

}  // namespace harperlab::diophantine

#endif  // HARPERLAB_DIOPHANTINE_HPP
