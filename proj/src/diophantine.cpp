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

#include "harperlab/diophantine.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "harperlab/error.hpp"

namespace harperlab::diophantine {

namespace {

// |q alpha - p| in extended precision. alpha is a double, hence exact in
// long double; the product error is about q * 2^-64.
long double remainder_of(double alpha, std::int64_t p, std::int64_t q) {
  return std::fabs(static_cast<long double>(q) * static_cast<long double>(alpha) -
                   static_cast<long double>(p));
}

bool checked_recurrence(std::int64_t a, std::int64_t s1, std::int64_t s0, std::int64_t* out) {
  std::int64_t prod = 0;
  if (__builtin_mul_overflow(a, s1, &prod)) return false;
  return !__builtin_add_overflow(prod, s0, out);
}

}  // namespace

ContinuedFraction continued_fraction(double alpha, int n_terms) {
  if (!std::isfinite(alpha) || alpha <= 0.0 || alpha >= 1.0) {
    std::ostringstream msg;
    msg << "continued_fraction: alpha must lie in (0,1), got " << alpha;
    throw DomainError(msg.str());
  }
  if (n_terms <= 0) throw DomainError("continued_fraction: n_terms must be positive");

  ContinuedFraction cf;
  cf.alpha = alpha;

  // Seeds p_{-1}=1, q_{-1}=0, p_0=0, q_0=1; remainders r_k = |q_k alpha - p_k|
  // obey r_{k-1} = a_{k+1} r_k + r_{k+1}.
  std::int64_t p_prev = 1, q_prev = 0, p_cur = 0, q_cur = 1;
  long double r_prev = 1.0L;
  long double r_cur = alpha;

  for (int k = 0; k < n_terms; ++k) {
    if (r_cur < kPrecisionFloor) {
      cf.terminated = true;
      break;
    }
    const long double ratio = r_prev / r_cur;
    if (ratio >= 9.2e18L) {
      cf.overflow = true;
      break;
    }
    const auto a = static_cast<std::int64_t>(std::floor(ratio));
    std::int64_t p_next = 0, q_next = 0;
    if (!checked_recurrence(a, p_cur, p_prev, &p_next) ||
        !checked_recurrence(a, q_cur, q_prev, &q_next)) {
      cf.overflow = true;
      break;
    }
    cf.partial_quotients.push_back(a);
    cf.convergents.push_back({p_next, q_next});
    p_prev = p_cur;
    q_prev = q_cur;
    p_cur = p_next;
    q_cur = q_next;
    r_prev = r_cur;
    r_cur = remainder_of(alpha, p_cur, q_cur);
  }
  if (!cf.overflow && r_cur < kPrecisionFloor) cf.terminated = true;
  return cf;
}

std::vector<double> roth_diagnostic(const ContinuedFraction& cf, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("roth_diagnostic: epsilon must be positive");
  if (cf.convergents.size() < 2) {
    throw DomainError("roth_diagnostic: need at least two convergents");
  }
  std::vector<double> sums;
  sums.reserve(cf.size() - 1);
  double acc = 0.0;
  for (std::size_t n = 0; n + 1 < cf.size(); ++n) {
    const double qn = static_cast<double>(cf.convergents[n].q);
    acc += static_cast<double>(cf.partial_quotients[n + 1]) / std::pow(qn, epsilon);
    sums.push_back(acc);
  }
  return sums;
}

bool is_approximant_denominator(double alpha, std::int64_t q) {
  if (q <= 0) return false;
  const long double qa = static_cast<long double>(q) * static_cast<long double>(alpha);
  const auto p = static_cast<std::int64_t>(std::llround(qa));
  if (std::gcd(p, q) != 1) return false;
  const long double err = std::fabs(qa - static_cast<long double>(p));
  // |alpha - p/q| < 1/q^2  <=>  |q alpha - p| < 1/q
  return err < 1.0L / static_cast<long double>(q);
}

DenjoyKoksmaResult denjoy_koksma(const PeriodicBV& phi, double x, double alpha,
                                 std::int64_t q) {
  if (!phi.f) throw DomainError("denjoy_koksma: phi is empty");
  if (!(phi.variation >= 0.0)) throw DomainError("denjoy_koksma: variation must be >= 0");
  if (!is_approximant_denominator(alpha, q)) {
    const long double qa = static_cast<long double>(q) * alpha;
    std::ostringstream msg;
    msg << "denjoy_koksma: q = " << q << " is not a rational-approximant denominator of alpha = "
        << alpha << " (|q alpha - round(q alpha)| = "
        << static_cast<double>(std::fabs(qa - std::roundl(qa))) << ", needs < 1/q and coprime p)";
    throw DomainError(msg.str());
  }

  auto eval = [&](long double t) {
    const long double frac = t - std::floor(t);
    return phi.f(static_cast<double>(frac));
  };

  DenjoyKoksmaResult res;
  res.variation = phi.variation;

  if (phi.mean) {
    res.mean = *phi.mean;
  } else {
    // Midpoint rule; for BV functions the error is at most Var / (2 n).
    constexpr int kNodes = 1 << 16;
    double acc = 0.0;
    for (int i = 0; i < kNodes; ++i) acc += phi.f((i + 0.5) / kNodes);
    res.mean = acc / kNodes;
    res.quadrature_slack = static_cast<double>(q) * phi.variation / (2.0 * kNodes);
  }

  long double sum = 0.0L;
  for (std::int64_t j = 1; j <= q; ++j) {
    sum += eval(static_cast<long double>(x) + static_cast<long double>(j) * alpha);
  }
  res.ergodic_sum = static_cast<double>(sum);
  res.discrepancy = static_cast<double>(
      std::fabs(sum - static_cast<long double>(q) * static_cast<long double>(res.mean)));

  if (res.discrepancy > res.variation + res.quadrature_slack) {
    std::ostringstream msg;
    msg << "denjoy_koksma: inequality violated, discrepancy " << res.discrepancy
        << " > Var " << res.variation << " (q = " << q << ", x = " << x << ")";
    throw NumericalError(msg.str());
  }
  return res;
}

double named_alpha(const std::string& name) {
  if (name == "golden") return (std::sqrt(5.0) - 1.0) / 2.0;
  if (name == "sqrt2") return std::sqrt(2.0) - 1.0;
  if (name == "silver") return std::sqrt(2.0) - 1.0;
  if (name == "sqrt3") return std::sqrt(3.0) - 1.0;
  if (name == "e") return std::exp(1.0) - 2.0;
  throw DomainError("unknown named alpha '" + name + "' (golden|sqrt2|sqrt3|e)");
}

double from_partial_quotients(const std::vector<std::int64_t>& a) {
  if (a.empty()) throw DomainError("from_partial_quotients: empty expansion");
  long double x = 0.0L;
  for (auto it = a.rbegin(); it != a.rend(); ++it) {
    if (*it < 1) throw DomainError("from_partial_quotients: partial quotients must be >= 1");
    x = 1.0L / (static_cast<long double>(*it) + x);
  }
  return static_cast<double>(x);
}

}  // namespace harperlab::diophantine
