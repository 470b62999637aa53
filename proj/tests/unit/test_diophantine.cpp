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

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "harperlab/diophantine.hpp"
#include "harperlab/error.hpp"

using namespace harperlab;
using namespace harperlab::diophantine;

namespace {
const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;
const double kSilver = std::sqrt(2.0) - 1.0;

void check_invariants(const ContinuedFraction& cf) {
  std::int64_t pm = 1, qm = 0, p0 = 0, q0 = 1;
  for (std::size_t k = 0; k < cf.size(); ++k) {
    const auto a = cf.partial_quotients[k];
    CHECK(a >= 1);
    const auto& c = cf.convergents[k];
    CHECK(c.p == a * p0 + pm);
    CHECK(c.q == a * q0 + qm);
    CHECK(std::gcd(c.p, c.q) == 1);
    const long double err = std::fabs(static_cast<long double>(cf.alpha) -
                                      static_cast<long double>(c.p) / c.q);
    CHECK(err < 1.0L / (static_cast<long double>(c.q) * c.q));
    if (k + 1 < cf.size() && !(cf.terminated && k + 2 == cf.size())) {
      const long double qn = cf.convergents[k + 1].q;
      CHECK(err < 1.0L / (static_cast<long double>(c.q) * qn));
    }
    pm = p0; qm = q0; p0 = c.p; q0 = c.q;
  }
}
}  // namespace

TEST_CASE("golden mean expansion has unit quotients and Fibonacci denominators") {
  auto cf = continued_fraction(kGolden, 10);
  REQUIRE(cf.size() == 10);
  std::vector<std::int64_t> q{1};
  for (const auto& c : cf.convergents) q.push_back(c.q);
  const std::vector<std::int64_t> fib{1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89};
  CHECK(q == fib);
  for (auto a : cf.partial_quotients) CHECK(a == 1);
  CHECK_FALSE(cf.terminated);
  check_invariants(cf);
}

TEST_CASE("rational input terminates") {
  auto cf = continued_fraction(0.5, 10);
  REQUIRE(cf.size() == 1);
  CHECK(cf.partial_quotients[0] == 2);
  CHECK(cf.terminated);
  auto cf2 = continued_fraction(3.0 / 7.0, 10);
  CHECK(cf2.terminated);
  CHECK(cf2.convergents.back().p == 3);
  CHECK(cf2.convergents.back().q == 7);
}

TEST_CASE("silver ratio convergents") {
  auto cf = continued_fraction(kSilver, 6);
  REQUIRE(cf.size() == 6);
  const std::int64_t p[] = {1, 2, 5, 12, 29, 70};
  const std::int64_t q[] = {2, 5, 12, 29, 70, 169};
  for (int k = 0; k < 6; ++k) {
    CHECK(cf.partial_quotients[k] == 2);
    CHECK(cf.convergents[k].p == p[k]);
    CHECK(cf.convergents[k].q == q[k]);
    CHECK(std::fabs(kSilver - double(p[k]) / q[k]) * q[k] * q[k] < 1.0);
  }
}

TEST_CASE("domain errors and determinism") {
  CHECK_THROWS_AS(continued_fraction(0.0, 5), DomainError);
  CHECK_THROWS_AS(continued_fraction(1.5, 5), DomainError);
  CHECK_THROWS_AS(continued_fraction(0.3, 0), DomainError);
  auto a = continued_fraction(std::sqrt(3.0) - 1.0, 20);
  auto b = continued_fraction(std::sqrt(3.0) - 1.0, 20);
  CHECK(a.partial_quotients == b.partial_quotients);
}

TEST_CASE("invariants across several irrationals") {
  for (double al : {kGolden, kSilver, std::sqrt(3.0) - 1.0, std::exp(1.0) - 2.0,
                    M_PI - 3.0, std::sqrt(7.0) - 2.0}) {
    auto cf = continued_fraction(al, 40);
    CHECK(cf.size() >= 10);
    check_invariants(cf);
  }
}

TEST_CASE("Liouville-like input stops before overflow") {
  // 1/(1 + 1/10^6 ...) style sample: a_2 huge
  const double al = 1.0 / (1.0 + 1.0 / (1e6 + kGolden));
  auto cf = continued_fraction(al, 60);
  REQUIRE(cf.size() >= 2);
  CHECK(cf.partial_quotients[0] == 1);
  CHECK(cf.partial_quotients[1] == 1000000);
  check_invariants(cf);
  auto r = roth_diagnostic(cf, 0.5);
  // jump at n = 1: a_2 / q_1^eps with q_1 = 1
  CHECK(r[0] == doctest::Approx(1e6));
}

TEST_CASE("roth diagnostic") {
  auto cf = continued_fraction(kGolden, 30);
  auto s = roth_diagnostic(cf, 0.5);
  REQUIRE(s.size() == cf.size() - 1);
  double fib_sum = 0.0;
  for (const auto& c : cf.convergents) fib_sum += 1.0 / std::sqrt(double(c.q));
  for (std::size_t n = 1; n < s.size(); ++n) CHECK(s[n] >= s[n - 1]);
  CHECK(s.back() <= fib_sum + 1e-12);
  CHECK(s.back() < 4.4);
  auto s2 = roth_diagnostic(continued_fraction(kSilver, 20), 2.0);
  double bound = 0.0;
  auto cs = continued_fraction(kSilver, 20);
  for (std::size_t n = 0; n + 1 < cs.size(); ++n)
    bound += double(cs.partial_quotients[n + 1]) / (double(cs.convergents[n].q) * cs.convergents[n].q);
  CHECK(s2.back() == doctest::Approx(bound));
  CHECK_THROWS_AS(roth_diagnostic(cf, 0.0), DomainError);
  CHECK_THROWS_AS(roth_diagnostic(continued_fraction(0.5, 3), 1.0), DomainError);
}

TEST_CASE("Denjoy-Koksma examples") {
  PeriodicBV one{[](double) { return 1.0; }, 0.0, 1.0};
  auto r1 = denjoy_koksma(one, 0.3, kGolden, 13);
  CHECK(r1.discrepancy == 0.0);

  PeriodicBV ind{[](double x) { return x < 0.5 ? 1.0 : 0.0; }, 2.0, 0.5};
  auto r2 = denjoy_koksma(ind, 0.0, kGolden, 13);
  int count = 0;
  for (int j = 1; j <= 13; ++j) {
    double y = j * kGolden;
    y -= std::floor(y);
    count += y < 0.5;
  }
  CHECK(r2.ergodic_sum == count);
  CHECK(r2.discrepancy <= 2.0);

  PeriodicBV saw{[](double x) { return x - std::floor(x); }, 1.0, 0.5};
  auto r3 = denjoy_koksma(saw, 0.0, kSilver, 29);
  CHECK(r3.discrepancy <= 1.0);

  PeriodicBV saw_q{[](double x) { return x - std::floor(x); }, 1.0, std::nullopt};
  auto r4 = denjoy_koksma(saw_q, 0.1, kSilver, 70);
  CHECK(r4.mean == doctest::Approx(0.5).epsilon(1e-6));

  CHECK_THROWS_AS(denjoy_koksma(saw, 0.0, kSilver, 30), DomainError);
}

TEST_CASE("Denjoy-Koksma holds on a corpus of shifts and convergents") {
  PeriodicBV ind{[](double x) { return x < 0.3 ? 1.0 : 0.0; }, 2.0, 0.3};
  PeriodicBV saw{[](double x) { return x - std::floor(x); }, 1.0, 0.5};
  PeriodicBV tri{[](double x) { return std::fabs(x - 0.5); }, 1.0, 0.25};
  for (double al : {kGolden, kSilver, std::sqrt(3.0) - 1.0}) {
    auto cf = continued_fraction(al, 12);
    for (const auto& c : cf.convergents) {
      for (double x : {0.0, 0.137, 0.5, 0.91}) {
        CHECK_NOTHROW(denjoy_koksma(ind, x, al, c.q));
        CHECK_NOTHROW(denjoy_koksma(saw, x, al, c.q));
        CHECK_NOTHROW(denjoy_koksma(tri, x, al, c.q));
      }
    }
  }
}

TEST_CASE("named alphas") {
  CHECK(named_alpha("golden") == doctest::Approx(kGolden));
  CHECK(named_alpha("sqrt2") == doctest::Approx(kSilver));
  CHECK_THROWS(named_alpha("nope"));
}

TEST_CASE("alpha from partial quotients") {
  const std::vector<std::int64_t> ones(60, 1);
  CHECK(from_partial_quotients(ones) == doctest::Approx(named_alpha("golden")).epsilon(1e-15));
  CHECK(from_partial_quotients({2, 3}) == doctest::Approx(3.0 / 7.0).epsilon(1e-15));
  std::vector<std::int64_t> spiked(40, 1);
  spiked[6] = 10000;
  const auto cf = continued_fraction(from_partial_quotients(spiked), 10);
  CHECK(cf.partial_quotients[6] == 10000);
  CHECK_THROWS_AS(from_partial_quotients({}), DomainError);
  CHECK_THROWS_AS(from_partial_quotients({1, 0}), DomainError);
}
