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

#include "harperlab/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include <fftw3.h>

#include "harperlab/error.hpp"

namespace harperlab::fft {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// exp(sign * i * beta * j^2 / 2) with the argument reduced in long double.
Complex chirp(long double beta, long long j, int sign) {
  constexpr long double kTwoPi = 6.283185307179586476925286766559L;
  long double arg = std::fmod(beta * static_cast<long double>(j) * j / 2.0L, kTwoPi);
  return std::polar(1.0, static_cast<double>(sign * arg));
}

}  // namespace

void dft(Eigen::VectorXcd& data, int sign) {
  const int n = static_cast<int>(data.size());
  if (n == 0) return;
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  const int dir = sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD;
  // Plans are cached per (size, direction, alignment) and reused through the new-array interface.
  using Key = std::tuple<int, int, int>;
  static std::map<Key, fftw_plan> cache;
  const Key key{n, dir, fftw_alignment_of(reinterpret_cast<double*>(ptr))};
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto it = cache.find(key);
    if (it == cache.end()) {
      // FFTW_ESTIMATE leaves the arrays untouched while planning.
      plan = fftw_plan_dft_1d(n, ptr, ptr, dir, FFTW_ESTIMATE);
      if (!plan) throw NumericalError("fftw planning failed");
      it = cache.emplace(key, plan).first;
    }
    plan = it->second;
  }
  fftw_execute_dft(plan, ptr, ptr);
}

int fast_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

Eigen::VectorXcd chirp_z(const Eigen::VectorXcd& in, double x0, double dx, double k0, double dk,
                         int m_out, int sign) {
  const int n = static_cast<int>(in.size());
  if (n == 0 || m_out <= 0) return Eigen::VectorXcd::Zero(std::max(m_out, 0));
  const long double beta = static_cast<long double>(dx) * dk;
  const int len = fast_size(n + m_out - 1);

  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(len);
  for (int j = 0; j < n; ++j) {
    const double lin = std::fmod(static_cast<double>(static_cast<long double>(j) * dx * k0),
                                 2.0 * M_PI);
    a(j) = in(j) * std::polar(1.0, sign * lin) * chirp(beta, j, sign);
  }
  // b(d) = conj chirp at offset d = m - j, d in [-(n-1), m_out-1], stored cyclically.
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(len);
  for (int d = 0; d < m_out; ++d) b(d) = chirp(beta, d, -sign);
  for (int d = 1; d < n; ++d) b(len - d) = chirp(beta, d, -sign);

  dft(a, -1);
  dft(b, -1);
  a = a.cwiseProduct(b);
  dft(a, +1);

  Eigen::VectorXcd out(m_out);
  const double base = std::fmod(x0 * k0, 2.0 * M_PI);
  for (int m = 0; m < m_out; ++m) {
    const double lin = std::fmod(static_cast<double>(static_cast<long double>(m) * x0 * dk),
                                 2.0 * M_PI);
    out(m) = a(m) / static_cast<double>(len) * chirp(beta, m, sign) *
             std::polar(1.0, sign * (base + lin));
  }
  return out;
}

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) return {};
  const int n = static_cast<int>(a.size() + b.size() - 1);
  const int len = fast_size(n);
  Eigen::VectorXcd fa = Eigen::VectorXcd::Zero(len), fb = Eigen::VectorXcd::Zero(len);
  for (std::size_t i = 0; i < a.size(); ++i) fa(i) = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) fb(i) = b[i];
  dft(fa, -1);
  dft(fb, -1);
  fa = fa.cwiseProduct(fb);
  dft(fa, +1);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = fa(i).real() / len;
  return out;
}

}  // namespace harperlab::fft
