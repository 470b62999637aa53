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

#ifndef HARPERLAB_FFT_HPP
#define HARPERLAB_FFT_HPP

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace harperlab::fft {

using Complex = std::complex<double>;

/// Unnormalized in-place DFT, out_k = sum_j in_j e^{sign 2 pi i jk/n}.
void dft(Eigen::VectorXcd& data, int sign);

/// Smallest n' >= n whose prime factors are 2, 3, 5 or 7.
int fast_size(int n);

/// Chirp-z (Bluestein) evaluation of
///   out_m = sum_j in_j exp(sign * i * (x0 + j dx) * (k0 + m dk)),  m = 0 .. m_out-1.
Eigen::VectorXcd chirp_z(const Eigen::VectorXcd& in, double x0, double dx, double k0, double dk,
                         int m_out, int sign);

/// Linear convolution of two real sequences (length a.size() + b.size() - 1).
std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace harperlab::fft

#endif  // HARPERLAB_FFT_HPP
