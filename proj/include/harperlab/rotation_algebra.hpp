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

#ifndef HARPERLAB_ROTATION_ALGEBRA_HPP
#define HARPERLAB_ROTATION_ALGEBRA_HPP

#include <compare>
#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace harperlab {

using Complex = std::complex<double>;

/// Lattice point m = (m1, m2) in Z^2, ordered lexicographically.
struct Mode {
  int m1 = 0;
  int m2 = 0;
  friend auto operator<=>(const Mode&, const Mode&) = default;
  Mode operator+(const Mode& o) const { return {m1 + o.m1, m2 + o.m2}; }
  Mode operator-(const Mode& o) const { return {m1 - o.m1, m2 - o.m2}; }
  Mode operator-() const { return {-m1, -m2}; }
};

/// Symplectic form l ^ m = l1 m2 - l2 m1.
inline int wedge(const Mode& l, const Mode& m) { return l.m1 * m.m2 - l.m2 * m.m1; }

/// Integer 2x2 matrix acting on modes, S m = (a m1 + b m2, c m1 + d m2).
struct IntMatrix2 {
  int a = 1, b = 0, c = 0, d = 1;
  int det() const { return a * d - b * c; }
  Mode apply(const Mode& m) const { return {a * m.m1 + b * m.m2, c * m.m1 + d * m.m2}; }
  IntMatrix2 operator*(const IntMatrix2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  friend bool operator==(const IntMatrix2&, const IntMatrix2&) = default;
};

namespace symmetry {
inline constexpr IntMatrix2 kS3{0, -1, 1, -1};
inline constexpr IntMatrix2 kS4{0, -1, 1, 0};
inline constexpr IntMatrix2 kS6{1, -1, 1, 0};
/// Parses "S3", "S4", "S6" (case-insensitive).
IntMatrix2 by_name(const std::string& name);
}  // namespace symmetry

/// A finite Fourier sum A = sum_m a_m W_theta(m) in the rotation algebra.
/// Coefficients are kept as a list sorted by mode with zeros removed.
class FourierElement {
 public:
  struct Term {
    Mode mode;
    Complex value;
  };

  FourierElement() = default;
  explicit FourierElement(double theta) : theta_(theta) {}
  /// Duplicate modes are summed in input order; exact zeros are dropped.
  FourierElement(double theta, std::vector<Term> terms);

  static FourierElement identity(double theta) { return word(theta, {0, 0}); }
  static FourierElement word(double theta, Mode m, Complex value = 1.0);

  double theta() const { return theta_; }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  Complex coefficient(const Mode& m) const;
  FourierElement adjoint() const;
  /// a_{-m} == conj(a_m) on the stored support, up to tol.
  bool is_self_adjoint(double tol = 0.0) const;

  /// sum |a_m|, an upper bound for the operator norm in every representation.
  double l1_norm() const;
  double max_abs() const;
  /// max |m1| and max |m2| over the support.
  int radius1() const;
  int radius2() const;

  /// Drops coefficients with |a_m| <= rel_tol * max |a|.
  FourierElement pruned(double rel_tol) const;

  FourierElement operator+(const FourierElement& o) const;
  FourierElement operator-(const FourierElement& o) const;
  FourierElement operator*(Complex s) const;

 private:
  double theta_ = 0.0;
  std::vector<Term> terms_;
};

/// Relative pruning threshold applied after products.
inline constexpr double kProductPruneTolerance = 1e-14;

/// Twisted convolution c_n = sum_l a_l b_{n-l} e^{i theta l^(n-l)/2}.
FourierElement weyl_product(const FourierElement& a, const FourierElement& b);

/// Canonical trace tau(A) = a_(0,0).
Complex trace(const FourierElement& a);

/// Fourier coefficient through the trace, tau(W(m)^{-1} A).
Complex fourier_coefficient(const FourierElement& a, const Mode& m);

/// delta_j W(m) = i m_j W(m), j in {1, 2}.
FourierElement derivation(const FourierElement& a, int j);

/// eta_S(W(m)) = W(S m); requires det S = 1.
FourierElement symmetry_automorphism(const FourierElement& a, const IntMatrix2& s);

struct HamiltonianSpec {
  std::string name;  // harper4 | triangular6 | free_chain | cosine_potential | custom
  FourierElement element;
};

/// Named model presets at angle theta.
HamiltonianSpec hamiltonian_preset(const std::string& name, double theta);

// ---------------------------------------------------------------------------
// Representations

/// Contiguous block of chain sites first, first+1, ..., first+count-1.
struct SiteWindow {
  int first = 0;
  int count = 0;
  static SiteWindow symmetric(int n) { return {-n, 2 * n + 1}; }
  int last() const { return first + count - 1; }
};

/// Banded square matrix on a site window; entry (i, j) lives in band j - i.
class BandedMatrix {
 public:
  BandedMatrix() = default;
  BandedMatrix(SiteWindow window, int bandwidth);

  SiteWindow window() const { return window_; }
  int dim() const { return window_.count; }
  int bandwidth() const { return bandwidth_; }

  /// Row/column indices are window-relative (0 .. dim-1).
  Complex entry(int i, int j) const;
  Complex& at(int i, int j);

  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  Eigen::MatrixXcd to_dense() const;
  bool is_hermitian(double tol = 0.0) const;
  bool hermitian_flag() const { return hermitian_; }
  void set_hermitian_flag(bool f) { hermitian_ = f; }

 private:
  SiteWindow window_{};
  int bandwidth_ = 0;
  std::vector<Eigen::VectorXcd> bands_;  // bands_[k + b](i) = entry(i, i + k)
  bool hermitian_ = false;
};

/// 1D covariant representation pi_omega(A) truncated to a window (open edges).
/// Matrix element <n|pi_omega(W(m))|l> = e^{-i theta m1 m2/2} e^{i(omega - l theta) m2}
/// delta_{n, l+m1}.
BandedMatrix represent_1d(const FourierElement& a, double omega, SiteWindow window);

/// 2D magnetic-translation representation on the square -n..n per axis,
/// pi_2D(W(m)) psi(l) = e^{i theta m^l/2} psi(l - m), open edges.
struct Lattice2D {
  int half_width = 0;
  int side() const { return 2 * half_width + 1; }
  int size() const { return side() * side(); }
  int index(int l1, int l2) const { return (l1 + half_width) * side() + (l2 + half_width); }
  Mode site(int idx) const { return {idx / side() - half_width, idx % side() - half_width}; }
  bool contains(int l1, int l2) const {
    return l1 >= -half_width && l1 <= half_width && l2 >= -half_width && l2 <= half_width;
  }
};

using SparseMatrixC = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

struct SparseMatrix2D {
  Lattice2D lattice;
  SparseMatrixC matrix;
  bool hermitian = false;
};

SparseMatrix2D represent_2d(const FourierElement& a, int half_width);

/// Rational angle theta = 2 pi p / q recognised to 1e-13 relative, q <= max_q.
struct RationalAngle {
  long long p = 0;
  long long q = 0;
};
std::optional<RationalAngle> rational_angle(double theta, long long max_q = 100000);

/// Finite-dimensional (Bloch) representation of the rational algebra on
/// Z/qZ with U = e^{ik} (cyclic shift) and V = diag e^{i(omega - l theta)}.
/// Requires theta = 2 pi p / q.
Eigen::MatrixXcd represent_bloch(const FourierElement& a, double omega, double k);

/// (1/Lambda) sum_{n=1}^{Lambda} <n|pi_omega(A)|n>.
Complex trace_per_volume(const FourierElement& a, double omega, int lambda);

// ---------------------------------------------------------------------------
// Serialization: JSON list of {m1, m2, re, im, theta}.

std::string to_json(const FourierElement& a);
FourierElement element_from_json(const std::string& text);

}  // namespace harperlab

#endif  // HARPERLAB_ROTATION_ALGEBRA_HPP
