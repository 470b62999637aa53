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

#include "harperlab/rotation_algebra.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "json.hpp"

#include "harperlab/error.hpp"

namespace harperlab {

namespace {

std::vector<FourierElement::Term> merge_sorted(std::vector<FourierElement::Term> terms) {
  std::stable_sort(terms.begin(), terms.end(),
                   [](const auto& x, const auto& y) { return x.mode < y.mode; });
  std::vector<FourierElement::Term> out;
  out.reserve(terms.size());
  for (const auto& t : terms) {
    if (!out.empty() && out.back().mode == t.mode) {
      out.back().value += t.value;
    } else {
      out.push_back(t);
    }
  }
  std::erase_if(out, [](const auto& t) { return t.value == Complex(0.0, 0.0); });
  return out;
}

void require_same_theta(const FourierElement& a, const FourierElement& b) {
  if (a.theta() != b.theta()) throw DomainError("FourierElement: mismatched theta");
}

}  // namespace

namespace symmetry {
IntMatrix2 by_name(const std::string& name) {
  std::string n;
  for (char c : name) n.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (n == "S3") return kS3;
  if (n == "S4") return kS4;
  if (n == "S6") return kS6;
  throw DomainError("unknown symmetry '" + name + "' (expected S3, S4 or S6)");
}
}  // namespace symmetry

FourierElement::FourierElement(double theta, std::vector<Term> terms)
    : theta_(theta), terms_(merge_sorted(std::move(terms))) {}

FourierElement FourierElement::word(double theta, Mode m, Complex value) {
  return FourierElement(theta, {{m, value}});
}

Complex FourierElement::coefficient(const Mode& m) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                             [](const Term& t, const Mode& k) { return t.mode < k; });
  if (it != terms_.end() && it->mode == m) return it->value;
  return 0.0;
}

FourierElement FourierElement::adjoint() const {
  std::vector<Term> t;
  t.reserve(terms_.size());
  for (const auto& x : terms_) t.push_back({-x.mode, std::conj(x.value)});
  return FourierElement(theta_, std::move(t));
}

bool FourierElement::is_self_adjoint(double tol) const {
  for (const auto& x : terms_) {
    if (std::abs(coefficient(-x.mode) - std::conj(x.value)) > tol) return false;
  }
  return true;
}

double FourierElement::l1_norm() const {
  double s = 0.0;
  for (const auto& x : terms_) s += std::abs(x.value);
  return s;
}

double FourierElement::max_abs() const {
  double s = 0.0;
  for (const auto& x : terms_) s = std::max(s, std::abs(x.value));
  return s;
}

int FourierElement::radius1() const {
  int r = 0;
  for (const auto& x : terms_) r = std::max(r, std::abs(x.mode.m1));
  return r;
}

int FourierElement::radius2() const {
  int r = 0;
  for (const auto& x : terms_) r = std::max(r, std::abs(x.mode.m2));
  return r;
}

FourierElement FourierElement::pruned(double rel_tol) const {
  const double cut = rel_tol * max_abs();
  FourierElement out(theta_);
  for (const auto& x : terms_) {
    if (std::abs(x.value) > cut) out.terms_.push_back(x);
  }
  return out;
}

FourierElement FourierElement::operator+(const FourierElement& o) const {
  require_same_theta(*this, o);
  std::vector<Term> t = terms_;
  t.insert(t.end(), o.terms_.begin(), o.terms_.end());
  return FourierElement(theta_, std::move(t));
}

FourierElement FourierElement::operator-(const FourierElement& o) const { return *this + o * -1.0; }

FourierElement FourierElement::operator*(Complex s) const {
  std::vector<Term> t = terms_;
  for (auto& x : t) x.value *= s;
  return FourierElement(theta_, std::move(t));
}

FourierElement weyl_product(const FourierElement& a, const FourierElement& b) {
  require_same_theta(a, b);
  const double theta = a.theta();
  std::vector<FourierElement::Term> t;
  t.reserve(a.size() * b.size());
  for (const auto& x : a.terms()) {
    for (const auto& y : b.terms()) {
      const double phase = 0.5 * theta * wedge(x.mode, y.mode);
      t.push_back({x.mode + y.mode, x.value * y.value * std::polar(1.0, phase)});
    }
  }
  return FourierElement(theta, std::move(t)).pruned(kProductPruneTolerance);
}

Complex trace(const FourierElement& a) { return a.coefficient({0, 0}); }

Complex fourier_coefficient(const FourierElement& a, const Mode& m) {
  return trace(weyl_product(FourierElement::word(a.theta(), -m), a));
}

FourierElement derivation(const FourierElement& a, int j) {
  if (j != 1 && j != 2) throw DomainError("derivation index must be 1 or 2");
  std::vector<FourierElement::Term> t;
  for (const auto& x : a.terms()) {
    const int mj = j == 1 ? x.mode.m1 : x.mode.m2;
    t.push_back({x.mode, x.value * Complex(0.0, mj)});
  }
  return FourierElement(a.theta(), std::move(t));
}

FourierElement symmetry_automorphism(const FourierElement& a, const IntMatrix2& s) {
  if (s.det() != 1) throw DomainError("symmetry matrix must have determinant 1");
  std::vector<FourierElement::Term> t;
  for (const auto& x : a.terms()) t.push_back({s.apply(x.mode), x.value});
  return FourierElement(a.theta(), std::move(t));
}

HamiltonianSpec hamiltonian_preset(const std::string& name, double theta) {
  using T = FourierElement::Term;
  std::vector<T> t;
  if (name == "harper4" || name == "triangular6") {
    t = {{{1, 0}, 1.0}, {{-1, 0}, 1.0}, {{0, 1}, 1.0}, {{0, -1}, 1.0}};
    if (name == "triangular6") {
      t.push_back({{1, 1}, 1.0});
      t.push_back({{-1, -1}, 1.0});
    }
  } else if (name == "free_chain") {
    t = {{{1, 0}, 1.0}, {{-1, 0}, 1.0}};
  } else if (name == "cosine_potential") {
    t = {{{0, 1}, 1.0}, {{0, -1}, 1.0}};
  } else {
    throw DomainError("unknown model preset '" + name + "'");
  }
  return {name, FourierElement(theta, std::move(t))};
}

// ---------------------------------------------------------------------------

BandedMatrix::BandedMatrix(SiteWindow window, int bandwidth)
    : window_(window), bandwidth_(bandwidth),
      bands_(2 * bandwidth + 1, Eigen::VectorXcd::Zero(window.count)) {
  if (window.count <= 0 || bandwidth < 0) throw DomainError("BandedMatrix: bad shape");
}

Complex BandedMatrix::entry(int i, int j) const {
  const int k = j - i;
  if (std::abs(k) > bandwidth_ || i < 0 || j < 0 || i >= dim() || j >= dim()) return 0.0;
  return bands_[k + bandwidth_](i);
}

Complex& BandedMatrix::at(int i, int j) {
  const int k = j - i;
  if (std::abs(k) > bandwidth_ || i < 0 || j < 0 || i >= dim() || j >= dim())
    throw DomainError("BandedMatrix: entry outside band");
  return bands_[k + bandwidth_](i);
}

Eigen::VectorXcd BandedMatrix::apply(const Eigen::VectorXcd& x) const {
  const int n = dim();
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(n);
  for (int k = -bandwidth_; k <= bandwidth_; ++k) {
    const auto& band = bands_[k + bandwidth_];
    const int lo = std::max(0, -k), hi = std::min(n, n - k);
    for (int i = lo; i < hi; ++i) y(i) += band(i) * x(i + k);
  }
  return y;
}

Eigen::MatrixXcd BandedMatrix::to_dense() const {
  const int n = dim();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (int k = -bandwidth_; k <= bandwidth_; ++k) {
    const int lo = std::max(0, -k), hi = std::min(n, n - k);
    for (int i = lo; i < hi; ++i) m(i, i + k) = bands_[k + bandwidth_](i);
  }
  return m;
}

bool BandedMatrix::is_hermitian(double tol) const {
  const int n = dim();
  for (int k = 0; k <= bandwidth_; ++k) {
    for (int i = 0; i + k < n; ++i) {
      if (std::abs(entry(i, i + k) - std::conj(entry(i + k, i))) > tol) return false;
    }
  }
  return true;
}

BandedMatrix represent_1d(const FourierElement& a, double omega, SiteWindow window) {
  if (window.count < 1) throw DomainError("represent_1d: empty window");
  const int b = a.radius1();
  if (b > window.count - 1) throw DomainError("represent_1d: window too small for support");
  BandedMatrix m(window, b);
  const double theta = a.theta();
  for (const auto& t : a.terms()) {
    const int m1 = t.mode.m1, m2 = t.mode.m2;
    const Complex pre = t.value * std::polar(1.0, -0.5 * theta * m1 * m2);
    for (int j = 0; j < window.count; ++j) {
      const int i = j + m1;
      if (i < 0 || i >= window.count) continue;
      const double l = window.first + j;
      const double phase = std::remainder((omega - l * theta) * m2, 2.0 * M_PI);
      m.at(i, j) += pre * std::polar(1.0, phase);
    }
  }
  m.set_hermitian_flag(a.is_self_adjoint(1e-14 * std::max(1.0, a.max_abs())));
  return m;
}

SparseMatrix2D represent_2d(const FourierElement& a, int half_width) {
  if (half_width < 0) throw DomainError("represent_2d: negative window");
  const int r = std::max(a.radius1(), a.radius2());
  if (r > 2 * half_width) throw DomainError("represent_2d: window too small for support");
  SparseMatrix2D out;
  out.lattice.half_width = half_width;
  const Lattice2D& lat = out.lattice;
  const double theta = a.theta();
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(static_cast<std::size_t>(lat.size()) * a.size());
  for (int idx = 0; idx < lat.size(); ++idx) {
    const Mode l = lat.site(idx);
    for (const auto& t : a.terms()) {
      const Mode src = l - t.mode;
      if (!lat.contains(src.m1, src.m2)) continue;
      const double phase = 0.5 * theta * wedge(t.mode, l);
      trip.emplace_back(idx, lat.index(src.m1, src.m2), t.value * std::polar(1.0, phase));
    }
  }
  out.matrix.resize(lat.size(), lat.size());
  out.matrix.setFromTriplets(trip.begin(), trip.end());
  out.matrix.makeCompressed();
  out.hermitian = a.is_self_adjoint(1e-14 * std::max(1.0, a.max_abs()));
  return out;
}

std::optional<RationalAngle> rational_angle(double theta, long long max_q) {
  const double beta = theta / (2.0 * M_PI);
  for (long long q = 1; q <= max_q; ++q) {
    const double pq = std::nearbyint(beta * q);
    if (std::fabs(beta * q - pq) <= 1e-13 * std::max(1.0, std::fabs(beta * q))) {
      return RationalAngle{static_cast<long long>(pq), q};
    }
  }
  return std::nullopt;
}

Eigen::MatrixXcd represent_bloch(const FourierElement& a, double omega, double k) {
  const auto ra = rational_angle(a.theta());
  if (!ra) throw DomainError("represent_bloch: theta is not 2 pi p/q with small q");
  const int q = static_cast<int>(ra->q);
  const double theta = a.theta();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(q, q);
  for (const auto& t : a.terms()) {
    const int m1 = t.mode.m1, m2 = t.mode.m2;
    const Complex pre = t.value * std::polar(1.0, -0.5 * theta * m1 * m2 + k * m1);
    for (int l = 0; l < q; ++l) {
      const int n = ((l + m1) % q + q) % q;
      const double phase = std::remainder((omega - l * theta) * m2, 2.0 * M_PI);
      m(n, l) += pre * std::polar(1.0, phase);
    }
  }
  return m;
}

Complex trace_per_volume(const FourierElement& a, double omega, int lambda) {
  if (lambda < 1) throw DomainError("trace_per_volume: Lambda must be >= 1");
  Complex s = 0.0;
  for (const auto& t : a.terms()) {
    if (t.mode.m1 != 0) continue;
    Complex row = 0.0;
    for (int n = 1; n <= lambda; ++n) {
      row += std::polar(1.0, std::remainder((omega - n * a.theta()) * t.mode.m2, 2.0 * M_PI));
    }
    s += t.value * row;
  }
  return s / static_cast<double>(lambda);
}

std::string to_json(const FourierElement& a) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& t : a.terms()) {
    j.push_back({{"m1", t.mode.m1},
                 {"m2", t.mode.m2},
                 {"re", t.value.real()},
                 {"im", t.value.imag()},
                 {"theta", a.theta()}});
  }
  return j.dump();
}

FourierElement element_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("FourierElement JSON: ") + e.what());
  }
  if (!j.is_array() || j.empty()) throw ConfigError("FourierElement JSON: expected non-empty array");
  std::vector<FourierElement::Term> t;
  double theta = 0.0;
  bool first = true;
  for (const auto& r : j) {
    try {
      const double th = r.at("theta").get<double>();
      if (first) {
        theta = th;
        first = false;
      } else if (th != theta) {
        throw ConfigError("FourierElement JSON: records disagree on theta");
      }
      t.push_back({{r.at("m1").get<int>(), r.at("m2").get<int>()},
                   {r.at("re").get<double>(), r.value("im", 0.0)}});
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("FourierElement JSON: ") + e.what());
    }
  }
  if (!(theta > 0.0)) throw ConfigError("FourierElement JSON: theta must be positive");
  return FourierElement(theta, std::move(t));
}

}  // namespace harperlab
