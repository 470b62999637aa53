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

#include "harperlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "harperlab/error.hpp"
#include "harperlab/fft.hpp"

namespace harperlab::spectral {

namespace {

constexpr double kGaussianRadius = 6.0;  // in units of 1/T
constexpr double kDirectPairBudget = 4e7;
constexpr int kBinsPerWidth = 64;

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y, std::size_t lo,
                      std::size_t hi) {
  const double n = static_cast<double>(hi - lo);
  double sx = 0, sy = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

std::vector<double> gaussian_direct(const std::vector<Atom>& a, double t) {
  const double r = kGaussianRadius / t;
  std::vector<double> out(a.size(), 0.0);
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    while (a[lo].e < a[i].e - r) ++lo;
    while (hi < a.size() && a[hi].e <= a[i].e + r) ++hi;
    double s = 0.0;
    for (std::size_t j = lo; j < hi; ++j) {
      const double d = (a[j].e - a[i].e) * t;
      s += a[j].w * std::exp(-d * d);
    }
    out[i] = s;
  }
  return out;
}

double gaussian_pairs(const std::vector<Atom>& a, double t) {
  const double r = kGaussianRadius / t;
  double pairs = 0.0;
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    while (a[lo].e < a[i].e - r) ++lo;
    while (hi < a.size() && a[hi].e <= a[i].e + r) ++hi;
    pairs += static_cast<double>(hi - lo);
  }
  return pairs;
}

// Linear binning, FFT convolution with the sampled Gaussian, linear interpolation back.
std::vector<double> gaussian_binned(const std::vector<Atom>& a, double t) {
  const double bin = 1.0 / (kBinsPerWidth * t);
  const int half = static_cast<int>(std::ceil(kGaussianRadius * kBinsPerWidth));
  const double origin = a.front().e - (half + 2) * bin;
  const int nb = static_cast<int>(std::ceil((a.back().e - origin) / bin)) + half + 4;
  std::vector<double> mass(nb, 0.0);
  for (const auto& at : a) {
    const double u = (at.e - origin) / bin;
    const int k = static_cast<int>(std::floor(u));
    const double f = u - k;
    mass[k] += at.w * (1.0 - f);
    mass[k + 1] += at.w * f;
  }
  std::vector<double> kern(2 * half + 1);
  for (int k = -half; k <= half; ++k) {
    const double d = k * bin * t;
    kern[k + half] = std::exp(-d * d);
  }
  const auto conv = fft::convolve(mass, kern);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double u = (a[i].e - origin) / bin;
    const int k = static_cast<int>(std::floor(u));
    const double f = u - k;
    out[i] = (1.0 - f) * conv[k + half] + f * conv[k + 1 + half];
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

Eigensystem hermitian_eigensystem(const BandedMatrix& m, bool with_vectors) {
  const int n = m.dim();
  Eigensystem out;
  if (m.bandwidth() == 0) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return m.entry(a, a).real() < m.entry(b, b).real(); });
    out.values.resize(n);
    if (with_vectors) out.vectors = Eigen::MatrixXcd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
      out.values(k) = m.entry(order[k], order[k]).real();
      if (with_vectors) out.vectors(order[k], k) = 1.0;
    }
    return out;
  }
  if (m.bandwidth() == 1) {
    Eigen::VectorXd diag(n), sub(std::max(n - 1, 0));
    Eigen::VectorXcd gauge(n);
    gauge(0) = 1.0;
    for (int i = 0; i < n; ++i) diag(i) = m.entry(i, i).real();
    for (int i = 0; i + 1 < n; ++i) {
      const Complex e = m.entry(i, i + 1);
      const double a = std::abs(e);
      sub(i) = a;
      gauge(i + 1) = a > 0.0 ? gauge(i) * std::conj(e) / a : gauge(i);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("tridiagonal eigensolver failed");
    out.values = es.eigenvalues();
    if (with_vectors) out.vectors = gauge.asDiagonal() * es.eigenvectors().cast<Complex>();
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      m.to_dense(), with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
  out.values = es.eigenvalues();
  if (with_vectors) out.vectors = es.eigenvectors();
  return out;
}

// ---------------------------------------------------------------------------

EmpiricalMeasure::EmpiricalMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  for (const auto& a : atoms_) {
    if (!(a.w > 0.0) || !std::isfinite(a.e)) throw DomainError("EmpiricalMeasure: bad atom");
  }
  std::stable_sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.e < b.e; });
  cumulative_.resize(atoms_.size() + 1, 0.0);
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const double w = atoms_[i].w, t = sum + w;
    comp += std::fabs(sum) >= std::fabs(w) ? (sum - t) + w : (w - t) + sum;
    sum = t;
    cumulative_[i + 1] = sum + comp;
  }
  total_ = cumulative_.back();
}

double EmpiricalMeasure::moment(int k) const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.w * std::pow(a.e, k);
  return s;
}

double EmpiricalMeasure::mass(double lo, double hi) const {
  auto cmp = [](const Atom& a, double v) { return a.e < v; };
  const auto i = std::lower_bound(atoms_.begin(), atoms_.end(), lo, cmp) - atoms_.begin();
  const auto j = std::lower_bound(atoms_.begin(), atoms_.end(), hi, cmp) - atoms_.begin();
  return j > i ? cumulative_[j] - cumulative_[i] : 0.0;
}

EmpiricalMeasure EmpiricalMeasure::restricted(double lo, double hi) const {
  std::vector<Atom> a;
  for (const auto& x : atoms_)
    if (x.e >= lo && x.e < hi) a.push_back(x);
  EmpiricalMeasure out(std::move(a));
  out.provenance = provenance;
  return out;
}

EmpiricalMeasure EmpiricalMeasure::affine(double a, double b) const {
  std::vector<Atom> out;
  out.reserve(atoms_.size());
  for (const auto& x : atoms_) out.push_back({a * x.e + b, x.w});
  return EmpiricalMeasure(std::move(out));
}

std::string EmpiricalMeasure::to_csv() const {
  std::string s = "E,w\n";
  char buf[64];
  for (const auto& a : atoms_) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", a.e, a.w);
    s += buf;
  }
  return s;
}

ScalingFit fit_scaling(const std::vector<double>& t, const std::vector<double>& values,
                       double window_fraction, double step_fraction) {
  if (t.size() != values.size() || t.size() < 3) throw RefusedError("fit_scaling: need >= 3 points");
  ScalingFit f;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0) || !(values[i] > 0.0))
      throw NumericalError("fit_scaling: nonpositive sample");
    f.log_t.push_back(std::log(t[i]));
    f.log_value.push_back(std::log(values[i]));
  }
  f.t_min = *std::min_element(t.begin(), t.end());
  f.t_max = *std::max_element(t.begin(), t.end());
  const auto g = least_squares(f.log_t, f.log_value, 0, t.size());
  f.slope = g.slope;
  f.intercept = g.intercept;
  f.residual_rms = g.rms;
  const double lo = std::log(f.t_min), range = std::log(f.t_max) - lo;
  f.window_width = window_fraction * range;
  const double step = step_fraction * range;
  if (range > 0 && step > 0) {
    for (double a = lo; a + f.window_width <= lo + range + 1e-12; a += step) {
      std::vector<double> x, y;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (f.log_t[i] >= a - 1e-12 && f.log_t[i] <= a + f.window_width + 1e-12) {
          x.push_back(f.log_t[i]);
          y.push_back(f.log_value[i]);
        }
      }
      if (x.size() >= 3) f.window_slopes.push_back(least_squares(x, y, 0, x.size()).slope);
    }
  }
  if (f.window_slopes.empty()) {
    f.limsup = f.liminf = f.slope;
  } else {
    f.limsup = *std::max_element(f.window_slopes.begin(), f.window_slopes.end());
    f.liminf = *std::min_element(f.window_slopes.begin(), f.window_slopes.end());
  }
  return f;
}

std::vector<double> geometric_grid(double t_min, double t_max, double ratio) {
  if (!(t_min > 0.0) || !(t_max >= t_min) || !(ratio > 1.0)) throw DomainError("geometric_grid: bad range");
  std::vector<double> g;
  for (int k = 0;; ++k) {
    const double t = t_min * std::pow(ratio, k);
    if (t > t_max * (1.0 + 1e-9)) break;
    g.push_back(t);
  }
  return g;
}

// ---------------------------------------------------------------------------

EmpiricalMeasure dos_estimate(const FourierElement& h, int n_sites, int n_omega) {
  if (n_sites < 64 || n_omega < 8) throw DomainError("dos_estimate: need N >= 64 and n_omega >= 8");
  if (!h.is_self_adjoint(1e-12 * std::max(1.0, h.max_abs())))
    throw DomainError("dos_estimate: H must be self-adjoint");
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(n_sites) * n_omega);
  const double w = 1.0 / (static_cast<double>(n_sites) * n_omega);
  for (int k = 0; k < n_omega; ++k) {
    const double omega = 2.0 * M_PI * k / n_omega;
    Eigensystem es;
    try {
      es = hermitian_eigensystem(represent_1d(h, omega, SiteWindow{1, n_sites}), false);
    } catch (const NumericalError& e) {
      char buf[96];
      std::snprintf(buf, sizeof buf, " (omega=%.17g, N=%d)", omega, n_sites);
      throw NumericalError(e.what() + std::string(buf));
    }
    for (int i = 0; i < n_sites; ++i) atoms.push_back({es.values(i), w});
  }
  EmpiricalMeasure mu(std::move(atoms));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", h.theta());
  mu.provenance["theta"] = buf;
  mu.provenance["N"] = std::to_string(n_sites);
  mu.provenance["n_omega"] = std::to_string(n_omega);
  return mu;
}

EmpiricalMeasure dos_estimate_bloch(const FourierElement& h, int n_omega, int n_k) {
  if (n_omega < 1 || n_k < 1) throw DomainError("dos_estimate_bloch: need n_omega, n_k >= 1");
  if (!h.is_self_adjoint(1e-12 * std::max(1.0, h.max_abs())))
    throw DomainError("dos_estimate_bloch: H must be self-adjoint");
  const auto ra = rational_angle(h.theta());
  if (!ra) throw DomainError("dos_estimate_bloch: theta must be 2 pi p/q");
  const int q = static_cast<int>(ra->q);
  const double w = 1.0 / (static_cast<double>(q) * n_omega * n_k);
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(q) * n_omega * n_k);
  for (int a = 0; a < n_omega; ++a) {
    for (int b = 0; b < n_k; ++b) {
      const double omega = 2.0 * M_PI * (a + 0.5) / (static_cast<double>(q) * n_omega);
      const double k = 2.0 * M_PI * (b + 0.5) / (static_cast<double>(q) * n_k);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(represent_bloch(h, omega, k),
                                                          Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success) throw NumericalError("dos_estimate_bloch: eigensolver failed");
      for (int i = 0; i < q; ++i) atoms.push_back({es.eigenvalues()(i), w});
    }
  }
  EmpiricalMeasure mu(std::move(atoms));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", h.theta());
  mu.provenance["theta"] = buf;
  mu.provenance["q"] = std::to_string(q);
  mu.provenance["n_omega"] = std::to_string(n_omega);
  mu.provenance["n_k"] = std::to_string(n_k);
  mu.provenance["boundary"] = "bloch";
  return mu;
}

double smoothed_mass(const EmpiricalMeasure& mu, double e, double t) {
  if (!(t > 0.0)) throw DomainError("smoothed_mass: T must be positive");
  double s = 0.0;
  for (const auto& a : mu.atoms()) {
    const double d = (a.e - e) * t;
    s += a.w * std::exp(-d * d);
  }
  return s;
}

std::vector<double> smoothed_masses_at_atoms(const EmpiricalMeasure& mu, double t, Kernel kernel) {
  if (!(t > 0.0)) throw DomainError("smoothed_masses: T must be positive");
  const auto& a = mu.atoms();
  if (a.empty()) return {};
  if (kernel == Kernel::kIndicator) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double r = 1.0 / t;
      out[i] = mu.mass(a[i].e - r, std::nextafter(a[i].e + r, HUGE_VAL));
    }
    return out;
  }
  const double span_bins = (a.back().e - a.front().e) * kBinsPerWidth * t;
  if (span_bins > 1 << 24 || gaussian_pairs(a, t) <= kDirectPairBudget) return gaussian_direct(a, t);
  return gaussian_binned(a, t);
}

std::vector<DimensionEstimate> multifractal_dimensions(const EmpiricalMeasure& mu, Interval delta,
                                                       const std::vector<double>& qs,
                                                       const std::vector<double>& t_grid,
                                                       const DimensionOptions& options) {
  for (double q : qs)
    if (q == 1.0) throw DomainError("multifractal_dimension: q = 1 is excluded");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double e = mu.atoms()[i].e;
    if (e >= delta.lo && e < delta.hi) idx.push_back(i);
  }
  if (idx.size() < 50) throw RefusedError("multifractal_dimension: fewer than 50 atoms in Delta");
  const double spacing = (delta.hi - delta.lo) / static_cast<double>(idx.size());
  const double cap = options.c_spacing / spacing;
  std::vector<double> ts;
  for (double t : t_grid)
    if (t <= cap) ts.push_back(t);
  if (ts.size() < 3) throw RefusedError("multifractal_dimension: fewer than 3 T values below the spacing cap");

  std::vector<std::vector<double>> iq(qs.size(), std::vector<double>(ts.size(), 0.0));
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const auto m = smoothed_masses_at_atoms(mu, ts[k], options.kernel);
    for (std::size_t a = 0; a < qs.size(); ++a) {
      double s = 0.0;
      for (auto i : idx) s += mu.atoms()[i].w * std::pow(m[i], qs[a] - 1.0);
      iq[a][k] = s;
    }
  }
  std::vector<DimensionEstimate> out;
  for (std::size_t a = 0; a < qs.size(); ++a) {
    DimensionEstimate d;
    d.q = qs[a];
    d.fit = fit_scaling(ts, iq[a]);
    const double inv = 1.0 / (1.0 - d.q);
    d.d_mid_raw = d.fit.slope * inv;
    const double w1 = d.fit.limsup * inv, w2 = d.fit.liminf * inv;
    d.d_plus_raw = std::max(w1, w2);
    d.d_minus_raw = std::min(w1, w2);
    d.d_mid = std::clamp(d.d_mid_raw, 0.0, 1.0);
    d.d_plus = std::clamp(d.d_plus_raw, 0.0, 1.0);
    d.d_minus = std::clamp(d.d_minus_raw, 0.0, 1.0);
    d.t_cap = cap;
    d.capped = ts.size() < t_grid.size();
    d.atoms_in_delta = idx.size();
    out.push_back(std::move(d));
  }
  return out;
}

DimensionEstimate multifractal_dimension(const EmpiricalMeasure& mu, Interval delta, double q,
                                         const std::vector<double>& t_grid,
                                         const DimensionOptions& options) {
  return multifractal_dimensions(mu, delta, {q}, t_grid, options).front();
}

LevelSetResult level_set_partition(const EmpiricalMeasure& mu, double t, double p, double kappa) {
  if (mu.size() < 1000) throw RefusedError("level_set_partition: need >= 1000 atoms");
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("level_set_partition: p must lie in (0, 1]");
  if (!(t > 1.0)) throw DomainError("level_set_partition: T must exceed 1");
  const double log_t = std::log(t);
  const auto m = smoothed_masses_at_atoms(mu, t, Kernel::kGaussian);
  LevelSetResult r;
  r.t = t;
  r.p = p;
  r.kappa = kappa > 0.0 ? kappa : 2.0 / p;
  for (int attempt = 0; attempt < 2; ++attempt) {
    r.n_bands = static_cast<int>(std::ceil(r.kappa * log_t));
    r.band_masses.assign(r.n_bands + 1, 0.0);
    std::vector<double> contrib(r.n_bands + 1, 0.0);
    r.integral = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const double w = mu.atoms()[i].w;
      const double s = -std::log(std::min(m[i], 1.0)) / log_t;
      int j = 0;
      if (s <= r.kappa) j = std::clamp(static_cast<int>(std::ceil((r.kappa - s) * log_t)), 1, r.n_bands);
      const double c = w * std::pow(m[i], p - 1.0);
      r.band_masses[j] += w;
      contrib[j] += c;
      r.integral += c;
    }
    r.integral_outside = contrib[0];
    if (r.band_masses[0] >= mu.total_mass() * (1.0 - 1e-15)) {
      if (attempt == 0) {
        r.kappa *= 2.0;
        r.kappa_doubled = true;
        continue;
      }
      r.flagged = true;
      return r;
    }
    r.band = static_cast<int>(std::max_element(contrib.begin() + 1, contrib.end()) - contrib.begin());
    break;
  }
  r.alpha = r.kappa - r.band / log_t;
  const double rho = r.band_masses[r.band];
  r.c_fit = rho * log_t / (std::pow(t, (p - 1.0) * r.alpha) * r.integral);
  r.c_proof = std::exp(p - 1.0) * (1.0 - r.integral_outside / r.integral) * log_t / r.n_bands;
  r.margin = r.c_fit - r.c_proof;
  return r;
}

EmpiricalMeasure uniform_measure(int n, double a, double b) {
  if (n < 1 || !(b > a)) throw DomainError("uniform_measure: bad parameters");
  std::vector<Atom> atoms(n);
  for (int k = 0; k < n; ++k) atoms[k] = {a + (b - a) * (k + 0.5) / n, 1.0 / n};
  return EmpiricalMeasure(std::move(atoms));
}

EmpiricalMeasure cantor_measure(int depth) {
  if (depth < 0 || depth > 24) throw DomainError("cantor_measure: depth out of range");
  std::vector<double> left{0.0};
  double len = 1.0;
  for (int d = 0; d < depth; ++d) {
    len /= 3.0;
    std::vector<double> next;
    next.reserve(left.size() * 2);
    for (double x : left) {
      next.push_back(x);
      next.push_back(x + 2.0 * len);
    }
    left.swap(next);
  }
  std::vector<Atom> atoms;
  const double w = 1.0 / static_cast<double>(left.size());
  for (double x : left) atoms.push_back({x + 0.5 * len, w});
  return EmpiricalMeasure(std::move(atoms));
}

EmpiricalMeasure point_mass(double e, double w) { return EmpiricalMeasure({{e, w}}); }

}  // namespace harperlab::spectral
