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

#include "harperlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "harperlab/error.hpp"
#include "harperlab/fft.hpp"
#include "json.hpp"

namespace harperlab::dynamics {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double velocity_1d(const FourierElement& h) {
  double v = 0.0;
  for (const auto& t : h.terms()) v += std::abs(t.value) * std::abs(t.mode.m1);
  return v;
}

double velocity_2d(const FourierElement& h) {
  double v2 = 0.0;
  for (const auto& t : h.terms()) v2 += std::abs(t.value) * std::abs(t.mode.m2);
  return std::max(velocity_1d(h), v2);
}

double resolve_dt(const FourierElement& h, const TransportOptions& o) {
  const double norm = std::max(h.l1_norm(), 1e-300);
  const double dt = o.dt > 0.0 ? o.dt : std::min(0.125, 0.5 / norm);
  if (dt * norm > 0.5 + 1e-12) throw DomainError("transport: dt ||H||_1 must be <= 0.5");
  return dt;
}

void check_common(const FourierElement& h, const std::vector<double>& qs, const TransportOptions& o) {
  if (!h.is_self_adjoint(1e-12 * std::max(1.0, h.max_abs()))) throw DomainError("transport: H must be self-adjoint");
  if (qs.empty()) throw DomainError("transport: empty q list");
  for (double q : qs)
    if (!(q > 0.0 && q <= 2.0)) throw DomainError("transport: q must lie in (0, 2]");
  if (!(o.t_end > 0.0)) throw DomainError("transport: t_end must be positive");
  if (o.delta && !(o.delta->hi > o.delta->lo)) throw DomainError("transport: empty Delta");
}

// Jackson-damped Chebyshev coefficients of the indicator of [a, b] in [-1, 1].
std::vector<double> jackson_indicator(double a, double b, int degree) {
  a = std::clamp(a, -1.0, 1.0);
  b = std::clamp(b, -1.0, 1.0);
  const double ta = std::acos(a), tb = std::acos(b);
  const int n = degree + 1;
  const double alpha = kPi / (n + 1);
  std::vector<double> c(n);
  for (int k = 0; k < n; ++k) {
    const double mu = k == 0 ? (ta - tb) / kPi : 2.0 * (std::sin(k * ta) - std::sin(k * tb)) / (k * kPi);
    const double g = ((n - k + 1) * std::cos(alpha * k) + std::sin(alpha * k) / std::tan(alpha)) / (n + 1);
    c[k] = mu * g;
  }
  return c;
}

Eigen::VectorXcd chebyshev_filter(const LinearMap& h, SpectralBounds b, const Eigen::VectorXcd& v, Interval delta,
                                  int degree) {
  const double center = 0.5 * (b.hi + b.lo), half = 0.5 * (b.hi - b.lo) * 1.01 + 1e-12;
  const auto c = jackson_indicator((delta.lo - center) / half, (delta.hi - center) / half, degree);
  Eigen::VectorXcd t0 = v, t1(v.size()), t2(v.size()), hv(v.size());
  h(t0, hv);
  t1 = (hv - center * t0) / half;
  Eigen::VectorXcd out = c[0] * t0 + c[1] * t1;
  for (std::size_t k = 2; k < c.size(); ++k) {
    h(t1, hv);
    t2 = 2.0 * (hv - center * t1) / half - t0;
    out += c[k] * t2;
    t0.swap(t1);
    t1.swap(t2);
  }
  return out;
}

std::vector<TransportTrace> make_traces(const std::vector<double>& qs, Representation rep, const std::string& model,
                                        const TransportOptions& o, std::size_t n_samples) {
  std::vector<TransportTrace> out(qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) {
    out[i].model = model;
    out[i].rep = rep;
    out[i].q = qs[i];
    out[i].delta = o.delta;
    out[i].t.assign(n_samples, 0.0);
    out[i].m.assign(n_samples, 0.0);
    out[i].error_bound.assign(n_samples, 0.0);
  }
  return out;
}

void stamp(std::vector<TransportTrace>& traces, const std::map<std::string, std::string>& meta) {
  for (auto& tr : traces) tr.metadata = meta;
}

}  // namespace

// ---------------------------------------------------------------------------

int chebyshev_order(double x, double tol) {
  x = std::fabs(x);
  const double half = 0.5 * x;
  for (int k = 1;; ++k) {
    if (k + 2 > x) {
      // 2 sum_{j>k} (x/2)^j / j! <= 2 (x/2)^{k+1}/(k+1)! / (1 - x/(2(k+2)))
      const double lead = (k + 1) * std::log(std::max(half, 1e-300)) - std::lgamma(k + 2.0);
      const double tail = 2.0 * std::exp(lead) / (1.0 - half / (k + 2));
      if (tail <= tol) return k;
    }
    if (k > 100000) throw NumericalError("chebyshev_order: expansion too long");
  }
}

ChebyshevPropagator::ChebyshevPropagator(LinearMap h, SpectralBounds bounds, double dt, double tol)
    : h_(std::move(h)), dt_(dt) {
  if (!(bounds.hi >= bounds.lo)) throw DomainError("ChebyshevPropagator: bad spectral bounds");
  center_ = 0.5 * (bounds.hi + bounds.lo);
  half_width_ = std::max(0.5 * (bounds.hi - bounds.lo), 1e-12);
  const double x = half_width_ * dt;
  const int order = chebyshev_order(x, tol);
  coeffs_.resize(order + 1);
  const Complex global = std::polar(1.0, -center_ * dt);
  Complex phase = 1.0;  // (-i)^k
  for (int k = 0; k <= order; ++k) {
    double j = std::cyl_bessel_j(static_cast<double>(k), std::fabs(x));
    if (x < 0.0 && k % 2 == 1) j = -j;
    coeffs_[k] = global * phase * (k == 0 ? 1.0 : 2.0) * j;
    phase *= Complex(0.0, -1.0);
  }
}

Eigen::VectorXcd ChebyshevPropagator::step(const Eigen::VectorXcd& psi) const {
  Eigen::VectorXcd t0 = psi, t1(psi.size()), t2(psi.size()), hv(psi.size());
  Eigen::VectorXcd out = coeffs_[0] * t0;
  if (coeffs_.size() == 1) return out;
  h_(t0, hv);
  t1 = (hv - center_ * t0) / half_width_;
  out += coeffs_[1] * t1;
  for (std::size_t k = 2; k < coeffs_.size(); ++k) {
    h_(t1, hv);
    t2 = 2.0 * (hv - center_ * t1) / half_width_ - t0;
    out += coeffs_[k] * t2;
    t0.swap(t1);
    t1.swap(t2);
  }
  return out;
}

SpectralBounds gershgorin(const BandedMatrix& h) {
  SpectralBounds b{INFINITY, -INFINITY};
  const int n = h.dim(), w = h.bandwidth();
  for (int i = 0; i < n; ++i) {
    double r = 0.0;
    for (int j = std::max(0, i - w); j <= std::min(n - 1, i + w); ++j)
      if (j != i) r += std::abs(h.entry(i, j));
    const double d = h.entry(i, i).real();
    b.lo = std::min(b.lo, d - r);
    b.hi = std::max(b.hi, d + r);
  }
  return b;
}

double hopping_speed(const BandedMatrix& h) {
  double v = 0.0;
  const int n = h.dim(), w = h.bandwidth();
  for (int i = 0; i < n; ++i) {
    double r = 0.0;
    for (int j = std::max(0, i - w); j <= std::min(n - 1, i + w); ++j) r += std::abs(h.entry(i, j)) * std::abs(i - j);
    v = std::max(v, r);
  }
  return v;
}

double max_admissible_time(const BandedMatrix& h, const Eigen::VectorXcd& psi0, double margin) {
  int first = -1, last = -1;
  for (int i = 0; i < psi0.size(); ++i) {
    if (psi0(i) != 0.0) {
      if (first < 0) first = i;
      last = i;
    }
  }
  if (first < 0) return INFINITY;
  const double room = std::min<double>(first, psi0.size() - 1 - last) - margin;
  const double v = hopping_speed(h);
  if (room <= 0.0) return 0.0;
  return v > 0.0 ? room / v : INFINITY;
}

Eigen::VectorXcd evolve(const BandedMatrix& h, const Eigen::VectorXcd& psi0, double t, double margin) {
  if (psi0.size() != h.dim()) throw DomainError("evolve: dimension mismatch");
  if (t == 0.0) return psi0;
  const double tmax = max_admissible_time(h, psi0, margin);
  if (std::fabs(t) > tmax) {
    throw RefusedError("evolve: t beyond the leakage horizon; maximal admissible t = " + fmt(tmax));
  }
  const LinearMap map = [&h](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) { out = h.apply(in); };
  const SpectralBounds b = gershgorin(h);
  // Chunks keep each expansion short; the total error stays below 1e-10.
  const double width = 0.5 * (b.hi - b.lo);
  const int chunks = std::max(1, static_cast<int>(std::ceil(width * std::fabs(t) / 50.0)));
  const ChebyshevPropagator prop(map, b, t / chunks, 1e-10 / chunks);
  Eigen::VectorXcd psi = psi0;
  for (int c = 0; c < chunks; ++c) psi = prop.step(psi);
  return psi;
}

std::string to_string(Representation r) {
  switch (r) {
    case Representation::k1D: return "1d";
    case Representation::k2D: return "2d";
    case Representation::kWeyl: return "weyl";
  }
  return "?";
}

std::string to_string(AverageMode m) { return m == AverageMode::kCesaro ? "cesaro" : "gaussian"; }

double TransportTrace::controlled_until() const {
  double last = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (m[i] > 0.0 && error_bound[i] > 0.01 * m[i]) break;
    last = t[i];
  }
  return last;
}

std::string TransportTrace::to_csv() const {
  std::ostringstream os;
  os << "t,M,error_bound\n";
  for (std::size_t i = 0; i < t.size(); ++i) os << fmt(t[i]) << ',' << fmt(m[i]) << ',' << fmt(error_bound[i]) << '\n';
  return os.str();
}

double taylor_coefficient_1d(const FourierElement& h) {
  double s = 0.0;
  for (const auto& t : h.terms()) s += static_cast<double>(t.mode.m1) * t.mode.m1 * std::norm(t.value);
  return s;
}

double taylor_coefficient_2d(const FourierElement& h) {
  double s = 0.0;
  for (const auto& t : h.terms())
    s += (static_cast<double>(t.mode.m1) * t.mode.m1 + static_cast<double>(t.mode.m2) * t.mode.m2) * std::norm(t.value);
  return s;
}

// ---------------------------------------------------------------------------
// 1D

namespace {

struct Evolution1D {
  std::vector<std::vector<double>> m;    // [q][k]
  std::vector<double> leak;              // Duhamel bound on ||psi_true - psi||, summed over omega
};

// Evolves one phase; sign = -1 runs backward in time.
void run_phase_1d(const FourierElement& h, double omega, int R, double dt, int n_steps, const std::vector<double>& qs,
                  const std::optional<Interval>& delta, double sign, double weight, Evolution1D& acc) {
  const SiteWindow window = SiteWindow::symmetric(R);
  const BandedMatrix hm = represent_1d(h, omega, window);
  const int n = hm.dim();
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n);
  psi(R) = 1.0;
  if (delta) {
    const auto es = spectral::hermitian_eigensystem(hm, true);
    Eigen::VectorXcd coef = es.vectors.adjoint() * psi;
    for (int i = 0; i < n; ++i)
      if (!(es.values(i) >= delta->lo && es.values(i) < delta->hi)) coef(i) = 0.0;
    psi = es.vectors * coef;
  }
  const LinearMap map = [&hm](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) { out = hm.apply(in); };
  const ChebyshevPropagator prop(map, gershgorin(hm), sign * dt, 1e-12);
  const int band = std::max(1, hm.bandwidth());
  const double hnorm = h.l1_norm();
  std::vector<std::vector<double>> xq(qs.size(), std::vector<double>(n));
  for (std::size_t a = 0; a < qs.size(); ++a)
    for (int i = 0; i < n; ++i) xq[a][i] = std::pow(std::fabs(static_cast<double>(i - R)), qs[a]);
  double leak = 0.0;
  auto edge_norm = [&](const Eigen::VectorXcd& v) {
    double s = 0.0;
    for (int i = 0; i < band; ++i) s += std::norm(v(i)) + std::norm(v(n - 1 - i));
    return std::sqrt(s);
  };
  for (int k = 0; k <= n_steps; ++k) {
    if (k > 0) {
      const double before = edge_norm(psi);
      psi = prop.step(psi);
      leak += dt * hnorm * std::max(before, edge_norm(psi));
    }
    for (std::size_t a = 0; a < qs.size(); ++a) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += xq[a][i] * std::norm(psi(i));
      acc.m[a][k] += weight * s;
    }
    acc.leak[k] += weight * leak;
  }
}

}  // namespace

std::vector<TransportTrace> transport_1d(const FourierElement& h, const std::vector<double>& qs,
                                         const TransportOptions& o, const std::string& model) {
  check_common(h, qs, o);
  if (o.n_omega < 1) throw DomainError("transport_1d: n_omega must be >= 1");
  const double dt = resolve_dt(h, o);
  const int n_steps = static_cast<int>(std::ceil(o.t_end / dt - 1e-9));
  const double v = velocity_1d(h);
  const int needed = static_cast<int>(std::ceil(v * n_steps * dt + o.margin)) + h.radius1();
  const int R = o.half_width > 0 ? o.half_width : needed;
  if (R < needed) {
    const double tmax = (R - o.margin - h.radius1()) / std::max(v, 1e-300);
    throw RefusedError("transport_1d: t_end beyond the leakage horizon; maximal admissible t = " + fmt(tmax));
  }
  if (2 * R + 1 > 4001 && o.delta) throw DomainError("transport_1d: spectral filter needs N <= 4001");

  // Time reversal M(-t) = M(t) after the phase average, checked once at a short time.
  bool two_sided = false;
  {
    const int ks = std::min(n_steps, 8);
    Evolution1D fw{std::vector<std::vector<double>>(qs.size(), std::vector<double>(ks + 1)), std::vector<double>(ks + 1)};
    Evolution1D bw = fw;
    const int n_check = std::min(o.n_omega, 4);
    for (int j = 0; j < n_check; ++j) {
      const double omega = 2.0 * kPi * j / n_check;
      run_phase_1d(h, omega, R, dt, ks, qs, o.delta, 1.0, 1.0 / n_check, fw);
      run_phase_1d(h, omega, R, dt, ks, qs, o.delta, -1.0, 1.0 / n_check, bw);
    }
    for (std::size_t a = 0; a < qs.size(); ++a)
      if (std::fabs(fw.m[a][ks] - bw.m[a][ks]) > 1e-9 * (1.0 + fw.m[a][ks])) two_sided = true;
  }

  Evolution1D acc{std::vector<std::vector<double>>(qs.size(), std::vector<double>(n_steps + 1)),
                  std::vector<double>(n_steps + 1)};
  const double weight = 1.0 / (o.n_omega * (two_sided ? 2.0 : 1.0));
  for (int j = 0; j < o.n_omega; ++j) {
    const double omega = 2.0 * kPi * j / o.n_omega;
    run_phase_1d(h, omega, R, dt, n_steps, qs, o.delta, 1.0, weight, acc);
    if (two_sided) run_phase_1d(h, omega, R, dt, n_steps, qs, o.delta, -1.0, weight, acc);
  }
  auto traces = make_traces(qs, Representation::k1D, model, o, n_steps + 1);
  for (std::size_t a = 0; a < qs.size(); ++a) {
    for (int k = 0; k <= n_steps; ++k) {
      traces[a].t[k] = k * dt;
      traces[a].m[k] = acc.m[a][k];
      const double eps = acc.leak[k];
      traces[a].error_bound[k] = 3.0 * eps * std::pow(R + 1.0, qs[a]);
    }
  }
  stamp(traces, {{"theta", fmt(h.theta())},
                 {"dt", fmt(dt)},
                 {"half_width", std::to_string(R)},
                 {"n_omega", std::to_string(o.n_omega)},
                 {"time_reversal", two_sided ? "averaged" : "symmetric"},
                 {"filter", o.delta ? "eigendecomposition" : "none"}});
  return traces;
}

double moment_1d(const FourierElement& h, double q, double t, std::optional<Interval> delta, int half_width,
                 int n_omega) {
  if (t == 0.0 && !delta) {
    check_common(h, {q}, {});
    return 0.0;
  }
  TransportOptions o;
  o.t_end = std::max(std::fabs(t), 1e-9);
  o.dt = std::min(resolve_dt(h, o), o.t_end);
  o.dt = o.t_end / std::ceil(o.t_end / o.dt);
  o.half_width = half_width;
  o.n_omega = n_omega;
  o.delta = delta;
  const auto tr = transport_1d(h, {q}, o).front();
  return t == 0.0 ? tr.m.front() : tr.m.back();
}

// ---------------------------------------------------------------------------
// 2D

std::vector<TransportTrace> transport_2d(const FourierElement& h, const std::vector<double>& qs,
                                         const TransportOptions& o, const std::string& model) {
  check_common(h, qs, o);
  const double dt = resolve_dt(h, o);
  const int n_steps = static_cast<int>(std::ceil(o.t_end / dt - 1e-9));
  const double v = velocity_2d(h);
  const int radius = std::max(h.radius1(), h.radius2());
  const int needed = static_cast<int>(std::ceil(v * n_steps * dt + o.margin)) + radius;
  const int R = o.half_width > 0 ? o.half_width : needed;
  if (R < needed) {
    const double tmax = (R - o.margin - radius) / std::max(v, 1e-300);
    throw RefusedError("transport_2d: t_end beyond the leakage horizon; maximal admissible t = " + fmt(tmax));
  }
  const auto rep = represent_2d(h, R);
  const auto& mat = rep.matrix;
  const Lattice2D lat = rep.lattice;
  const LinearMap map = [&mat](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) { out = mat * in; };
  const double hn = h.l1_norm();
  const SpectralBounds bounds{-hn, hn};
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(lat.size());
  psi(lat.index(0, 0)) = 1.0;
  if (o.delta) psi = chebyshev_filter(map, bounds, psi, *o.delta, o.jackson_degree);

  std::vector<std::vector<double>> weight(qs.size(), std::vector<double>(lat.size()));
  std::vector<int> edge;
  for (int i = 0; i < lat.size(); ++i) {
    const Mode s = lat.site(i);
    for (std::size_t a = 0; a < qs.size(); ++a)
      weight[a][i] = std::pow(std::fabs(static_cast<double>(s.m1)), qs[a]) + std::pow(std::fabs(static_cast<double>(s.m2)), qs[a]);
    if (std::max(std::abs(s.m1), std::abs(s.m2)) > R - radius) edge.push_back(i);
  }
  auto edge_norm = [&](const Eigen::VectorXcd& x) {
    double s = 0.0;
    for (int i : edge) s += std::norm(x(i));
    return std::sqrt(s);
  };
  const ChebyshevPropagator prop(map, bounds, dt, 1e-12);
  auto traces = make_traces(qs, Representation::k2D, model, o, n_steps + 1);
  double leak = 0.0;
  for (int k = 0; k <= n_steps; ++k) {
    if (k > 0) {
      const double before = edge_norm(psi);
      psi = prop.step(psi);
      leak += dt * hn * std::max(before, edge_norm(psi));
    }
    for (std::size_t a = 0; a < qs.size(); ++a) {
      double s = 0.0;
      for (int i = 0; i < lat.size(); ++i) s += weight[a][i] * std::norm(psi(i));
      traces[a].t[k] = k * dt;
      traces[a].m[k] = s;
      traces[a].error_bound[k] = 3.0 * leak * 2.0 * std::pow(R + 1.0, qs[a]);
    }
  }
  stamp(traces, {{"theta", fmt(h.theta())},
                 {"dt", fmt(dt)},
                 {"half_width", std::to_string(R)},
                 {"filter", o.delta ? "chebyshev-jackson" : "none"},
                 {"jackson_degree", std::to_string(o.jackson_degree)}});
  return traces;
}

double moment_2d(const FourierElement& h, double q, double t, std::optional<Interval> delta, int half_width) {
  if (t == 0.0 && !delta) {
    check_common(h, {q}, {});
    return 0.0;
  }
  TransportOptions o;
  o.t_end = std::max(std::fabs(t), 1e-9);
  o.dt = std::min(resolve_dt(h, o), o.t_end);
  o.dt = o.t_end / std::ceil(o.t_end / o.dt);
  o.half_width = half_width;
  o.delta = delta;
  const auto tr = transport_2d(h, {q}, o).front();
  return t == 0.0 ? tr.m.front() : tr.m.back();
}

// ---------------------------------------------------------------------------
// Weyl

std::vector<double> lanczos_expectations(const LinearMap& a, const Eigen::VectorXcd& psi,
                                         const std::vector<std::function<double(double)>>& fs, int steps,
                                         std::vector<double>* errs) {
  const std::size_t nf = fs.size();
  std::vector<double> out(nf, 0.0);
  if (errs) errs->assign(nf, 0.0);
  const double nrm = psi.norm();
  if (nrm == 0.0) return out;
  std::vector<double> alpha, beta;
  Eigen::VectorXcd v_prev = Eigen::VectorXcd::Zero(psi.size()), v = psi / nrm, w(psi.size());
  double b_prev = 0.0;
  std::vector<std::vector<double>> est(nf);
  auto quadrature = [&](std::size_t k) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t i = 0; i < k; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    for (std::size_t f = 0; f < nf; ++f) {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i)
        s += es.eigenvectors()(0, i) * es.eigenvectors()(0, i) * fs[f](es.eigenvalues()(i));
      est[f].push_back(s);
    }
  };
  auto converged = [&]() {
    const std::size_t k = est[0].size();
    if (k < 6) return false;
    for (std::size_t f = 0; f < nf; ++f)
      if (std::fabs(est[f][k - 1] - est[f][k - 5]) > 1e-9 * std::fabs(est[f][k - 1])) return false;
    return true;
  };
  for (int j = 0; j < steps; ++j) {
    a(v, w);
    const double al = v.dot(w).real();
    w -= al * v + b_prev * v_prev;
    alpha.push_back(al);
    const double b = w.norm();
    quadrature(alpha.size());
    if (b < 1e-12 * std::max(1.0, std::fabs(al)) || converged()) break;
    beta.push_back(b);
    v_prev = v;
    v = w / b;
    b_prev = b;
  }
  for (std::size_t f = 0; f < nf; ++f) {
    const std::size_t k = est[f].size();
    out[f] = est[f].back() * nrm * nrm;
    if (errs) (*errs)[f] = (k > 4 ? std::fabs(est[f][k - 1] - est[f][k - 5]) : 0.0) * nrm * nrm;
  }
  return out;
}

double lanczos_expectation(const LinearMap& a, const Eigen::VectorXcd& psi, const std::function<double(double)>& f,
                           int steps, double* err) {
  std::vector<double> errs;
  const double v = lanczos_expectations(a, psi, {f}, steps, &errs).front();
  if (err) *err = errs.front();
  return v;
}

std::vector<TransportTrace> transport_weyl(const FourierElement& h, const std::vector<double>& qs,
                                           const TransportOptions& o, const std::string& model) {
  check_common(h, qs, o);
  const auto ra = rational_angle(h.theta());
  if (!ra) throw DomainError("transport_weyl: angle must be 2 pi p / q");
  const double theta = h.theta();
  const double dt = resolve_dt(h, o);
  const int n_steps = static_cast<int>(std::ceil(o.t_end / dt - 1e-9));
  const double st = std::sqrt(theta);
  // Phase-space reach: the ballistic radius for the lattice speed, capped to a practical size.
  const double reach = st * (velocity_2d(h) * o.t_end + o.margin);
  const double target = std::min(reach, 24.0 * st + 4.0 * st * std::sqrt(o.t_end) * velocity_2d(h));
  int k = o.grid_k;
  if (k <= 0) k = fft::fast_size(std::max(16, static_cast<int>(std::ceil(target * st / kPi))));
  int cells = o.grid_cells;
  if (cells <= 0) cells = std::max(1, static_cast<int>(std::ceil(2.0 * target / (ra->q * st))));
  if ((static_cast<long long>(cells) * ra->q * k) % 2 != 0) ++k;
  const weyl::Grid g = weyl::Grid::lattice(ra->p, ra->q, k, cells, theta);
  const auto osc = weyl::build_oscillator(symmetry::by_name(o.symmetry));
  if (symmetry_automorphism(h, osc.s).pruned(0.0).terms().size() != h.terms().size() ||
      (symmetry_automorphism(h, osc.s) - h).pruned(0.0).max_abs() > 1e-12 * h.max_abs()) {
    throw DomainError("transport_weyl: H is not invariant under " + o.symmetry);
  }

  // a_m W(sqrt(theta) m) f(x) = a_m e^{i a1 a2 / 2} e^{i a2 x} f(x + a1), tabulated per term.
  struct WeylTerm {
    int shift;
    Eigen::VectorXcd phase;
  };
  std::vector<WeylTerm> wterms;
  for (const auto& t : h.terms()) {
    const double a1 = st * t.mode.m1, a2 = st * t.mode.m2;
    WeylTerm w{((g.shift_points(a1) % g.n) + g.n) % g.n, Eigen::VectorXcd(g.n)};
    for (int j = 0; j < g.n; ++j) w.phase(j) = t.value * std::polar(1.0, 0.5 * a1 * a2 + a2 * g.x(j));
    wterms.push_back(std::move(w));
  }
  const LinearMap hw = [&](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    const int n = g.n;
    out = Eigen::VectorXcd::Zero(n);
    for (const auto& w : wterms) {
      const int head = n - w.shift;
      out.head(head).array() += w.phase.head(head).array() * in.segment(w.shift, head).array();
      if (w.shift > 0) out.tail(w.shift).array() += w.phase.tail(w.shift).array() * in.head(w.shift).array();
    }
  };
  // (1/2)(m11 P^2 + m12 (PQ + QP) + m22 Q^2) with PQ + QP = 2 QP - i.
  Eigen::VectorXd kk(g.n), xx(g.n);
  for (int j = 0; j < g.n; ++j) {
    kk(j) = g.wavenumber(j);
    xx(j) = g.x(j);
  }
  const double m11 = osc.m(0, 0), m12 = osc.m(0, 1), m22 = osc.m(1, 1);
  const LinearMap ham = [&](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    Eigen::VectorXcd f = in;
    fft::dft(f, -1);
    Eigen::VectorXcd pf = f.cwiseProduct(kk.cast<Complex>());
    Eigen::VectorXcd ppf = pf.cwiseProduct(kk.cast<Complex>());
    const double inv = 1.0 / g.n;
    fft::dft(ppf, 1);
    out = 0.5 * m11 * inv * ppf + 0.5 * m22 * xx.cwiseAbs2().cast<Complex>().cwiseProduct(in);
    if (m12 != 0.0) {
      fft::dft(pf, 1);
      out += 0.5 * m12 * (2.0 * inv * xx.cast<Complex>().cwiseProduct(pf) - Complex(0.0, 1.0) * in);
    }
  };
  const double hn = h.l1_norm();
  const SpectralBounds bounds{-hn, hn};
  Eigen::VectorXcd psi = weyl::ground_state(osc, g).v;
  if (o.delta) psi = chebyshev_filter(hw, bounds, psi, *o.delta, o.jackson_degree);

  // Edge mass in position (outer 5%) and momentum (outer 5% of the band).
  const double k_nyq = kPi / g.h;
  std::vector<int> x_edge;
  for (int j = 0; j < g.n; ++j)
    if (std::fabs(g.x(j)) > 0.95 * g.L) x_edge.push_back(j);
  auto edge_mass = [&](const Eigen::VectorXcd& v) {
    double s = 0.0;
    for (int j : x_edge) s += std::norm(v(j));
    Eigen::VectorXcd f = v;
    fft::dft(f, -1);
    double tot = 0.0, hi = 0.0;
    for (int j = 0; j < g.n; ++j) {
      tot += std::norm(f(j));
      if (std::fabs(g.wavenumber(j)) > 0.95 * k_nyq) hi += std::norm(f(j));
    }
    return s * g.h + (tot > 0.0 ? hi / tot : 0.0) * v.squaredNorm() * g.h;
  };
  const double scale = std::max(0.5 * (g.L * g.L + k_nyq * k_nyq), 1.0);
  const ChebyshevPropagator prop(hw, bounds, dt, 1e-12);
  auto traces = make_traces(qs, Representation::kWeyl, model, o, n_steps + 1);
  double worst_edge = 0.0, worst_lanczos = 0.0;
  std::vector<std::function<double(double)>> powers;
  for (double q : qs) powers.push_back([q](double x) { return std::pow(std::max(x, 0.0), 0.5 * q); });
  for (int step = 0; step <= n_steps; ++step) {
    if (step > 0) psi = prop.step(psi);
    const double edge = edge_mass(psi);
    worst_edge = std::max(worst_edge, edge);
    std::vector<double> errs;
    const auto vals = lanczos_expectations(ham, psi * std::sqrt(g.h), powers, o.lanczos_steps, &errs);
    for (std::size_t a = 0; a < qs.size(); ++a) {
      worst_lanczos = std::max(worst_lanczos, errs[a]);
      traces[a].t[step] = step * dt;
      traces[a].m[step] = vals[a];
      traces[a].error_bound[step] = 3.0 * std::sqrt(edge) * std::pow(scale, 0.5 * qs[a]) + errs[a];
    }
  }
  stamp(traces, {{"theta", fmt(theta)},
                 {"dt", fmt(dt)},
                 {"grid_p", std::to_string(g.p)},
                 {"grid_q", std::to_string(g.q)},
                 {"grid_K", std::to_string(g.K)},
                 {"grid_cells", std::to_string(g.n_cells)},
                 {"grid_n", std::to_string(g.n)},
                 {"grid_L", fmt(g.L)},
                 {"symmetry", o.symmetry},
                 {"lanczos_steps", std::to_string(o.lanczos_steps)},
                 {"max_edge_mass", fmt(worst_edge)},
                 {"max_lanczos_change", fmt(worst_lanczos)},
                 {"filter", o.delta ? "chebyshev-jackson" : "none"},
                 {"jackson_degree", std::to_string(o.jackson_degree)}});
  return traces;
}

double moment_weyl(const FourierElement& h, const std::string& symmetry, double q, double t,
                   std::optional<Interval> delta) {
  TransportOptions o;
  o.t_end = std::max(std::fabs(t), 1e-9);
  o.dt = std::min(resolve_dt(h, o), o.t_end);
  o.dt = o.t_end / std::ceil(o.t_end / o.dt);
  o.symmetry = symmetry;
  o.delta = delta;
  const auto tr = transport_weyl(h, {q}, o).front();
  return t == 0.0 ? tr.m.front() : tr.m.back();
}

// ---------------------------------------------------------------------------

double max_average_time(double t_end, AverageMode mode) { return mode == AverageMode::kCesaro ? t_end : t_end / 6.0; }

double time_average(const std::vector<double>& t, const std::vector<double>& f, double T, AverageMode mode,
                    double h_norm) {
  if (t.size() != f.size() || t.size() < 2) throw DomainError("time_average: need >= 2 samples");
  if (t.front() != 0.0) throw DomainError("time_average: samples must start at t = 0");
  if (!(T > 0.0)) throw DomainError("time_average: T must be positive");
  double dt_max = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw DomainError("time_average: times must increase");
    dt_max = std::max(dt_max, t[i] - t[i - 1]);
  }
  if (h_norm > 0.0 && dt_max * h_norm > 0.5 + 1e-12)
    throw DomainError("time_average: grid too coarse (dt ||H||_1 > 0.5)");
  if (max_average_time(t.back(), mode) < T * (1.0 - 1e-12))
    throw DomainError("time_average: samples do not cover the averaging window");
  if (mode == AverageMode::kCesaro) {
    double s = 0.0;
    for (std::size_t i = 1; i < t.size() && t[i - 1] < T; ++i) {
      const double b = std::min(t[i], T);
      const double fb = t[i] <= T ? f[i] : f[i - 1] + (f[i] - f[i - 1]) * (T - t[i - 1]) / (t[i] - t[i - 1]);
      s += 0.5 * (f[i - 1] + fb) * (b - t[i - 1]);
    }
    return s / T;
  }
  const double norm = 1.0 / (T * std::sqrt(kPi));
  auto w = [&](double x) { return std::exp(-x * x / (4.0 * T * T)); };
  double s = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (f[i - 1] * w(t[i - 1]) + f[i] * w(t[i])) * (t[i] - t[i - 1]);
  return s * norm;
}

BetaEstimate beta_estimate(const TransportTrace& trace, AverageMode mode, std::vector<double> t_grid) {
  const double t_hi = max_average_time(trace.controlled_until(), mode);
  if (t_grid.empty()) {
    if (t_hi < 2.0) throw RefusedError("beta_estimate: controlled time range too short");
    t_grid = spectral::geometric_grid(2.0, t_hi, std::pow(2.0, 0.25));
  }
  for (double T : t_grid)
    if (T > t_hi * (1.0 + 1e-12)) throw RefusedError("beta_estimate: T beyond the leakage-controlled range");
  if (t_grid.size() < 12) throw RefusedError("beta_estimate: need >= 12 T values");
  const double span = std::log10(t_grid.back() / t_grid.front());
  if (span < 1.5 - 1e-9) throw RefusedError("beta_estimate: T values must span >= 1.5 decades");
  BetaEstimate b;
  b.q = trace.q;
  b.mode = mode;
  for (double T : t_grid) b.averages.push_back(time_average(trace.t, trace.m, T, mode));
  if (*std::max_element(b.averages.begin(), b.averages.end()) <= 0.0) {
    // No spreading at all: bounded moments, zero exponent.
    b.fit.log_t.clear();
    for (double T : t_grid) b.fit.log_t.push_back(std::log(T));
    b.fit.t_min = t_grid.front();
    b.fit.t_max = t_grid.back();
    return b;
  }
  b.fit = spectral::fit_scaling(t_grid, b.averages);
  const double inv = 1.0 / trace.q;
  b.beta_raw = b.fit.slope * inv;
  b.beta_plus_raw = b.fit.limsup * inv;
  b.beta_minus_raw = b.fit.liminf * inv;
  b.beta = std::clamp(b.beta_raw, 0.0, 1.0);
  b.beta_plus = std::clamp(b.beta_plus_raw, 0.0, 1.0);
  b.beta_minus = std::clamp(b.beta_minus_raw, 0.0, 1.0);
  double mx = 0.0;
  for (double x : b.fit.log_t) mx += x;
  mx /= b.fit.log_t.size();
  double sxx = 0.0;
  for (double x : b.fit.log_t) sxx += (x - mx) * (x - mx);
  const double dof = std::max<double>(1.0, b.fit.log_t.size() - 2.0);
  b.slope_error = b.fit.residual_rms * std::sqrt(b.fit.log_t.size() / dof) / std::sqrt(sxx) * inv;
  return b;
}

// ---------------------------------------------------------------------------

BoundReport verify_main_bound(const FourierElement& h, const std::vector<double>& qs, const BoundOptions& options,
                              const std::string& model) {
  for (double q : qs)
    if (!(q > 0.0 && q < 1.0)) throw DomainError("verify_main_bound: q must lie in (0, 1)");
  BoundReport r;
  r.model = model;
  r.theta = h.theta();
  auto traces = transport_1d(h, qs, options.transport, model);
  const auto mu = spectral::dos_estimate_bloch(h, options.dos_n_omega, options.dos_n_k);
  std::vector<double> dq;
  for (double q : qs) dq.push_back(1.0 - q);
  const double reach = h.l1_norm() + 0.1;
  const Interval all{-reach, reach};
  const auto dims = spectral::multifractal_dimensions(
      mu, all, dq, spectral::geometric_grid(options.dos_t_min, options.dos_t_max, std::pow(2.0, 0.25)));
  for (std::size_t i = 0; i < qs.size(); ++i) {
    BoundEntry e;
    e.q = qs[i];
    e.beta = beta_estimate(traces[i], AverageMode::kCesaro);
    try {
      e.beta_gaussian = beta_estimate(traces[i], AverageMode::kGaussian);
    } catch (const RefusedError&) {
      e.beta_gaussian = e.beta;
    }
    e.dimension = dims[i];
    e.margin = e.beta.beta_minus - e.dimension.d_plus;
    e.margin_mid = e.beta.beta - e.dimension.d_mid;
    const double sb = std::hypot(e.beta.slope_error, 0.5 * (e.beta.beta_plus - e.beta.beta_minus));
    const double sd = 0.5 * (e.dimension.d_plus - e.dimension.d_minus);
    e.uncertainty = std::hypot(std::hypot(sb, sd), std::fabs(e.beta.beta - e.beta_gaussian.beta));
    e.pass = e.margin >= -e.uncertainty;
    r.entries.push_back(std::move(e));
  }
  r.metadata = traces.front().metadata;
  r.metadata["dos"] = "bloch";
  r.metadata["dos_n_omega"] = std::to_string(options.dos_n_omega);
  r.metadata["dos_n_k"] = std::to_string(options.dos_n_k);
  return r;
}

std::string BoundReport::to_json() const {
  nlohmann::json j;
  j["model"] = model;
  j["theta"] = theta;
  j["metadata"] = metadata;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json x;
    x["q"] = e.q;
    x["beta"] = e.beta.beta;
    x["beta_plus"] = e.beta.beta_plus;
    x["beta_minus"] = e.beta.beta_minus;
    x["beta_raw"] = e.beta.beta_raw;
    x["beta_gaussian"] = e.beta_gaussian.beta;
    x["d"] = e.dimension.d_mid;
    x["d_plus"] = e.dimension.d_plus;
    x["d_minus"] = e.dimension.d_minus;
    x["margin"] = e.margin;
    x["margin_mid"] = e.margin_mid;
    x["uncertainty"] = e.uncertainty;
    x["verdict"] = e.pass ? "PASS" : "FLAG";
    j["entries"].push_back(x);
  }
  return j.dump(2);
}

}  // namespace harperlab::dynamics
