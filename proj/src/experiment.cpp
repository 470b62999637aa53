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

#include "harperlab/experiment.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "harperlab/diophantine.hpp"
#include "harperlab/dynamics.hpp"
#include "harperlab/error.hpp"
#include "harperlab/frames.hpp"
#include "harperlab/lattice_sums.hpp"
#include "harperlab/rotation_algebra.hpp"
#include "harperlab/spectral.hpp"
#include "harperlab/weyl_phase_space.hpp"

namespace harperlab::experiment {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class Type { kInt, kReal, kString, kList };

struct Field {
  const char* name;
  Type type;
  const char* fallback;
  const char* help;
  std::function<void(const std::string&)> check;  // throws std::string on a bad value
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void one_of(const std::string& v, std::initializer_list<const char*> options) {
  std::string all;
  for (const char* o : options) {
    if (v == o) return;
    all += all.empty() ? o : std::string("|") + o;
  }
  throw std::string("expected one of " + all);
}

std::function<void(const std::string&)> int_min(long long lo) {
  return [lo](const std::string& v) {
    if (std::stoll(v) < lo) throw std::string("must be >= " + std::to_string(lo));
  };
}

std::function<void(const std::string&)> positive() {
  return [](const std::string& v) {
    if (!(std::stod(v) > 0.0)) throw std::string("must be positive");
  };
}

std::function<void(const std::string&)> non_negative() {
  return [](const std::string& v) {
    if (!(std::stod(v) >= 0.0)) throw std::string("must be >= 0");
  };
}

const std::vector<Field>& schema() {
  static const std::vector<Field> fields = {
      {"model", Type::kString, "harper4", "harper4|triangular6|free_chain|cosine_potential",
       [](const std::string& v) { one_of(v, {"harper4", "triangular6", "free_chain", "cosine_potential"}); }},
      {"alpha", Type::kString, "golden", "golden|sqrt2|sqrt3|e|custom:<cf-file>|<real in (0,1)>",
       [](const std::string& v) {
         if (v.rfind("custom:", 0) == 0) {
           if (v.size() == 7) throw std::string("custom: needs a file path");
           return;
         }
         if (v == "golden" || v == "sqrt2" || v == "sqrt3" || v == "e" || v == "silver") return;
         std::size_t used = 0;
         double x = 0.0;
         try {
           x = std::stod(v, &used);
         } catch (...) {
           throw std::string("expected a named angle, custom:<file> or a real in (0,1)");
         }
         if (used != v.size() || !(x > 0.0 && x < 1.0)) throw std::string("a real alpha must lie in (0,1)");
       }},
      {"depth", Type::kInt, "0", "active convergent depth of alpha; 0 keeps alpha itself", int_min(0)},
      {"offset", Type::kInt, "0", "theta = 2 pi (alpha + offset)", int_min(0)},
      {"n", Type::kInt, "2000", "chain sites per phase (window DOS)", int_min(8)},
      {"n_omega", Type::kInt, "64", "phase quadrature points", int_min(1)},
      {"n_k", Type::kInt, "8", "Bloch momenta per band (bloch DOS)", int_min(1)},
      {"dos_method", Type::kString, "window", "window|bloch",
       [](const std::string& v) { one_of(v, {"window", "bloch"}); }},
      {"t_min", Type::kReal, "8", "smallest time scale T", positive()},
      {"t_max", Type::kReal, "4096", "largest time scale T", positive()},
      {"t_ratio", Type::kReal, "1.189207115002721", "geometric ratio of the T grid",
       [](const std::string& v) {
         if (!(std::stod(v) > 1.0)) throw std::string("must exceed 1");
       }},
      {"t_end", Type::kReal, "64", "transport evolution horizon", positive()},
      {"dt", Type::kReal, "0", "transport sampling step; 0 picks min(0.125, 0.5/||H||_1)", non_negative()},
      {"q", Type::kList, "0.25,0.5,0.75", "comma-separated q values", {}},
      {"window", Type::kString, "all", "energy window: all or lo:hi",
       [](const std::string& v) {
         if (v == "all") return;
         const auto c = v.find(':');
         if (c == std::string::npos) throw std::string("expected all or lo:hi");
         double lo = 0.0, hi = 0.0;
         try {
           lo = std::stod(v.substr(0, c));
           hi = std::stod(v.substr(c + 1));
         } catch (...) {
           throw std::string("expected all or lo:hi");
         }
         if (!(lo < hi)) throw std::string("window needs lo < hi");
       }},
      {"bins", Type::kInt, "64", "energy bins for histograms and the sandwich check", int_min(1)},
      {"rep", Type::kString, "1d", "1d|2d|weyl", [](const std::string& v) { one_of(v, {"1d", "2d", "weyl"}); }},
      {"average", Type::kString, "cesaro", "cesaro|gaussian",
       [](const std::string& v) { one_of(v, {"cesaro", "gaussian"}); }},
      {"half_width", Type::kInt, "0", "1D/2D window half width; 0 picks the light cone", int_min(0)},
      {"symmetry", Type::kString, "S4", "S3|S4|S6", [](const std::string& v) { one_of(v, {"S3", "S4", "S6"}); }},
      {"grid_k", Type::kInt, "0", "phase-space points per sqrt(theta); 0 automatic", int_min(0)},
      {"grid_cells", Type::kInt, "0", "phase-space grid cells; 0 automatic", int_min(0)},
      {"terms", Type::kInt, "12", "continued-fraction terms", int_min(1)},
      {"epsilon", Type::kReal, "0.1", "Roth diagnostic exponent", positive()},
      {"vector", Type::kString, "gauss-S4", "tracial|gauss-S4|gauss-S3|gauss-S6",
       [](const std::string& v) { one_of(v, {"tracial", "gauss-S4", "gauss-S3", "gauss-S6"}); }},
      {"cutoff", Type::kInt, "8", "frame-operator Fourier cutoff", int_min(1)},
      {"l_max", Type::kInt, "4", "tracial-defect lattice radius", int_min(1)},
      {"frame_sites", Type::kInt, "100", "chain sites for frame bounds", int_min(8)},
      {"frame_omega", Type::kInt, "8", "phases for frame bounds", int_min(1)},
      {"scan", Type::kString, "delta", "delta|t", [](const std::string& v) { one_of(v, {"delta", "t"}); }},
      {"a", Type::kReal, "1", "Gaussian lattice-sum scale", positive()},
      {"cell", Type::kInt, "8", "cell grid resolution per axis", int_min(8)},
      {"scan_min", Type::kReal, "0", "smallest scan parameter; 0 picks 1e-4 (delta) or 1e-3 (t)", non_negative()},
      {"scan_max", Type::kReal, "0", "largest scan parameter; 0 picks 1e-1 (delta) or 1 (t)", non_negative()},
      {"scan_ratio", Type::kReal, "1.7782794100389228", "geometric ratio of the scan grid",
       [](const std::string& v) {
         if (!(std::stod(v) > 1.0)) throw std::string("must exceed 1");
       }},
      {"n_max", Type::kInt, "40", "theta-series truncation", int_min(20)},
      {"hermite_terms", Type::kInt, "200", "Hermite eigensum terms for the oscillator check", int_min(1)},
      {"seed", Type::kInt, "1", "seed for sampled grids", int_min(0)},
      {"output_dir", Type::kString, "", "artifact directory; empty keeps artifacts in memory", {}},
      {"cache_dir", Type::kString, "", "cache root; empty falls back to HARPERLAB_CACHE", {}},
  };
  return fields;
}

const Field& field(const std::string& key) {
  for (const auto& f : schema())
    if (key == f.name) return f;
  throw ConfigError("unknown field '" + key + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string canonical(const Field& f, const std::string& raw) {
  const std::string v = trim(raw);
  try {
    switch (f.type) {
      case Type::kInt: {
        std::size_t used = 0;
        const long long x = std::stoll(v, &used);
        if (used != v.size()) throw std::string("expected an integer");
        return std::to_string(x);
      }
      case Type::kReal: {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size() || !std::isfinite(x)) throw std::string("expected a finite real");
        return fmt(x);
      }
      case Type::kList: {
        std::string out;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
          item = trim(item);
          std::size_t used = 0;
          const double x = std::stod(item, &used);
          if (used != item.size() || !std::isfinite(x)) throw std::string("expected comma-separated reals");
          out += (out.empty() ? "" : ",") + fmt(x);
        }
        if (out.empty()) throw std::string("expected at least one value");
        return out;
      }
      case Type::kString:
        return v;
    }
  } catch (const std::string&) {
    throw;
  } catch (const std::exception&) {
    throw std::string(f.type == Type::kInt ? "expected an integer" : "expected a real");
  }
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------

ExperimentConfig::ExperimentConfig() {
  for (const auto& f : schema()) values_[f.name] = canonical(f, f.fallback);
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const Field& f = field(key);
  try {
    const std::string v = canonical(f, value);
    if (f.check) f.check(v);
    values_[key] = v;
  } catch (const std::string& why) {
    throw ConfigError("field '" + key + "': " + why + " (got '" + trim(value) + "')");
  }
}

const std::string& ExperimentConfig::get(const std::string& key) const {
  field(key);
  return values_.at(key);
}

long long ExperimentConfig::get_int(const std::string& key) const { return std::stoll(get(key)); }
double ExperimentConfig::get_real(const std::string& key) const { return std::stod(get(key)); }

std::vector<double> ExperimentConfig::get_list(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  std::vector<std::string> seen;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      throw ConfigError("line " + std::to_string(lineno) + ": field '" + key + "' set twice");
    seen.push_back(key);
    try {
      c.set(key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) { return parse(read_file(path)); }

std::string ExperimentConfig::serialize() const {
  std::string out;
  for (const auto& f : schema()) out += std::string(f.name) + " = " + values_.at(f.name) + "\n";
  return out;
}

std::uint64_t ExperimentConfig::hash() const {
  std::string text;
  for (const auto& f : schema()) {
    if (std::strcmp(f.name, "output_dir") == 0 || std::strcmp(f.name, "cache_dir") == 0) continue;
    text += std::string(f.name) + "=" + values_.at(f.name) + "\n";
  }
  const std::string& alpha = values_.at("alpha");
  if (alpha.rfind("custom:", 0) == 0) {
    try {
      text += read_file(alpha.substr(7));
    } catch (const IoError&) {
      text += "<unreadable>";
    }
  }
  return fnv1a(text);
}

std::string ExperimentConfig::hash_hex() const { return hex(hash()); }

std::vector<std::string> ExperimentConfig::keys() {
  std::vector<std::string> k;
  for (const auto& f : schema()) k.push_back(f.name);
  return k;
}

std::string ExperimentConfig::describe(const std::string& key) { return field(key).help; }

// ---------------------------------------------------------------------------

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("short write to '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename onto '" + path + "'");
  }
}

std::string cache_root(const ExperimentConfig& config) {
  if (!config.get("cache_dir").empty()) return config.get("cache_dir");
  const char* env = std::getenv("HARPERLAB_CACHE");
  return env ? env : "";
}

// ---------------------------------------------------------------------------

namespace {

struct Context {
  const ExperimentConfig& c;
  RunResult& r;
  std::string hash;

  void log(const std::string& s) { r.log.push_back(s); }
  void emit(const std::string& name, const std::string& content) { r.artifacts.push_back({name, content}); }
  std::string csv_header() const { return "# config_hash=" + hash + "\n"; }
};

double base_alpha(const ExperimentConfig& c) {
  const std::string& a = c.get("alpha");
  if (a.rfind("custom:", 0) == 0) {
    std::stringstream ss(read_file(a.substr(7)));
    std::vector<std::int64_t> pq;
    std::string tok;
    while (ss >> tok) {
      std::replace(tok.begin(), tok.end(), ',', ' ');
      std::stringstream inner(tok);
      long long v = 0;
      while (inner >> v) pq.push_back(v);
    }
    try {
      return diophantine::from_partial_quotients(pq);
    } catch (const DomainError& e) {
      throw ConfigError("field 'alpha': " + std::string(e.what()));
    }
  }
  if (a == "golden" || a == "sqrt2" || a == "sqrt3" || a == "e" || a == "silver") return diophantine::named_alpha(a);
  return std::stod(a);
}

struct Angle {
  double alpha = 0.0;  // in (0,1), convergent when depth > 0
  std::int64_t p = 0;  // theta = 2 pi p / q when rational
  std::int64_t q = 0;
  double theta = 0.0;
};

Angle angle(const ExperimentConfig& c, bool need_rational, const char* why) {
  Angle a;
  const double alpha = base_alpha(c);
  const long long depth = c.get_int("depth");
  const long long offset = c.get_int("offset");
  if (depth > 0) {
    const auto cf = diophantine::continued_fraction(alpha, static_cast<int>(depth));
    if (static_cast<long long>(cf.convergents.size()) < depth)
      throw ConfigError("field 'depth': alpha has only " + std::to_string(cf.convergents.size()) +
                        " resolvable convergents");
    const auto& cv = cf.convergents[depth - 1];
    a.q = cv.q;
    a.p = cv.p + offset * cv.q;
    a.alpha = static_cast<double>(cv.p) / cv.q;
    a.theta = kTwoPi * static_cast<double>(a.p) / a.q;
  } else {
    if (need_rational) throw ConfigError(std::string("field 'depth': must be > 0 for ") + why);
    a.alpha = alpha;
    a.theta = kTwoPi * (alpha + offset);
  }
  return a;
}

std::optional<spectral::Interval> window(const ExperimentConfig& c) {
  const std::string& w = c.get("window");
  if (w == "all") return std::nullopt;
  const auto colon = w.find(':');
  return spectral::Interval{std::stod(w.substr(0, colon)), std::stod(w.substr(colon + 1))};
}

std::vector<double> t_grid(const ExperimentConfig& c) {
  if (!(c.get_real("t_min") < c.get_real("t_max"))) throw ConfigError("field 't_max': must exceed t_min");
  return spectral::geometric_grid(c.get_real("t_min"), c.get_real("t_max"), c.get_real("t_ratio"));
}

// Binary DOS cache: magic, atom count, (e, w) pairs, FNV-1a of the payload.
constexpr char kMagic[8] = {'H', 'L', 'D', 'O', 'S', '0', '0', '1'};

std::optional<spectral::EmpiricalMeasure> load_dos(const std::string& path, Context& ctx) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  const std::string bytes = os.str();
  const std::size_t head = sizeof kMagic + sizeof(std::uint64_t);
  bool ok = bytes.size() >= head + sizeof(std::uint64_t) && std::memcmp(bytes.data(), kMagic, sizeof kMagic) == 0;
  std::uint64_t count = 0;
  if (ok) {
    std::memcpy(&count, bytes.data() + sizeof kMagic, sizeof count);
    ok = bytes.size() == head + count * 2 * sizeof(double) + sizeof(std::uint64_t);
  }
  if (ok) {
    std::uint64_t stored = 0;
    std::memcpy(&stored, bytes.data() + bytes.size() - sizeof stored, sizeof stored);
    ok = stored == fnv1a(bytes.substr(0, bytes.size() - sizeof stored));
  }
  if (!ok) {
    ctx.log("cache: corrupted entry " + path + ", recomputing");
    return std::nullopt;
  }
  std::vector<spectral::Atom> atoms(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::memcpy(&atoms[i].e, bytes.data() + head + 16 * i, 8);
    std::memcpy(&atoms[i].w, bytes.data() + head + 16 * i + 8, 8);
  }
  ctx.log("cache: hit " + path);
  return spectral::EmpiricalMeasure(std::move(atoms));
}

void store_dos(const std::string& path, const spectral::EmpiricalMeasure& mu) {
  std::string bytes(kMagic, sizeof kMagic);
  const std::uint64_t count = mu.size();
  bytes.append(reinterpret_cast<const char*>(&count), sizeof count);
  for (const auto& a : mu.atoms()) {
    bytes.append(reinterpret_cast<const char*>(&a.e), 8);
    bytes.append(reinterpret_cast<const char*>(&a.w), 8);
  }
  const std::uint64_t sum = fnv1a(bytes);
  bytes.append(reinterpret_cast<const char*>(&sum), sizeof sum);
  write_atomic(path, bytes);
}

spectral::EmpiricalMeasure dos(Context& ctx, const FourierElement& h, const Angle& a) {
  const auto& c = ctx.c;
  const bool bloch = c.get("dos_method") == "bloch";
  const std::string key = "dos|" + c.get("model") + "|" + fmt(a.theta) + "|" + c.get("dos_method") + "|" +
                          (bloch ? c.get("n_k") : c.get("n")) + "|" + c.get("n_omega");
  const std::string root = cache_root(c);
  std::string path;
  if (!root.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(root, ec);
    path = root + "/dos-" + hex(fnv1a(key)) + ".bin";
    if (auto cached = load_dos(path, ctx)) return *cached;
  }
  auto mu = bloch ? spectral::dos_estimate_bloch(h, static_cast<int>(c.get_int("n_omega")), static_cast<int>(c.get_int("n_k")))
                  : spectral::dos_estimate(h, static_cast<int>(c.get_int("n")), static_cast<int>(c.get_int("n_omega")));
  if (!path.empty()) {
    store_dos(path, mu);
    ctx.log("cache: stored " + path);
  }
  return mu;
}

nlohmann::ordered_json stamp(const Context& ctx, const std::string& command) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config_hash"] = ctx.hash;
  return j;
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

void cmd_cf(Context& ctx) {
  const double alpha = base_alpha(ctx.c);
  const auto cf = diophantine::continued_fraction(alpha, static_cast<int>(ctx.c.get_int("terms")));
  const auto roth = diophantine::roth_diagnostic(cf, ctx.c.get_real("epsilon"));
  std::string out = ctx.csv_header() + "k,a_k,p_k,q_k,abs_error,roth_partial_sum\n";
  for (std::size_t k = 0; k < cf.size(); ++k) {
    const auto& cv = cf.convergents[k];
    const double err = std::fabs(static_cast<double>(static_cast<long double>(alpha) -
                                                     static_cast<long double>(cv.p) / cv.q));
    out += std::to_string(k + 1) + "," + std::to_string(cf.partial_quotients[k]) + "," + std::to_string(cv.p) + "," +
           std::to_string(cv.q) + "," + fmt(err) + "," + (k < roth.size() ? fmt(roth[k]) : std::string("")) + "\n";
  }
  if (cf.terminated) ctx.log("cf: expansion reached the precision floor after " + std::to_string(cf.size()) + " terms");
  if (cf.overflow) ctx.log("cf: denominators overflow 64 bits after " + std::to_string(cf.size()) + " terms");
  ctx.emit("cf.csv", out);
}

void cmd_dos(Context& ctx) {
  const auto a = angle(ctx.c, ctx.c.get("dos_method") == "bloch", "dos_method = bloch");
  const auto h = hamiltonian_preset(ctx.c.get("model"), a.theta).element;
  const auto mu = dos(ctx, h, a);
  std::string csv = ctx.csv_header() + "e,w\n";
  for (const auto& at : mu.atoms()) csv += fmt(at.e) + "," + fmt(at.w) + "\n";
  auto j = stamp(ctx, "dos");
  j["theta"] = a.theta;
  j["p"] = a.p;
  j["q"] = a.q;
  j["atoms"] = mu.size();
  j["mass"] = mu.total_mass();
  j["mean"] = mu.moment(1);
  j["second_moment"] = mu.moment(2);
  j["min_energy"] = mu.min_energy();
  j["max_energy"] = mu.max_energy();
  ctx.emit("dos.json", dump(j));
  ctx.emit("dos.csv", csv);
}

void cmd_dims(Context& ctx) {
  const auto a = angle(ctx.c, ctx.c.get("dos_method") == "bloch", "dos_method = bloch");
  const auto h = hamiltonian_preset(ctx.c.get("model"), a.theta).element;
  const auto mu = dos(ctx, h, a);
  const double reach = h.l1_norm() + 0.1;
  const auto delta = window(ctx.c).value_or(spectral::Interval{-reach, reach});
  const auto est = spectral::multifractal_dimensions(mu, delta, ctx.c.get_list("q"), t_grid(ctx.c));
  std::string out = ctx.csv_header() + "q,D,D_minus,D_plus,D_raw,T_cap,capped,atoms_in_window\n";
  for (const auto& e : est) {
    out += fmt(e.q) + "," + fmt(e.d_mid) + "," + fmt(e.d_minus) + "," + fmt(e.d_plus) + "," + fmt(e.d_mid_raw) + "," +
           fmt(e.t_cap) + "," + (e.capped ? "1" : "0") + "," + std::to_string(e.atoms_in_delta) + "\n";
  }
  ctx.emit("dims.csv", out);
}

dynamics::TransportOptions transport_options(const ExperimentConfig& c) {
  dynamics::TransportOptions o;
  o.t_end = c.get_real("t_end");
  o.dt = c.get_real("dt");
  o.half_width = static_cast<int>(c.get_int("half_width"));
  o.n_omega = static_cast<int>(c.get_int("n_omega"));
  o.delta = window(c);
  o.symmetry = c.get("symmetry");
  o.grid_k = static_cast<int>(c.get_int("grid_k"));
  o.grid_cells = static_cast<int>(c.get_int("grid_cells"));
  return o;
}

void cmd_transport(Context& ctx) {
  const std::string rep = ctx.c.get("rep");
  const auto a = angle(ctx.c, rep == "weyl", "rep = weyl");
  const std::string model = ctx.c.get("model");
  const auto h = hamiltonian_preset(model, a.theta).element;
  const auto qs = ctx.c.get_list("q");
  const auto o = transport_options(ctx.c);
  const auto traces = rep == "1d"   ? dynamics::transport_1d(h, qs, o, model)
                      : rep == "2d" ? dynamics::transport_2d(h, qs, o, model)
                                    : dynamics::transport_weyl(h, qs, o, model);
  const auto mode = ctx.c.get("average") == "gaussian" ? dynamics::AverageMode::kGaussian : dynamics::AverageMode::kCesaro;
  std::string csv = ctx.csv_header() + "rep,q,t,M,error_bound\n";
  std::string beta = ctx.csv_header() + "rep,q,average,beta,beta_minus,beta_plus,slope_error,controlled_until\n";
  for (const auto& tr : traces) {
    for (std::size_t i = 0; i < tr.t.size(); ++i)
      csv += rep + "," + fmt(tr.q) + "," + fmt(tr.t[i]) + "," + fmt(tr.m[i]) + "," + fmt(tr.error_bound[i]) + "\n";
    try {
      const auto b = dynamics::beta_estimate(tr, mode);
      beta += rep + "," + fmt(tr.q) + "," + dynamics::to_string(mode) + "," + fmt(b.beta) + "," + fmt(b.beta_minus) +
              "," + fmt(b.beta_plus) + "," + fmt(b.slope_error) + "," + fmt(tr.controlled_until()) + "\n";
    } catch (const Error& e) {
      ctx.log("transport: no beta for q=" + fmt(tr.q) + ": " + e.what());
    }
  }
  ctx.emit("beta.csv", beta);
  ctx.emit("transport.csv", csv);
}

void cmd_bound(Context& ctx) {
  const auto a = angle(ctx.c, true, "bound");
  const std::string model = ctx.c.get("model");
  const auto h = hamiltonian_preset(model, a.theta).element;
  dynamics::BoundOptions o;
  o.transport = transport_options(ctx.c);
  o.dos_n_omega = static_cast<int>(ctx.c.get_int("n_omega"));
  o.dos_n_k = static_cast<int>(ctx.c.get_int("n_k"));
  o.dos_t_min = ctx.c.get_real("t_min");
  o.dos_t_max = ctx.c.get_real("t_max");
  const auto report = dynamics::verify_main_bound(h, ctx.c.get_list("q"), o, model);
  auto j = stamp(ctx, "bound");
  j["report"] = nlohmann::ordered_json::parse(report.to_json());
  ctx.emit("bound.json", dump(j));
}

void cmd_frame(Context& ctx) {
  const auto a = angle(ctx.c, true, "frame");
  const long long k_set = ctx.c.get_int("grid_k");
  const int K = static_cast<int>(k_set > 0 ? k_set : a.p * std::max<std::int64_t>(1, (64 + a.p - 1) / a.p));
  const long long cells = ctx.c.get_int("grid_cells");
  const auto g = weyl::Grid::lattice(a.p, a.q, K, static_cast<int>(cells > 0 ? cells : 2), a.theta);
  const auto report = frames::frame_report(ctx.c.get("vector"), g, static_cast<int>(ctx.c.get_int("cutoff")),
                                           static_cast<int>(ctx.c.get_int("l_max")),
                                           static_cast<int>(ctx.c.get_int("frame_sites")),
                                           static_cast<int>(ctx.c.get_int("frame_omega")));
  auto j = stamp(ctx, "frame");
  j["report"] = nlohmann::ordered_json::parse(report.to_json());
  ctx.emit("frame.json", dump(j));
}

void cmd_theta_zeros(Context& ctx) {
  const auto r = frames::theta_zero_certificate(static_cast<int>(ctx.c.get_int("n_max")));
  auto j = stamp(ctx, "theta-zeros");
  j["n_max"] = r.n_max;
  j["winding"] = r.winding;
  j["winding_integral"] = r.winding_integral;
  j["zero_residual"] = r.zero_residual;
  j["f_at_zero"] = r.f_at_zero;
  j["periodicity_error"] = r.periodicity_error;
  j["quasi_periodicity_error"] = r.quasi_periodicity_error;
  j["contour_min_abs"] = r.contour_min_abs;
  j["contour_refined"] = r.contour_refined;
  j["c1"] = r.c1;
  j["lower_bound_exponent"] = r.lower_bound_exponent;
  j["passed"] = r.passed;
  ctx.emit("theta_zeros.json", dump(j));
}

void cmd_lattice_sum(Context& ctx) {
  const auto& c = ctx.c;
  const bool t_scan = c.get("scan") == "t";
  const double lo = c.get_real("scan_min") > 0 ? c.get_real("scan_min") : (t_scan ? 1e-3 : 1e-4);
  const double hi = c.get_real("scan_max") > 0 ? c.get_real("scan_max") : (t_scan ? 1.0 : 1e-1);
  const auto grid = spectral::geometric_grid(lo, hi, c.get_real("scan_ratio"));
  const int n = static_cast<int>(c.get_int("cell"));
  lattice_sums::LatticeSumScan scan;
  if (t_scan) {
    const auto a = angle(c, false, "");
    scan = lattice_sums::mehler_scan(symmetry::by_name(c.get("symmetry")), c.get("symmetry"), a.theta, grid, n);
  } else {
    scan = lattice_sums::lattice_sum_scan(angle(c, false, "").alpha, c.get_real("a"), grid, n);
  }
  ctx.emit("lattice_sum.csv", ctx.csv_header() + scan.to_csv());
}

void cmd_oscillator(Context& ctx) {
  const auto osc = weyl::build_oscillator(symmetry::by_name(ctx.c.get("symmetry")));
  auto j = stamp(ctx, "oscillator");
  j["symmetry"] = ctx.c.get("symmetry");
  j["oscillator"] = nlohmann::ordered_json::parse(osc.to_json());
  if (ctx.c.get("symmetry") == "S4") {
    // Mehler kernel against the Hermite eigensum on a coarse grid, t = 0.1 .. 1.
    const int terms = static_cast<int>(ctx.c.get_int("hermite_terms"));
    double worst = 0.0;
    for (double t : {0.1, 0.3, 1.0}) {
      for (double x = -4.0; x <= 4.0; x += 0.5) {
        const auto hx = weyl::hermite_functions(terms, x);
        for (double y = -4.0; y <= 4.0; y += 0.5) {
          const auto hy = weyl::hermite_functions(terms, y);
          double s = 0.0;
          for (int k = 0; k < terms; ++k) s += std::exp(-osc.mu * t * (k + 0.5)) * hx[k] * hy[k];
          worst = std::max(worst, std::abs(weyl::mehler_kernel(osc, t, x, y) - s));
        }
      }
    }
    j["mehler_vs_hermite_sup_error"] = worst;
    j["hermite_terms"] = terms;
  }
  ctx.emit("oscillator.json", dump(j));
}

const std::vector<std::pair<std::string, void (*)(Context&)>>& table() {
  static const std::vector<std::pair<std::string, void (*)(Context&)>> t = {
      {"cf", cmd_cf},       {"dos", cmd_dos},     {"dims", cmd_dims},
      {"transport", cmd_transport}, {"bound", cmd_bound}, {"frame", cmd_frame},
      {"theta-zeros", cmd_theta_zeros}, {"lattice-sum", cmd_lattice_sum}, {"oscillator", cmd_oscillator},
  };
  return t;
}

}  // namespace

std::vector<std::string> subcommands() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : table()) out.push_back(name);
  return out;
}

std::string subcommand_help(const std::string& s) {
  if (s == "cf") return "Continued fraction of alpha. Reads alpha, terms, epsilon.\ncf.csv: k,a_k,p_k,q_k,abs_error,roth_partial_sum";
  if (s == "dos")
    return "Density of states. Reads model, alpha, depth, offset, dos_method, n, n_omega, n_k.\n"
           "dos.json: mass, moments and support; dos.csv: e,w";
  if (s == "dims")
    return "Multifractal dimensions of the DOS. Reads the dos fields plus q, window, t_min, t_max, t_ratio.\n"
           "dims.csv: q,D,D_minus,D_plus,D_raw,T_cap,capped,atoms_in_window";
  if (s == "transport")
    return "Moments of the position operator. Reads model, alpha, depth, offset, rep, q, t_end, dt, half_width,\n"
           "n_omega, window, symmetry, grid_k, grid_cells, average.\n"
           "beta.csv: rep,q,average,beta,beta_minus,beta_plus,slope_error,controlled_until; transport.csv: rep,q,t,M,error_bound";
  if (s == "bound")
    return "Transport exponent against the DOS dimension at 1 - q. Reads the transport fields plus n_k, t_min, t_max.\n"
           "bound.json: per-q beta, D, margin, uncertainty and PASS/FLAG verdict";
  if (s == "frame")
    return "Frame data of a phase-space vector. Reads alpha, depth, offset, vector, cutoff, l_max, frame_sites,\n"
           "frame_omega, grid_k, grid_cells.\nframe.json: tracial defect and frame bounds";
  if (s == "theta-zeros") return "Zero certificate of the theta series. Reads n_max.\ntheta_zeros.json: winding, residuals";
  if (s == "lattice-sum")
    return "Sup over a cell grid of Gaussian (scan = delta) or Mehler (scan = t) lattice sums. Reads alpha, depth,\n"
           "offset, scan, a, cell, symmetry, scan_min, scan_max, scan_ratio.\n"
           "lattice_sum.csv: delta|t,sup,x0,y0,lipschitz_gap,fitted_exponent";
  if (s == "oscillator")
    return "Symmetry oscillator data. Reads symmetry, hermite_terms.\noscillator.json: M_S, mu, ground state and the "
           "Mehler/Hermite check (S4)";
  throw ConfigError("unknown subcommand '" + s + "'");
}

RunResult run(const std::string& subcommand, const ExperimentConfig& config) {
  RunResult r;
  void (*fn)(Context&) = nullptr;
  for (const auto& [name, f] : table())
    if (name == subcommand) fn = f;
  if (!fn) throw ConfigError("unknown subcommand '" + subcommand + "'");
  Context ctx{config, r, config.hash_hex()};
  fn(ctx);
  const std::string dir = config.get("output_dir");
  if (!dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir + "'");
    for (const auto& a : r.artifacts) write_atomic(dir + "/" + a.name, a.content);
    write_atomic(dir + "/config.txt", config.serialize());
  }
  return r;
}

}  // namespace harperlab::experiment
