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

#include "harperlab/harperlab.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "harperlab/diophantine.hpp"
#include "harperlab/error.hpp"
#include "harperlab/experiment.hpp"
#include "harperlab/frames.hpp"
#include "harperlab/lattice_sums.hpp"

struct hl_config {
  harperlab::experiment::ExperimentConfig config;
};

struct hl_result {
  harperlab::experiment::RunResult result;
};

namespace {

thread_local std::string last_error;

hl_status fail(hl_status s, const std::string& what) {
  last_error = what;
  return s;
}

template <class F>
hl_status guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return HL_OK;
  } catch (const harperlab::Error& e) {
    switch (e.kind()) {
      case harperlab::ErrorKind::kDomain: return fail(HL_ERR_DOMAIN, e.what());
      case harperlab::ErrorKind::kRefused: return fail(HL_ERR_REFUSED, e.what());
      case harperlab::ErrorKind::kNumerical: return fail(HL_ERR_NUMERICAL, e.what());
      case harperlab::ErrorKind::kIo: return fail(HL_ERR_IO, e.what());
      case harperlab::ErrorKind::kConfig: return fail(HL_ERR_CONFIG, e.what());
    }
    return fail(HL_ERR_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(HL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(HL_ERR_INTERNAL, "unknown error");
  }
}

hl_status copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf || cap < s.size() + 1) return fail(HL_ERR_INVALID_ARGUMENT, "buffer too small");
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return HL_OK;
}

const char* stash(const std::string& s) {
  thread_local std::string slot;
  slot = s;
  return slot.c_str();
}

}  // namespace

extern "C" {

const char* hl_version(void) { return "0.1.0"; }

const char* hl_status_name(hl_status s) {
  switch (s) {
    case HL_OK: return "ok";
    case HL_ERR_DOMAIN: return "domain";
    case HL_ERR_REFUSED: return "refused";
    case HL_ERR_NUMERICAL: return "numerical";
    case HL_ERR_IO: return "io";
    case HL_ERR_CONFIG: return "config";
    case HL_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case HL_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* hl_last_error(void) { return last_error.c_str(); }

hl_status hl_config_new(hl_config** out) {
  if (!out) return fail(HL_ERR_INVALID_ARGUMENT, "null output pointer");
  return guarded([&] { *out = new hl_config(); });
}

void hl_config_free(hl_config* c) { delete c; }

hl_status hl_config_set(hl_config* c, const char* key, const char* value) {
  if (!c || !key || !value) return fail(HL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { c->config.set(key, value); });
}

hl_status hl_config_parse(hl_config* c, const char* text) {
  if (!c || !text) return fail(HL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { c->config = harperlab::experiment::ExperimentConfig::parse(text); });
}

hl_status hl_config_load(hl_config* c, const char* path) {
  if (!c || !path) return fail(HL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { c->config = harperlab::experiment::ExperimentConfig::load(path); });
}

hl_status hl_config_get(const hl_config* c, const char* key, char* buf, size_t cap, size_t* needed) {
  if (!c || !key) return fail(HL_ERR_INVALID_ARGUMENT, "null argument");
  std::string v;
  const hl_status s = guarded([&] { v = c->config.get(key); });
  return s == HL_OK ? copy_out(v, buf, cap, needed) : s;
}

hl_status hl_config_serialize(const hl_config* c, char* buf, size_t cap, size_t* needed) {
  if (!c) return fail(HL_ERR_INVALID_ARGUMENT, "null argument");
  return copy_out(c->config.serialize(), buf, cap, needed);
}

hl_status hl_config_hash(const hl_config* c, uint64_t* out) {
  if (!c || !out) return fail(HL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = c->config.hash(); });
}

const char* hl_subcommands(void) {
  std::string s;
  for (const auto& n : harperlab::experiment::subcommands()) s += n + "\n";
  return stash(s);
}

const char* hl_subcommand_help(const char* subcommand) {
  if (!subcommand) return nullptr;
  try {
    return stash(harperlab::experiment::subcommand_help(subcommand));
  } catch (const std::exception& e) {
    last_error = e.what();
    return nullptr;
  }
}

const char* hl_config_keys(void) {
  std::string s;
  for (const auto& k : harperlab::experiment::ExperimentConfig::keys()) s += k + "\n";
  return stash(s);
}

const char* hl_config_describe(const char* key) {
  if (!key) return nullptr;
  try {
    return stash(harperlab::experiment::ExperimentConfig::describe(key));
  } catch (const std::exception& e) {
    last_error = e.what();
    return nullptr;
  }
}

hl_status hl_run(const char* subcommand, const hl_config* c, hl_result** out) {
  if (!subcommand || !c || !out) return fail(HL_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto r = new hl_result();
    try {
      r->result = harperlab::experiment::run(subcommand, c->config);
    } catch (...) {
      delete r;
      throw;
    }
    *out = r;
  });
}

void hl_result_free(hl_result* r) { delete r; }

size_t hl_result_artifact_count(const hl_result* r) { return r ? r->result.artifacts.size() : 0; }

const char* hl_result_artifact_name(const hl_result* r, size_t i) {
  if (!r || i >= r->result.artifacts.size()) return nullptr;
  return r->result.artifacts[i].name.c_str();
}

const char* hl_result_artifact_data(const hl_result* r, size_t i, size_t* size) {
  if (!r || i >= r->result.artifacts.size()) return nullptr;
  if (size) *size = r->result.artifacts[i].content.size();
  return r->result.artifacts[i].content.c_str();
}

size_t hl_result_log_count(const hl_result* r) { return r ? r->result.log.size() : 0; }

const char* hl_result_log_line(const hl_result* r, size_t i) {
  if (!r || i >= r->result.log.size()) return nullptr;
  return r->result.log[i].c_str();
}

hl_status hl_theta_function(double re, double im, int n_max, double* out_re, double* out_im) {
  if (!out_re || !out_im) return fail(HL_ERR_INVALID_ARGUMENT, "null output pointer");
  if (n_max < 1) return fail(HL_ERR_DOMAIN, "n_max must be >= 1");
  return guarded([&] {
    const auto v = harperlab::frames::theta_function({re, im}, n_max);
    *out_re = v.real();
    *out_im = v.imag();
  });
}

hl_status hl_gaussian_lattice_sum(double alpha, double a, double delta, double x0, double y0, double* value,
                                  double* tail_bound) {
  if (!value) return fail(HL_ERR_INVALID_ARGUMENT, "null output pointer");
  return guarded([&] {
    const auto s = harperlab::lattice_sums::gaussian_lattice_sum(alpha, a, delta, x0, y0);
    *value = s.value;
    if (tail_bound) *tail_bound = s.tail_bound;
  });
}

hl_status hl_convergents(double alpha, int n_terms, int64_t* p, int64_t* q, int* count) {
  if (!p || !q || !count) return fail(HL_ERR_INVALID_ARGUMENT, "null output pointer");
  return guarded([&] {
    const auto cf = harperlab::diophantine::continued_fraction(alpha, n_terms);
    *count = static_cast<int>(cf.convergents.size());
    for (int i = 0; i < *count; ++i) {
      p[i] = cf.convergents[i].p;
      q[i] = cf.convergents[i].q;
    }
  });
}

}  // extern "C"
