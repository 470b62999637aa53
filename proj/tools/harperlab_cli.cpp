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

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "harperlab/harperlab.h"

namespace {

const std::map<std::string, std::vector<std::string>> kFields = {
    {"cf", {"alpha", "terms", "epsilon"}},
    {"dos", {"model", "alpha", "depth", "offset", "dos_method", "n", "n_omega", "n_k"}},
    {"dims",
     {"model", "alpha", "depth", "offset", "dos_method", "n", "n_omega", "n_k", "q", "window", "t_min", "t_max",
      "t_ratio"}},
    {"transport",
     {"model", "alpha", "depth", "offset", "rep", "q", "t_end", "dt", "half_width", "n_omega", "window", "symmetry",
      "grid_k", "grid_cells", "average"}},
    {"bound",
     {"model", "alpha", "depth", "offset", "q", "t_end", "dt", "half_width", "n_omega", "n_k", "t_min", "t_max",
      "t_ratio"}},
    {"frame",
     {"alpha", "depth", "offset", "vector", "cutoff", "l_max", "frame_sites", "frame_omega", "grid_k", "grid_cells"}},
    {"theta-zeros", {"n_max"}},
    {"lattice-sum",
     {"alpha", "depth", "offset", "scan", "a", "cell", "symmetry", "scan_min", "scan_max", "scan_ratio"}},
    {"oscillator", {"symmetry", "hermite_terms"}},
};

std::string flag(std::string key) {
  for (auto& ch : key)
    if (ch == '_') ch = '-';
  return "--" + key;
}

int report(hl_status s) {
  std::fprintf(stderr, "harperlab: %s error: %s\n", hl_status_name(s), hl_last_error());
  return s == HL_ERR_CONFIG || s == HL_ERR_INVALID_ARGUMENT ? 2 : 1;
}

struct Invocation {
  std::string config_file;
  std::vector<std::string> sets;
  std::string out_dir;
  std::string cache_dir;
  bool print_config = false;
  bool quiet = false;
  std::map<std::string, std::string> values;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"harperlab: rotation-algebra spectra, transport exponents, frames and lattice sums"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hl_version()));

  std::map<std::string, Invocation> inv;
  for (const auto& [name, keys] : kFields) {
    const char* help = hl_subcommand_help(name.c_str());
    auto* sub = app.add_subcommand(name, help ? help : "");
    auto& v = inv[name];
    sub->add_option("--config", v.config_file, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--set", v.sets, "extra KEY=VALUE overrides");
    sub->add_option("--out", v.out_dir, "write artifacts and config.txt into this directory");
    sub->add_option("--cache", v.cache_dir, "cache root (default: $HARPERLAB_CACHE)");
    sub->add_flag("--print-config", v.print_config, "print the effective config and its hash, then exit");
    sub->add_flag("--quiet", v.quiet, "do not print the primary artifact");
    for (const auto& key : keys) {
      const char* d = hl_config_describe(key.c_str());
      sub->add_option(flag(key), v.values[key], d ? d : "");
    }
  }

  CLI11_PARSE(app, argc, argv);
  const std::string name = app.get_subcommands().front()->get_name();
  const auto* sub = app.get_subcommands().front();
  auto& v = inv[name];

  hl_config* config = nullptr;
  if (hl_status s = hl_config_new(&config); s != HL_OK) return report(s);
  struct Free {
    hl_config* c;
    ~Free() { hl_config_free(c); }
  } guard{config};

  if (!v.config_file.empty())
    if (hl_status s = hl_config_load(config, v.config_file.c_str()); s != HL_OK) return report(s);
  for (const auto& key : kFields.at(name)) {
    if (sub->count(flag(key)) == 0) continue;
    if (hl_status s = hl_config_set(config, key.c_str(), v.values[key].c_str()); s != HL_OK) return report(s);
  }
  for (const auto& kv : v.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "harperlab: --set expects KEY=VALUE, got '%s'\n", kv.c_str());
      return 2;
    }
    if (hl_status s = hl_config_set(config, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()); s != HL_OK)
      return report(s);
  }
  if (!v.out_dir.empty())
    if (hl_status s = hl_config_set(config, "output_dir", v.out_dir.c_str()); s != HL_OK) return report(s);
  if (!v.cache_dir.empty())
    if (hl_status s = hl_config_set(config, "cache_dir", v.cache_dir.c_str()); s != HL_OK) return report(s);

  if (v.print_config) {
    size_t needed = 0;
    hl_config_serialize(config, nullptr, 0, &needed);
    std::string text(needed, '\0');
    if (hl_status s = hl_config_serialize(config, text.data(), text.size(), &needed); s != HL_OK) return report(s);
    uint64_t h = 0;
    hl_config_hash(config, &h);
    std::printf("%s# config_hash=%016llx\n", text.c_str(), static_cast<unsigned long long>(h));
    return 0;
  }

  hl_result* result = nullptr;
  if (hl_status s = hl_run(name.c_str(), config, &result); s != HL_OK) return report(s);
  for (size_t i = 0; i < hl_result_log_count(result); ++i) std::fprintf(stderr, "%s\n", hl_result_log_line(result, i));
  if (!v.quiet && hl_result_artifact_count(result) > 0) {
    size_t size = 0;
    const char* data = hl_result_artifact_data(result, 0, &size);
    std::fwrite(data, 1, size, stdout);
  }
  hl_result_free(result);
  return 0;
}
