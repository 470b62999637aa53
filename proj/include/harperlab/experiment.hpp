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

#ifndef HARPERLAB_EXPERIMENT_HPP
#define HARPERLAB_EXPERIMENT_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace harperlab::experiment {

/// Key-value experiment configuration with a fixed schema. Values are
/// stored in canonical text form, so serialize() is stable across round trips.
class ExperimentConfig {
 public:
  ExperimentConfig();

  /// Throws ConfigError naming the field for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  long long get_int(const std::string& key) const;
  double get_real(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;

  /// "key = value" lines, '#' comments, blank lines ignored.
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  std::string serialize() const;

  /// FNV-1a 64 of the numeric fields (output and cache directories excluded),
  /// plus the contents of a custom continued-fraction file.
  std::uint64_t hash() const;
  std::string hash_hex() const;

  static std::vector<std::string> keys();
  static std::string describe(const std::string& key);

 private:
  std::map<std::string, std::string> values_;
};

struct Artifact {
  std::string name;
  std::string content;
};

struct RunResult {
  int status = 0;
  std::vector<Artifact> artifacts;  // the first one is the primary output
  std::vector<std::string> log;
};

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t seed = 14695981039346656037ULL);

/// Subcommands: cf, dos, dims, transport, bound, frame, theta-zeros, lattice-sum, oscillator.
/// Artifacts are written atomically to output_dir when it is set.
RunResult run(const std::string& subcommand, const ExperimentConfig& config);

std::vector<std::string> subcommands();
/// One paragraph per subcommand: the fields it reads and the CSV columns it emits.
std::string subcommand_help(const std::string& subcommand);

/// Writes to path.tmp.<pid> then renames over path.
void write_atomic(const std::string& path, const std::string& content);

/// Cache root: the cache_dir field, else $HARPERLAB_CACHE, else none.
std::string cache_root(const ExperimentConfig& config);

}  // namespace harperlab::experiment

#endif  // HARPERLAB_EXPERIMENT_HPP
