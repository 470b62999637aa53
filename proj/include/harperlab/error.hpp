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

#ifndef HARPERLAB_ERROR_HPP
#define HARPERLAB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace harperlab {

enum class ErrorKind {
  kDomain,      // argument outside the mathematical domain of the operation
  kRefused,     // request is well-formed but outside a controlled regime
  kNumerical,   // a numerical routine failed to converge
  kIo,
  kConfig,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::kDomain, what) {}
};

/// Raised when an operation would leave its controlled-accuracy regime
/// (leakage horizon, too few atoms, incomplete basis, ...).
class RefusedError : public Error {
 public:
  explicit RefusedError(const std::string& what) : Error(ErrorKind::kRefused, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::kNumerical, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

}  // namespace harperlab

#endif  // HARPERLAB_ERROR_HPP
