/* Copyright 2026 The uabnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef UABNN_ERROR_HPP_
#define UABNN_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace uabnn {

enum class ErrorKind {
  kConfig,      // invalid user configuration or arguments
  kIo,          // file system failures
  kParse,       // malformed input files
  kDegenerate,  // input is valid in shape but numerically unusable
  kContract,    // API precondition violated by the caller
  kNumeric,     // NaN/Inf produced during a computation
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(ErrorKind::kParse, "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& what)
      : Error(ErrorKind::kDegenerate, what) {}
};

class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what)
      : Error(ErrorKind::kContract, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::kNumeric, what) {}
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractViolation(what);
}

}  // namespace uabnn

#endif  // UABNN_ERROR_HPP_
