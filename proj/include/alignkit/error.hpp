// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace alignkit {

// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  usage,      // bad flags or config values
  data,       // parse, validation, shape, coverage or I/O problems
  numerical,  // singular systems, divergence, undefined statistics
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error usage_error(const std::string& what) {
  return Error(ErrorKind::usage, what);
}
inline Error data_error(const std::string& what) {
  return Error(ErrorKind::data, what);
}
inline Error numerical_error(const std::string& what) {
  return Error(ErrorKind::numerical, what);
}

}  // namespace alignkit
