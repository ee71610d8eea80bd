// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace qlsm {

enum class ErrorCode {
  kInvalidArgument = 1,
  kConfig,
  kCapExceeded,
  kSingularGram,
  kScheduleViolation,
  kOverflow,
  kVarianceExceeded,
  kDirtyAncilla,
  kMissingAnnotation,
  kInconsistent,
  kIo,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorCode::kInvalidArgument, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::kConfig, what) {}
};

class CapExceeded : public Error {
 public:
  CapExceeded(double count, double cap)
      : Error(ErrorCode::kCapExceeded, "path count " + std::to_string(count) +
                                           " exceeds enumeration cap " + std::to_string(cap)) {}
};

// Gram matrix at step t has no usable inverse.
class SingularGram : public Error {
 public:
  SingularGram(int t, double sigma_min)
      : Error(ErrorCode::kSingularGram, "singular Gram matrix at t=" + std::to_string(t) +
                                            " (sigma_min=" + std::to_string(sigma_min) + ")"),
        t_(t),
        sigma_min_(sigma_min) {}
  int t() const noexcept { return t_; }
  double sigma_min() const noexcept { return sigma_min_; }

 private:
  int t_;
  double sigma_min_;
};

class ScheduleViolation : public Error {
 public:
  explicit ScheduleViolation(const std::string& what) : Error(ErrorCode::kScheduleViolation, what) {}
};

class Overflow : public Error {
 public:
  explicit Overflow(const std::string& what) : Error(ErrorCode::kOverflow, what) {}
};

class VarianceExceeded : public Error {
 public:
  VarianceExceeded(double variance, double sigma)
      : Error(ErrorCode::kVarianceExceeded, "variance " + std::to_string(variance) +
                                                " exceeds sigma^2=" + std::to_string(sigma * sigma)) {}
};

class DirtyAncilla : public Error {
 public:
  explicit DirtyAncilla(const std::string& what) : Error(ErrorCode::kDirtyAncilla, what) {}
};

class MissingAnnotation : public Error {
 public:
  explicit MissingAnnotation(const std::string& what) : Error(ErrorCode::kMissingAnnotation, what) {}
};

class Inconsistent : public Error {
 public:
  explicit Inconsistent(const std::string& what) : Error(ErrorCode::kInconsistent, what) {}
};

}  // namespace qlsm
