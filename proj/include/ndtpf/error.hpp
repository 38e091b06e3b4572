// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace ndtpf {

// Mirrors ndtpf_status in the C API.
enum class ErrorCode {
  kInvalidArgument = 1,
  kFormat = 2,
  kIo = 3,
  kNumeric = 4,
  kDomain = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCode::kInvalidArgument, what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what)
      : Error(ErrorCode::kFormat, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorCode::kNumeric, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorCode::kDomain, what) {}
};

}  // namespace ndtpf
