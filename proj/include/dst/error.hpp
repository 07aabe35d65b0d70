// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace dst {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent run configuration (dimension mismatch, invalid parameter).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input value outside its documented domain.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A node or key that does not exist in the container it was looked up in.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Malformed serialized data. `where` names the file and line/field.
class DeserializationError : public Error {
 public:
  DeserializationError(const std::string& where, const std::string& what)
      : Error(where + ": " + what), where_(where) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// The thought generator failed to produce candidates for a state.
class GenerationError : public Error {
 public:
  GenerationError(const std::string& problem_id, std::size_t depth, const std::string& what)
      : Error("generation failed for problem '" + problem_id + "' at depth " +
              std::to_string(depth) + ": " + what),
        problem_id_(problem_id),
        depth_(depth) {}
  const std::string& problem_id() const noexcept { return problem_id_; }
  std::size_t depth() const noexcept { return depth_; }

 private:
  std::string problem_id_;
  std::size_t depth_;
};

/// A scripted generator was asked for a candidate its script does not contain.
class ReplayError : public GenerationError {
 public:
  using GenerationError::GenerationError;
};

/// Transport-level failure talking to a remote generator.
class ConnectionError : public Error {
 public:
  ConnectionError(const std::string& what, bool retryable)
      : Error(what), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

/// A remote generator answered with a body that violates the wire schema.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace dst
