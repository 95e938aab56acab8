#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace roundtable {

/// Base type for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text: corpus lines, config documents, model responses.
class ParseError : public Error {
public:
  using Error::Error;
};

/// Structurally well-formed input that violates a documented invariant.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Filesystem failures (open, write, rename).
class IoError : public Error {
public:
  using Error::Error;
};

/// Failures talking to a chat/embedding backend, after retries.
class ProviderError : public Error {
public:
  using Error::Error;
};

/// Replay mode was asked for a request that has no recorded fixture.
class MissingFixtureError : public ProviderError {
public:
  explicit MissingFixtureError(std::string key)
      : ProviderError("no fixture recorded for request key " + key),
        key_(std::move(key)) {}

  const std::string& key() const { return key_; }

private:
  std::string key_;
};

}  // namespace roundtable
