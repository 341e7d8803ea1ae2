#pragma once

#include <stdexcept>
#include <string>

namespace attribqa {

// Base for every error raised by the library. The CLI maps subclasses onto
// process exit codes (usage 1, data 2, transport 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad records, invariant violations, unparsable model output.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

// Caller misuse: impossible requests, bad arguments.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Network-level failure talking to a model endpoint.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& what, bool transient = true)
      : Error(what), transient_(transient) {}
  // Transient failures (connection errors, 429, 5xx) are retried.
  bool transient() const noexcept { return transient_; }

 private:
  bool transient_;
};

class CassetteMiss : public Error {
 public:
  explicit CassetteMiss(const std::string& fingerprint)
      : Error("cassette miss: " + fingerprint), fingerprint_(fingerprint) {}
  const std::string& fingerprint() const noexcept { return fingerprint_; }

 private:
  std::string fingerprint_;
};

}  // namespace attribqa
