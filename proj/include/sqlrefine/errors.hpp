#pragma once

#include <stdexcept>
#include <string>

namespace sqlrefine {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File or database could not be opened/read/written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Assembled prompt exceeds the configured context budget.
class OversizeError : public Error {
 public:
  using Error::Error;
};

/// Model endpoint failure (transport, timeout, malformed response).
class EndpointError : public Error {
 public:
  EndpointError(const std::string& what, bool retryable)
      : Error(what), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

/// The scripted endpoint had no rule matching a request. Never a silent
/// default: tests must script every call they trigger.
class ScriptError : public Error {
 public:
  using Error::Error;
};

/// Prompt template problem (missing file, unresolved placeholder).
class TemplateError : public Error {
 public:
  using Error::Error;
};

/// Schema subset references a table or column that does not exist.
class SubsetError : public Error {
 public:
  using Error::Error;
};

/// Metric computed over degenerate input (e.g. zero records).
class MetricError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sqlrefine
