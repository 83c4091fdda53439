#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace sqlrefine {

/// Value-or-error-message carrier for operations whose failure is an
/// expected outcome (model output parsing, mostly) rather than a bug.
template <typename T>
class Result {
 public:
  static Result ok(T value) {
    Result r;
    r.value_ = std::move(value);
    return r;
  }

  static Result fail(std::string message) {
    Result r;
    r.error_ = std::move(message);
    return r;
  }

  bool has_value() const { return value_.has_value(); }
  explicit operator bool() const { return has_value(); }

  const T& value() const& {
    if (!value_) throw std::logic_error("Result::value on error: " + error_);
    return *value_;
  }
  T&& value() && {
    if (!value_) throw std::logic_error("Result::value on error: " + error_);
    return std::move(*value_);
  }

  /// Error message; empty when the result holds a value.
  const std::string& error() const { return error_; }

 private:
  Result() = default;
  std::optional<T> value_;
  std::string error_;
};

}  // namespace sqlrefine
