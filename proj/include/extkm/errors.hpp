#pragma once

#include <stdexcept>
#include <string>

namespace extkm {

/// Base class for all library errors. CLI maps these to exit code 3.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A required CSV column is missing.
class schema_error : public error {
public:
  using error::error;
};

/// A data row could not be parsed; message carries the line number.
class parse_error : public error {
public:
  using error::error;
};

/// A parsed value is outside its admissible set (e.g. delta not in {0,1}).
class value_error : public error {
public:
  using error::error;
};

/// Too few observations/replicates for the requested operation.
class size_error : public error {
public:
  using error::error;
};

/// An index or count is out of its valid range.
class bounds_error : public error {
public:
  using error::error;
};

/// An argument lies outside the mathematical domain of a function.
class domain_error : public error {
public:
  using error::error;
};

/// Degenerate data: zero mass, constant values, zero threshold.
class degenerate_error : public error {
public:
  using error::error;
};

/// A numeric evaluation failed (non-finite value, underflow, divergence).
class numeric_error : public error {
public:
  using error::error;
};

/// A required optional evaluator (envelope, derivative) was not supplied.
class capability_error : public error {
public:
  using error::error;
};

} // namespace extkm
