#pragma once

#include <stdexcept>
#include <string>

namespace pathtune {

// A sample that cannot have come from a timer (negative or non-finite).
struct MeasurementError : std::invalid_argument {
  explicit MeasurementError(const std::string& what) : std::invalid_argument(what) {}
};

// Rank list is not a cartesian product of arithmetic progressions.
struct NonCartesianError : std::runtime_error {
  explicit NonCartesianError(const std::string& what) : std::runtime_error(what) {}
};

// Two distinct channel geometries hashed to the same 64-bit id.
struct HashCollisionError : std::runtime_error {
  explicit HashCollisionError(const std::string& what) : std::runtime_error(what) {}
};

// A kernel was skipped but no stored mean exists to substitute.
struct SubstitutionUnavailable : std::runtime_error {
  explicit SubstitutionUnavailable(const std::string& what) : std::runtime_error(what) {}
};

// Routine tag with no cost rule (or unparseable tag).
struct UnknownKernelError : std::runtime_error {
  explicit UnknownKernelError(const std::string& what) : std::runtime_error(what) {}
};

// Trace DAG failed a structural check (cycle, dangling edge).
struct CorruptTraceError : std::runtime_error {
  explicit CorruptTraceError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid workload / sweep configuration.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Script or program text that cannot be parsed.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pathtune
