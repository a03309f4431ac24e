#pragma once

#include <stdexcept>
#include <string>

namespace dwos {

// Invalid or inconsistent configuration (bad keys, empty scene, empty mask, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A query point violates a domain precondition (outside the domain, r outside (0, R), ...).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Evaluation too close to an implicit-function pole.
struct SingularityError : DomainError {
  using DomainError::DomainError;
};

// A boundary query was used after the geometry it came from was modified.
struct ConsistencyError : std::logic_error {
  using std::logic_error::logic_error;
};

// The boundary representation does not provide the requested operation.
struct UnsupportedError : std::logic_error {
  using std::logic_error::logic_error;
};

// Numerical breakdown (non-finite estimates, degenerate geometry after an update).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file; carries the offending line number when known.
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line(line) {}
  int line;
};

}  // namespace dwos
