#pragma once

#include <stdexcept>
#include <string>

namespace oscilla {

/// Bad input: malformed arguments, violated preconditions, unreadable files.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver gave up (iteration cap, instance too large for an exact method).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace oscilla
