#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nldw {

// ============================================================================
// Error taxonomy
// ============================================================================
//
// Numerical failures carry distinct types so a caller can tell a quadrature
// that refused to converge from a box that cannot hold the kernel it was
// asked to sample.  Conditions that are legitimate outcomes of an experiment
// (no blow-up before the horizon, say) are reported through result structs,
// not exceptions.

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Argument outside the documented domain (beta range, negative time, ...).
class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// An iterative or adaptive scheme exhausted its budget before reaching tol.
class NonConvergent : public Error {
 public:
  using Error::Error;
};

/// The periodic box is too small for the requested kernel width or run.
class DomainTooSmall : public Error {
 public:
  using Error::Error;
};

/// Two fields that must share a grid do not.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Sign hypothesis on the data failed for a theorem-regime run.
class PositivityViolation : public Error {
 public:
  using Error::Error;
};

/// A requested evaluation time is not covered by the stored snapshots.
class InsufficientSnapshots : public Error {
 public:
  using Error::Error;
};

/// A structural hypothesis of the underlying lemma fails (admissibility).
class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

/// Fewer data points than the requested fit needs.
class InsufficientPoints : public Error {
 public:
  using Error::Error;
};

/// A required input file or directory is absent.
class MissingInput : public Error {
 public:
  using Error::Error;
};

/// Configuration rejected; carries every violation found, not just the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "configuration invalid:";
    for (const auto& line : v) {
      out += "\n  ";
      out += line;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

}  // namespace nldw
