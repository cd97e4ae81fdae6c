#pragma once

#include <stdexcept>
#include <string>

namespace polyvar {

/// Base class for all library errors. The exit code is what the CLI reports.
class Error : public std::runtime_error {
 public:
  Error(const std::string& what, int exit_code)
      : std::runtime_error(what), exit_code_(exit_code) {}

  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

/// The model itself is unusable: reducible quotient, non-primitive matrix,
/// solver non-convergence, infeasible velocity.
class ModelError : public Error {
 public:
  explicit ModelError(const std::string& what) : Error(what, 2) {}
};

/// Bad input document or bad parameter values.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what, 3) {}
};

/// A size cap (enumeration count, lattice box, circuit count) was exceeded.
class ResourceError : public Error {
 public:
  explicit ResourceError(const std::string& what) : Error(what, 4) {}
};

class NotIrreducible : public ModelError {
 public:
  NotIrreducible(std::size_t from, std::size_t to)
      : ModelError("quotient is not irreducible: state " + std::to_string(to) +
                   " is unreachable from state " + std::to_string(from)),
        from_(from),
        to_(to) {}

  std::size_t from() const noexcept { return from_; }
  std::size_t to() const noexcept { return to_; }

 private:
  std::size_t from_;
  std::size_t to_;
};

class NotPrimitive : public ModelError {
 public:
  explicit NotPrimitive(const std::string& what) : ModelError(what) {}
};

class ConvergenceError : public ModelError {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : ModelError(what + " (last residual " + std::to_string(last_residual) + ")"),
        last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// Raised by the linear-domain transfer matrix builder when exponents would
/// overflow; the log-domain builder has no such limit.
class OverflowGuard : public ModelError {
 public:
  explicit OverflowGuard(const std::string& what) : ModelError(what) {}
};

}  // namespace polyvar
