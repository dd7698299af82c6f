#ifndef LOGDIFF_ERRORS_HPP
#define LOGDIFF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace logdiff {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Scalar argument outside the domain of the requested function.
struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Structurally invalid parameter value (negative tolerance, lambda out of
// range for an operation that requires it, ...).
struct ParamError : Error {
  explicit ParamError(const std::string& msg) : Error(msg) {}
};

// Iterative solve failed to reach its tolerance within the iteration cap.
struct NonConvergenceError : Error {
  explicit NonConvergenceError(const std::string& msg) : Error(msg) {}
};

// Two fields (or a field and an operator) live on different grids.
struct GridMismatchError : Error {
  explicit GridMismatchError(const std::string& msg) : Error(msg) {}
};

// A homogeneous negative-order norm was requested for a field whose mean
// is not numerically zero.
struct ZeroModeError : Error {
  explicit ZeroModeError(const std::string& msg) : Error(msg) {}
};

// Mode intensity sequence fails the summability requirement.
struct SummabilityError : Error {
  explicit SummabilityError(const std::string& msg) : Error(msg) {}
};

// Time step rejected by the stability bound, or a state blew up mid-run.
struct StabilityError : Error {
  explicit StabilityError(const std::string& msg) : Error(msg) {}
};

// A diagnostic needed the realized noise increments but the trajectory
// does not carry them.
struct ReplayError : Error {
  explicit ReplayError(const std::string& msg) : Error(msg) {}
};

// Config file rejected: parse failure or failed validation.
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// An input artifact (run directory, CSV, snapshot) is absent or malformed.
struct ArtifactError : Error {
  explicit ArtifactError(const std::string& msg) : Error(msg) {}
};

} // namespace logdiff

#endif
