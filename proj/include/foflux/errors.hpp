#pragma once

#include <stdexcept>
#include <string>

namespace foflux {

// Process exit codes, one per error family (see README for the table).
enum class ExitCode : int {
  ok = 0,
  usage = 1,
  config = 2,
  data = 3,
  solver = 4,
  conditioning = 5,
  io = 6,
};

class Error : public std::runtime_error {
public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

private:
  ExitCode code_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ExitCode::config, what) {}
};

// Bad input data: schema mismatches, parse failures, invariant violations.
struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ExitCode::data, what) {}
};

// Root finding or hyperparameter optimization did not converge.
struct SolverError : Error {
  explicit SolverError(const std::string& what) : Error(ExitCode::solver, what) {}
};

// Linear algebra conditioning failures (Cholesky with exhausted jitter).
struct ConditioningError : Error {
  explicit ConditioningError(const std::string& what) : Error(ExitCode::conditioning, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ExitCode::io, what) {}
};

}  // namespace foflux
