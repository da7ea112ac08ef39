#pragma once

#include <stdexcept>
#include <string>

namespace besov {

/// Process exit codes shared by the library errors and the CLI.
enum class ExitCode : int {
  ok = 0,
  verification_failure = 1,
  config_error = 2,
  kernel_hypothesis = 3,
  resolution = 4,
};

/// Base for every error raised by the library. Carries the exit code the
/// CLI reports when the error escapes a command.
class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Bad parameters, malformed descriptors, mismatched grids.
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ExitCode::config_error, what) {}
};

/// A kernel violates a standing hypothesis (unit mass, finite samples).
class KernelHypothesisError : public Error {
 public:
  explicit KernelHypothesisError(const std::string& what)
      : Error(ExitCode::kernel_hypothesis, what) {}
};

/// The grid cannot resolve the requested scale.
class ResolutionError : public Error {
 public:
  explicit ResolutionError(const std::string& what) : Error(ExitCode::resolution, what) {}
};

/// A regression or fit could not be carried out on the supplied data.
class FitError : public Error {
 public:
  explicit FitError(const std::string& what) : Error(ExitCode::resolution, what) {}
};

}  // namespace besov
