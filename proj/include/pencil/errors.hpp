#pragma once

#include <stdexcept>
#include <string>

namespace pencil {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad user input: malformed config, violated type invariant, argument
/// outside a documented domain.
class InputError : public Error {
public:
  using Error::Error;
};

/// Evaluation outside the domain of a function.
class DomainError : public InputError {
public:
  using InputError::InputError;
};

/// Config file / schema problems.  Message names the offending field.
class ConfigError : public InputError {
public:
  using InputError::InputError;
};

/// Numerical failure: the algorithm could not produce a trustworthy answer.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// A pencil eigenvalue sits on (or too close to) a weight-strip boundary
/// line, so strip-dependent bookkeeping is ill-defined.
class StripViolationError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// The integration contour passes too close to a zero.
class ContourError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Iteration failed to converge.
class ConvergenceError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Numerical rank / conditioning is ambiguous at the requested tolerance.
class ConditioningError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// The requested configuration is outside what this implementation supports.
class CapabilityError : public InputError {
public:
  using InputError::InputError;
};

/// A resonant configuration was met without the resonant mode requested,
/// or vice versa.
class ResonanceError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Kernel dimension found numerically differs from the expected one.
class MultiplicityError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Gram matrix of a biorthogonalization is numerically singular.
class NormalizationError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Cutoff supports overlap or other geometric preconditions fail.
class GeometryError : public InputError {
public:
  using InputError::InputError;
};

/// Quadrature / grid resolution insufficient for the requested operation.
class ResolutionError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Least-squares fit too ill-conditioned to trust.
class IllPosedFitError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Linear solver failed (singular or near-singular system).
class SolverError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

} // namespace pencil
