#pragma once

#include <stdexcept>
#include <string>

namespace gradcon {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// The convex body does not contain the origin in its interior, so H(0) >= 0.
class DegenerateBody : public Error {
public:
    using Error::Error;
};

/// No uniformly convex constraint with the same zero sublevel set is available.
class NoSurrogate : public Error {
public:
    using Error::Error;
};

class ValidationFailure : public Error {
public:
    using Error::Error;
};

/// Parse or well-posedness failure; `line` is 0 when not tied to a config line.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class SolveError : public Error {
public:
    using Error::Error;
};

class NonConvergence : public SolveError {
public:
    NonConvergence(int iters, double residual, const std::string& detail = {})
        : SolveError("Newton did not converge after " + std::to_string(iters) +
                     " iterations (residual " + std::to_string(residual) + ")" +
                     (detail.empty() ? "" : ": " + detail)),
          iters_(iters),
          residual_(residual) {}
    int iterations() const { return iters_; }
    double residual() const { return residual_; }

private:
    int iters_;
    double residual_;
};

class SingularLinearSystem : public SolveError {
public:
    using SolveError::SolveError;
};

class InvalidStart : public Error {
public:
    using Error::Error;
};

class IncompatibleConstraint : public Error {
public:
    using Error::Error;
};

}  // namespace gradcon
