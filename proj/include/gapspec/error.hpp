#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gapspec {

// Base of every error raised by the library. The CLI maps the subclasses to
// exit codes: validation/domain -> 1, accuracy/solver/resource -> 2.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
  public:
    using Error::Error;
};

// Input lies outside the domain where the quantity is defined (e.g. a band
// point handed to a gap-only routine).
class DomainError : public Error {
  public:
    using Error::Error;
};

// Evaluation hits a pole or an inverse-square-root endpoint.
class SingularityError : public DomainError {
  public:
    using DomainError::DomainError;
};

class ResourceError : public Error {
  public:
    using Error::Error;
};

// Quadrature or refinement did not reach the requested tolerance.
class AccuracyError : public Error {
  public:
    AccuracyError(const std::string& what, double best_estimate, double error_bound)
        : Error(what), best_estimate_(best_estimate), error_bound_(error_bound) {}

    double best_estimate() const noexcept { return best_estimate_; }
    double error_bound() const noexcept { return error_bound_; }

  private:
    double best_estimate_;
    double error_bound_;
};

class SolverError : public Error {
  public:
    SolverError(const std::string& what, std::vector<double> residuals)
        : Error(what), residuals_(std::move(residuals)) {}

    const std::vector<double>& residuals() const noexcept { return residuals_; }

  private:
    std::vector<double> residuals_;
};

}  // namespace gapspec
