#include "phientropy/errors.hpp"

#include <fmt/format.h>

namespace phientropy {

DomainViolation::DomainViolation(double value, double lo, double hi)
    : Error(fmt::format("value {} outside the interval [{}, {}]", value, lo, hi)),
      value_(value),
      lo_(lo),
      hi_(hi) {}

SingularOperator::SingularOperator(double sigma_min)
    : Error(fmt::format("operator is numerically singular (sigma_min = {})", sigma_min)),
      sigma_min_(sigma_min) {}

NotPositiveDefinite::NotPositiveDefinite(double lambda_min, const std::string& what)
    : Error(fmt::format("{}not positive definite (lambda_min = {})",
                        what.empty() ? "" : what + ": ", lambda_min)),
      lambda_min_(lambda_min) {}

NotPositiveSemidefinite::NotPositiveSemidefinite(double lambda_min, const std::string& what)
    : Error(fmt::format("{}not positive semidefinite (lambda_min = {})",
                        what.empty() ? "" : what + ": ", lambda_min)),
      lambda_min_(lambda_min) {}

CertificateRejected::CertificateRejected(double a, double b, double value)
    : Error(fmt::format("scalar certificate is negative at (a, b) = ({}, {}): {}", a, b, value)),
      a_(a),
      b_(b),
      value_(value) {}

TooLargeToEnumerate::TooLargeToEnumerate(double outcomes, std::size_t cap)
    : Error(fmt::format("outcome space has {} points, enumeration cap is {}", outcomes, cap)),
      outcomes_(outcomes) {}

}  // namespace phientropy
