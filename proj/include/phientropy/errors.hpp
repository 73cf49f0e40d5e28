#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phientropy {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An eigenvalue (or scalar argument) fell outside the admissible interval.
class DomainViolation : public Error {
 public:
  DomainViolation(double value, double lo, double hi);
  double value() const noexcept { return value_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

 private:
  double value_;
  double lo_;
  double hi_;
};

class SingularOperator : public Error {
 public:
  explicit SingularOperator(double sigma_min);
  double sigma_min() const noexcept { return sigma_min_; }

 private:
  double sigma_min_;
};

class NotPositiveDefinite : public Error {
 public:
  explicit NotPositiveDefinite(double lambda_min, const std::string& what = {});
  double lambda_min() const noexcept { return lambda_min_; }

 private:
  double lambda_min_;
};

class NotPositiveSemidefinite : public Error {
 public:
  explicit NotPositiveSemidefinite(double lambda_min, const std::string& what = {});
  double lambda_min() const noexcept { return lambda_min_; }

 private:
  double lambda_min_;
};

/// The derivative of psi vanishes identically (affine phi), so it has no inverse.
class NoInverseDefined : public Error {
 public:
  using Error::Error;
};

/// A scalar certificate for the generalized Klein inequality failed at (a, b).
class CertificateRejected : public Error {
 public:
  CertificateRejected(double a, double b, double value);
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double value() const noexcept { return value_; }

 private:
  double a_;
  double b_;
  double value_;
};

class TooLargeToEnumerate : public Error {
 public:
  TooLargeToEnumerate(double outcomes, std::size_t cap);
  double outcomes() const noexcept { return outcomes_; }

 private:
  double outcomes_;
};

class PreconditionFailed : public Error {
 public:
  using Error::Error;
};

}  // namespace phientropy
