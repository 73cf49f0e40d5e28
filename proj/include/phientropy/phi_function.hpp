#pragma once

#include <string>

#include "phientropy/hermitian.hpp"

namespace phientropy {

/// A convex function phi on [0, inf) drawn from the matrix entropy class:
/// affine maps, the standard entropy t log t, or a power t^q with q in (1, 2].
///
/// `unchecked_power` builds t^q for any q > 1 so that the membership
/// machinery can be pointed at functions outside the class; such objects
/// report `admissible() == false`.
class PhiFunction {
 public:
  enum class Kind { Affine, Entropy, Power };

  static PhiFunction affine(double slope, double intercept);
  static PhiFunction entropy();
  /// q == 1 collapses to the affine map t.
  static PhiFunction power(double q);
  static PhiFunction unchecked_power(double q);

  /// Parses "entropy", "affine:<slope>:<intercept>", "power:<q>". Exponents
  /// outside (1, 2] are accepted as unchecked powers.
  static PhiFunction parse(const std::string& text);

  Kind kind() const { return kind_; }
  double exponent() const { return q_; }
  double slope() const { return slope_; }
  double intercept() const { return intercept_; }
  bool admissible() const { return admissible_; }
  bool is_affine() const { return kind_ == Kind::Affine; }
  std::string name() const;

  double phi(double t) const;
  double psi(double t) const;
  double psi_prime(double t) const;
  /// t log t - t for the entropy kind; phi(t) otherwise.
  double entropy_minus_t(double t) const;

  /// phi with psi as its derivative, domain [0, inf).
  ScalarFunction phi_view() const;
  /// psi with psi' as its derivative. The entropy psi lives on (0, inf).
  ScalarFunction psi_view() const;

  /// True when psi is unbounded at zero, so evaluation needs a PD argument.
  bool psi_singular_at_zero() const;

 private:
  Kind kind_ = Kind::Affine;
  double q_ = 1.0;
  double slope_ = 0.0;
  double intercept_ = 0.0;
  bool admissible_ = true;
};

/// First divided difference f[lambda, mu]: the ratio when
/// |lambda - mu| > 1e-6 (1 + |lambda| + |mu|), otherwise the Hermite integral
/// of f' evaluated with a 16-node Gauss-Legendre rule. Symmetric by construction.
double divided_difference(const ScalarFunction& f, double lambda, double mu);

}  // namespace phientropy
