#pragma once

#include <cstdint>
#include <vector>

#include "phientropy/operator.hpp"
#include "phientropy/phi_function.hpp"

namespace phientropy {

/// [D psi(A)]^{-1}: Schur multiplication by the reciprocals of the divided
/// differences of psi in the eigenbasis of A. A must be positive definite.
MatrixOperator inverse_derivative_map(const PhiFunction& phi, const HermitianMatrix& a);

struct MembershipWitness {
  HermitianMatrix s;
  HermitianMatrix t;
  double alpha = 0.0;
  std::size_t trial = 0;
  double gap = 0.0;
  double scale = 1.0;
};

struct MembershipReport {
  std::string phi;
  int d = 0;
  std::size_t trials = 0;
  double min_gap = 0.0;    // smallest lambda_min over trials
  double min_ratio = 0.0;  // smallest gap / scale
  bool passed = true;      // gap >= -1e-7 scale on every trial
  MembershipWitness worst;
  std::vector<double> alphas;  // per trial
  std::vector<double> gaps;
  std::vector<double> scales;
};

/// lambda_min([D psi(aS + (1-a)T)]^{-1} - a [D psi(S)]^{-1} - (1-a) [D psi(T)]^{-1}) together with
/// the scale 1 + max norm of the three operators.
struct ConcavitySample {
  double gap = 0.0;
  double scale = 1.0;
};
ConcavitySample concavity_gap(const PhiFunction& phi, const HermitianMatrix& s,
                              const HermitianMatrix& t, double alpha);

/// Runs `trials` seeded triples (S, T positive definite, alpha in {0.1, ..., 0.9}).
MembershipReport membership_concavity_check(const PhiFunction& phi, int d, std::size_t trials,
                                            std::uint64_t seed);

/// One atom of a finitely supported random pair (Y, K).
struct QuadraticAtom {
  double p = 0.0;
  HermitianMatrix y;  // positive definite
  HermitianMatrix k;
};

/// E <K, D psi(Y)(K)> - <E K, D psi(E Y)(E K)>; nonnegative for phi in the class.
double quadratic_form_convexity_gap(const PhiFunction& phi, const std::vector<QuadraticAtom>& atoms);
/// Same, for a seeded two-point pair.
double quadratic_form_convexity_gap(const PhiFunction& phi, int d, std::uint64_t seed);

}  // namespace phientropy
