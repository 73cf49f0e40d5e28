#pragma once

#include <functional>

#include "phientropy/hermitian.hpp"
#include "phientropy/phi_function.hpp"

namespace phientropy {

/// Column-stacking vec and its inverse.
CVector vec(const CMatrix& m);
CMatrix unvec(const CVector& v, int d);

/// Linear map on d x d matrices, stored as a dense d^2 x d^2 matrix acting on
/// column-stacked coordinates, so vec(A M B) = (B^T kron A) vec(M).
class MatrixOperator {
 public:
  MatrixOperator() = default;
  /// Wraps a d^2 x d^2 matrix. `self_adjoint` is verified to 1e-10 when set.
  MatrixOperator(int d, CMatrix rep, bool self_adjoint);

  static MatrixOperator identity(int d);
  static MatrixOperator zero(int d);

  int dim() const { return d_; }
  const CMatrix& rep() const { return rep_; }
  bool self_adjoint() const { return self_adjoint_; }

  CMatrix apply(const CMatrix& m) const;
  HermitianMatrix apply(const HermitianMatrix& m) const;

  MatrixOperator operator+(const MatrixOperator& o) const;
  MatrixOperator operator-(const MatrixOperator& o) const;
  MatrixOperator operator*(double s) const;
  friend MatrixOperator operator*(double s, const MatrixOperator& t) { return t * s; }
  /// (this o other)(M) = this(other(M)).
  MatrixOperator compose(const MatrixOperator& other) const;

  /// Spectral norm of the rep.
  double norm() const;
  /// Eigenvalues of a self-adjoint operator, ascending.
  RVector eigenvalues() const;
  double lambda_min() const;

 private:
  int d_ = 0;
  CMatrix rep_;
  bool self_adjoint_ = false;
};

/// (A kron B)(M) = A M B.
MatrixOperator tensor_operator(const HermitianMatrix& a, const HermitianMatrix& b);

/// X -> U (F .* (U* X U)) U* for unitary U and real F; self-adjoint when F is symmetric.
MatrixOperator schur_operator(const CMatrix& u, const RMatrix& f);

/// Daleckii-Krein derivative of the standard function f at A: in the eigenbasis of A
/// it multiplies entrywise by the divided differences f[lambda_i, lambda_j].
MatrixOperator derivative_operator(const ScalarFunction& f, const HermitianMatrix& a);

/// Throws SingularOperator when sigma_min <= 1e-12 ||rep||.
MatrixOperator invert_operator(const MatrixOperator& t);

/// f applied to a self-adjoint operator through the eigendecomposition of its rep.
MatrixOperator apply_operator_function(const std::function<double(double)>& f,
                                       const MatrixOperator& t);

/// Kubo-Ando mean S^{1/2} f(S^{-1/2} T S^{-1/2}) S^{1/2} of positive definite operators.
MatrixOperator operator_mean(const std::function<double(double)>& f, const MatrixOperator& s,
                             const MatrixOperator& t);

/// lambda_min of M_f(aS1 + (1-a)S2, aT1 + (1-a)T2) - a M_f(S1, T1) - (1-a) M_f(S2, T2).
double operator_mean_concavity_gap(const std::function<double(double)>& f, const MatrixOperator& s1,
                                   const MatrixOperator& t1, const MatrixOperator& s2,
                                   const MatrixOperator& t2, double alpha);

/// S <= T in the semidefinite order on operators.
PsdWitness psd_order_holds(const MatrixOperator& s, const MatrixOperator& t, double tol);

/// [D psi(A)]^{-1} by Gauss-Legendre quadrature of its integral representation,
/// for the entropy and power kinds. Affine phi throws NoInverseDefined.
MatrixOperator integral_inverse_derivative(const PhiFunction& phi, const HermitianMatrix& a,
                                           int nodes);
/// Starts at 64 nodes and doubles until successive results differ by < 1e-9
/// (spectral norm) or 1024 nodes are used.
MatrixOperator integral_inverse_derivative(const PhiFunction& phi, const HermitianMatrix& a);

/// (1/p) int_0^1 (tau A^p kron I + (1 - tau) I kron A^p)^{(1-p)/p} dtau, p in (0, 1].
/// This is the inverse derivative of psi(t) = t^p; it is the identity at p = 1.
MatrixOperator power_branch_integral(double p, const HermitianMatrix& a, int nodes);

}  // namespace phientropy
