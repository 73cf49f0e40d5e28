#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "phientropy/errors.hpp"

namespace phientropy {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Interval of the extended real line. Closed endpoints are admitted with
/// an absolute slack; an open lower endpoint is strict.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = false;

  static Interval real_line() { return {}; }
  static Interval nonnegative() { return {0.0, std::numeric_limits<double>::infinity()}; }
  static Interval positive() { return {0.0, std::numeric_limits<double>::infinity(), true}; }

  bool contains(double x, double slack = 0.0) const {
    const bool above = lo_open ? x > lo : x >= lo - slack;
    return above && x <= hi + slack;
  }
};

/// Self-adjoint complex d x d matrix. Construction hermitizes the input via
/// (M + M*)/2 and remembers the Frobenius norm of the correction.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const CMatrix& m);

  static HermitianMatrix from_real(const RMatrix& m);
  static HermitianMatrix identity(int d);
  static HermitianMatrix zero(int d);
  static HermitianMatrix diagonal(std::span<const double> values);
  static HermitianMatrix diagonal(std::initializer_list<double> values);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(int i, int j) const { return m_(i, j); }
  double correction_norm() const { return correction_; }
  double max_abs_entry() const;
  bool is_real() const;

  HermitianMatrix operator+(const HermitianMatrix& o) const;
  HermitianMatrix operator-(const HermitianMatrix& o) const;
  HermitianMatrix operator-() const;
  HermitianMatrix operator*(double s) const;
  friend HermitianMatrix operator*(double s, const HermitianMatrix& a) { return a * s; }
  HermitianMatrix& operator+=(const HermitianMatrix& o);

  /// Conjugation U* A U, again Hermitian.
  HermitianMatrix congruence(const CMatrix& u) const;

 private:
  struct Trusted {};
  HermitianMatrix(CMatrix m, Trusted) : m_(std::move(m)) {}

  CMatrix m_;
  double correction_ = 0.0;
};

/// Spectral resolution A = sum_k value_k P_k. Eigenvalues closer than
/// 1e-8 (1 + |lambda|) share a cluster and a merged projector.
struct SpectralDecomposition {
  RVector eigenvalues;              // all d eigenvalues, descending
  CMatrix eigenvectors;             // column k belongs to eigenvalues[k]
  std::vector<double> values;       // cluster means, descending
  std::vector<CMatrix> projectors;  // one orthogonal projector per cluster
  std::vector<int> multiplicities;

  int dim() const { return static_cast<int>(eigenvalues.size()); }
  double lambda_max() const { return eigenvalues(0); }
  double lambda_min() const { return eigenvalues(eigenvalues.size() - 1); }
};

SpectralDecomposition spectral_decompose(const HermitianMatrix& a);

/// A scalar function together with its derivative and natural domain.
/// `derivative` may be empty when only values are needed.
struct ScalarFunction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  Interval domain;
  std::string name;

  double operator()(double t) const { return value(t); }

  static ScalarFunction identity();
  static ScalarFunction square();
  static ScalarFunction cube();
  static ScalarFunction power(double p);   // t^p on [0, inf)
  static ScalarFunction exp(double theta = 1.0);
  static ScalarFunction log();             // (0, inf)
  static ScalarFunction t_log_t();         // 0 log 0 = 0
};

/// Slack used when deciding whether an eigenvalue belongs to a domain.
inline constexpr double kDomainSlack = 1e-10;

HermitianMatrix apply_standard_function(const std::function<double(double)>& f,
                                        const HermitianMatrix& a,
                                        const Interval& domain = Interval::real_line());
HermitianMatrix apply_standard_function(const ScalarFunction& f, const HermitianMatrix& a);

/// Same, reusing an existing decomposition.
HermitianMatrix apply_standard_function(const std::function<double(double)>& f,
                                        const SpectralDecomposition& eig,
                                        const Interval& domain = Interval::real_line());

double normalized_trace(const HermitianMatrix& b);
Complex normalized_trace(const CMatrix& b);
/// Normalized trace of the product, tr(AB)/d, real for Hermitian factors.
double normalized_trace_product(const HermitianMatrix& a, const HermitianMatrix& b);
/// <A, B> = tr(A* B)/d.
Complex trace_inner(const CMatrix& a, const CMatrix& b);

double spectral_norm(const HermitianMatrix& a);
double lambda_min(const HermitianMatrix& a);
double lambda_max(const HermitianMatrix& a);

/// 1 + the largest spectral norm among the arguments.
double tolerance_scale(std::initializer_list<const HermitianMatrix*> mats);

struct PsdWitness {
  bool holds = false;
  double lambda_min = 0.0;
  CVector eigenvector;
};

/// Tests A <= B in the semidefinite order: lambda_min(B - A) >= -tol (1 + ||B - A||).
PsdWitness psd_order_holds(const HermitianMatrix& a, const HermitianMatrix& b, double tol);
/// Same test for arbitrary Hermitian matrices stored densely (used for operators).
PsdWitness psd_order_holds_dense(const CMatrix& a, const CMatrix& b, double tol);

/// Spectral clipping l_n(a) = min(max(a, 1/n), n).
HermitianMatrix clip_spectrum(const HermitianMatrix& a, double n);

/// tr[f(B) - f(A) - (B - A) f'(A)] / d.
double klein_gap(const ScalarFunction& f, const HermitianMatrix& a, const HermitianMatrix& b);

/// (1/2) tr[(A - B)^2 (f'(A) + f'(B))]/d - tr[(A - B)(f(A) - f(B))]/d.
double mean_value_trace_gap(const ScalarFunction& f, const HermitianMatrix& a,
                            const HermitianMatrix& b);

/// One summand f_k(a) g_k(b) of a generalized Klein certificate.
struct KleinTerm {
  std::function<double(double)> f;
  std::function<double(double)> g;
};

/// sum_k tr[f_k(A) g_k(B)]/d after probing sum_k f_k(a) g_k(b) >= 0 on a
/// 100 x 100 grid spanning the spectra of A and B (clipped to the declared
/// intervals). Throws CertificateRejected on the first negative grid value.
double generalized_klein_gap(std::span<const KleinTerm> terms, const HermitianMatrix& a,
                             const HermitianMatrix& b, const Interval& domain_a,
                             const Interval& domain_b);

}  // namespace phientropy
