#include "phientropy/hermitian.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace phientropy {
namespace {

constexpr double kClusterTol = 1e-8;

void require_finite(const CMatrix& m) {
  if (!m.allFinite()) throw InvalidInput("matrix has non-finite entries");
}

void require_same_dim(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.dim() != b.dim()) throw ShapeError("matrix dimensions differ");
}

CMatrix scaled_columns(const CMatrix& v, const RVector& w) {
  return v * w.asDiagonal();
}

}  // namespace

HermitianMatrix::HermitianMatrix(const CMatrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("Hermitian matrix must be square");
  require_finite(m);
  m_ = (m + m.adjoint()) * 0.5;
  correction_ = (m - m_).norm();
}

HermitianMatrix HermitianMatrix::from_real(const RMatrix& m) {
  return HermitianMatrix(CMatrix(m.cast<Complex>()));
}

HermitianMatrix HermitianMatrix::identity(int d) {
  return HermitianMatrix(CMatrix::Identity(d, d), Trusted{});
}

HermitianMatrix HermitianMatrix::zero(int d) { return HermitianMatrix(CMatrix::Zero(d, d), Trusted{}); }

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> values) {
  const int d = static_cast<int>(values.size());
  CMatrix m = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) m(i, i) = values[i];
  require_finite(m);
  return HermitianMatrix(std::move(m), Trusted{});
}

HermitianMatrix HermitianMatrix::diagonal(std::initializer_list<double> values) {
  return diagonal(std::span<const double>(values.begin(), values.size()));
}

double HermitianMatrix::max_abs_entry() const {
  return m_.size() == 0 ? 0.0 : m_.cwiseAbs().maxCoeff();
}

bool HermitianMatrix::is_real() const { return m_.imag().isZero(0.0); }

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& o) const {
  if (dim() != o.dim()) throw ShapeError("matrix dimensions differ");
  return HermitianMatrix(m_ + o.m_, Trusted{});
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& o) const {
  if (dim() != o.dim()) throw ShapeError("matrix dimensions differ");
  return HermitianMatrix(m_ - o.m_, Trusted{});
}

HermitianMatrix HermitianMatrix::operator-() const { return HermitianMatrix(-m_, Trusted{}); }

HermitianMatrix HermitianMatrix::operator*(double s) const { return HermitianMatrix(m_ * s, Trusted{}); }

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& o) {
  if (dim() != o.dim()) throw ShapeError("matrix dimensions differ");
  m_ += o.m_;
  return *this;
}

HermitianMatrix HermitianMatrix::congruence(const CMatrix& u) const {
  if (u.rows() != dim()) throw ShapeError("congruence factor has the wrong shape");
  return HermitianMatrix(CMatrix(u.adjoint() * m_ * u));
}

SpectralDecomposition spectral_decompose(const HermitianMatrix& a) {
  require_finite(a.matrix());
  const int d = a.dim();
  SpectralDecomposition out;
  if (d == 0) return out;

  Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.matrix());
  if (solver.info() != Eigen::Success) throw InvalidInput("eigensolver failed to converge");
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();

  int start = 0;
  while (start < d) {
    int stop = start + 1;
    while (stop < d) {
      const double lam = out.eigenvalues(stop - 1);
      if (lam - out.eigenvalues(stop) > kClusterTol * (1.0 + std::abs(lam))) break;
      ++stop;
    }
    const int k = stop - start;
    const auto block = out.eigenvectors.middleCols(start, k);
    out.values.push_back(out.eigenvalues.segment(start, k).mean());
    out.projectors.emplace_back(block * block.adjoint());
    out.multiplicities.push_back(k);
    start = stop;
  }
  return out;
}

// Standard scalar functions ------------------------------------------------

ScalarFunction ScalarFunction::identity() {
  return {[](double t) { return t; }, [](double) { return 1.0; }, Interval::real_line(), "t"};
}

ScalarFunction ScalarFunction::square() {
  return {[](double t) { return t * t; }, [](double t) { return 2.0 * t; }, Interval::real_line(),
          "t^2"};
}

ScalarFunction ScalarFunction::cube() {
  return {[](double t) { return t * t * t; }, [](double t) { return 3.0 * t * t; },
          Interval::real_line(), "t^3"};
}

ScalarFunction ScalarFunction::power(double p) {
  return {[p](double t) { return std::pow(t, p); },
          [p](double t) { return p == 1.0 ? 1.0 : p * std::pow(t, p - 1.0); },
          Interval::nonnegative(), "t^" + std::to_string(p)};
}

ScalarFunction ScalarFunction::exp(double theta) {
  return {[theta](double t) { return std::exp(theta * t); },
          [theta](double t) { return theta * std::exp(theta * t); }, Interval::real_line(),
          "exp(" + std::to_string(theta) + " t)"};
}

ScalarFunction ScalarFunction::log() {
  return {[](double t) { return std::log(t); }, [](double t) { return 1.0 / t; },
          Interval::positive(), "log t"};
}

ScalarFunction ScalarFunction::t_log_t() {
  return {[](double t) { return t > 0.0 ? t * std::log(t) : 0.0; },
          [](double t) { return 1.0 + std::log(t); }, Interval::nonnegative(), "t log t"};
}

// Functional calculus --------------------------------------------------------

HermitianMatrix apply_standard_function(const std::function<double(double)>& f,
                                        const SpectralDecomposition& eig,
                                        const Interval& domain) {
  const int d = eig.dim();
  RVector fl(d);
  for (int i = 0; i < d; ++i) {
    const double lam = eig.eigenvalues(i);
    if (!domain.contains(lam, kDomainSlack)) throw DomainViolation(lam, domain.lo, domain.hi);
    fl(i) = f(std::clamp(lam, domain.lo, domain.hi));
  }
  return HermitianMatrix(CMatrix(scaled_columns(eig.eigenvectors, fl) * eig.eigenvectors.adjoint()));
}

HermitianMatrix apply_standard_function(const std::function<double(double)>& f,
                                        const HermitianMatrix& a, const Interval& domain) {
  return apply_standard_function(f, spectral_decompose(a), domain);
}

HermitianMatrix apply_standard_function(const ScalarFunction& f, const HermitianMatrix& a) {
  return apply_standard_function(f.value, a, f.domain);
}

double normalized_trace(const HermitianMatrix& b) {
  if (b.dim() == 0) return 0.0;
  return b.matrix().trace().real() / b.dim();
}

Complex normalized_trace(const CMatrix& b) {
  if (b.rows() != b.cols()) throw ShapeError("trace of a non-square matrix");
  if (b.rows() == 0) return 0.0;
  return b.trace() / static_cast<double>(b.rows());
}

double normalized_trace_product(const HermitianMatrix& a, const HermitianMatrix& b) {
  require_same_dim(a, b);
  // tr(AB) = sum_ij a_ij b_ji = sum_ij a_ij conj(b_ij) for Hermitian B.
  return (a.matrix().array() * b.matrix().conjugate().array()).sum().real() / a.dim();
}

Complex trace_inner(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("inner product shape mismatch");
  return (a.conjugate().array() * b.array()).sum() / static_cast<double>(a.rows());
}

double spectral_norm(const HermitianMatrix& a) {
  if (a.dim() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double lambda_min(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

double lambda_max(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(a.dim() - 1);
}

double tolerance_scale(std::initializer_list<const HermitianMatrix*> mats) {
  double s = 0.0;
  for (const auto* m : mats) s = std::max(s, spectral_norm(*m));
  return 1.0 + s;
}

PsdWitness psd_order_holds_dense(const CMatrix& a, const CMatrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("order test shape mismatch");
  const CMatrix diff = b - a;
  const CMatrix h = (diff + diff.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  PsdWitness w;
  w.lambda_min = solver.eigenvalues()(0);
  w.eigenvector = solver.eigenvectors().col(0);
  const double norm = solver.eigenvalues().cwiseAbs().maxCoeff();
  w.holds = w.lambda_min >= -tol * (1.0 + norm);
  return w;
}

PsdWitness psd_order_holds(const HermitianMatrix& a, const HermitianMatrix& b, double tol) {
  require_same_dim(a, b);
  return psd_order_holds_dense(a.matrix(), b.matrix(), tol);
}

HermitianMatrix clip_spectrum(const HermitianMatrix& a, double n) {
  if (!(n > 0.0)) throw InvalidInput("clipping level must be positive");
  const double lo = std::min(1.0 / n, n);
  const double hi = std::max(1.0 / n, n);
  return apply_standard_function([lo, hi](double t) { return std::clamp(t, lo, hi); }, a);
}

double klein_gap(const ScalarFunction& f, const HermitianMatrix& a, const HermitianMatrix& b) {
  require_same_dim(a, b);
  const auto ea = spectral_decompose(a);
  const HermitianMatrix fa = apply_standard_function(f.value, ea, f.domain);
  const HermitianMatrix dfa = apply_standard_function(f.derivative, ea, f.domain);
  const HermitianMatrix fb = apply_standard_function(f, b);
  return normalized_trace(fb) - normalized_trace(fa) - normalized_trace_product(b - a, dfa);
}

double mean_value_trace_gap(const ScalarFunction& f, const HermitianMatrix& a,
                            const HermitianMatrix& b) {
  require_same_dim(a, b);
  const auto ea = spectral_decompose(a);
  const auto eb = spectral_decompose(b);
  const HermitianMatrix diff = a - b;
  const HermitianMatrix diff_sq(CMatrix(diff.matrix() * diff.matrix()));
  const HermitianMatrix dsum = apply_standard_function(f.derivative, ea, f.domain) +
                               apply_standard_function(f.derivative, eb, f.domain);
  const HermitianMatrix fdiff =
      apply_standard_function(f.value, ea, f.domain) - apply_standard_function(f.value, eb, f.domain);
  return 0.5 * normalized_trace_product(diff_sq, dsum) - normalized_trace_product(diff, fdiff);
}

double generalized_klein_gap(std::span<const KleinTerm> terms, const HermitianMatrix& a,
                             const HermitianMatrix& b, const Interval& domain_a,
                             const Interval& domain_b) {
  require_same_dim(a, b);
  const auto ea = spectral_decompose(a);
  const auto eb = spectral_decompose(b);
  for (int i = 0; i < a.dim(); ++i) {
    if (!domain_a.contains(ea.eigenvalues(i), kDomainSlack))
      throw DomainViolation(ea.eigenvalues(i), domain_a.lo, domain_a.hi);
    if (!domain_b.contains(eb.eigenvalues(i), kDomainSlack))
      throw DomainViolation(eb.eigenvalues(i), domain_b.lo, domain_b.hi);
  }

  constexpr int kGrid = 100;
  auto grid = [](double lo, double hi, const Interval& dom, int k) {
    lo = std::clamp(lo, dom.lo, dom.hi);
    hi = std::clamp(hi, dom.lo, dom.hi);
    return lo + (hi - lo) * k / (kGrid - 1);
  };
  for (int i = 0; i < kGrid; ++i) {
    const double x = grid(ea.lambda_min(), ea.lambda_max(), domain_a, i);
    for (int j = 0; j < kGrid; ++j) {
      const double y = grid(eb.lambda_min(), eb.lambda_max(), domain_b, j);
      double sum = 0.0;
      double mag = 0.0;
      for (const auto& term : terms) {
        const double v = term.f(x) * term.g(y);
        sum += v;
        mag += std::abs(v);
      }
      if (sum < -1e-12 * (1.0 + mag)) throw CertificateRejected(x, y, sum);
    }
  }

  double total = 0.0;
  for (const auto& term : terms) {
    const HermitianMatrix fa = apply_standard_function(term.f, ea, domain_a);
    const HermitianMatrix gb = apply_standard_function(term.g, eb, domain_b);
    total += normalized_trace_product(fa, gb);
  }
  return total;
}

}  // namespace phientropy
