#include "phientropy/operator.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>
#include <fmt/format.h>

#include "phientropy/quadrature.hpp"

namespace phientropy {

CVector vec(const CMatrix& m) { return Eigen::Map<const CVector>(m.data(), m.size()); }

CMatrix unvec(const CVector& v, int d) {
  if (v.size() != static_cast<Eigen::Index>(d) * d) throw ShapeError("unvec: length is not d^2");
  return Eigen::Map<const CMatrix>(v.data(), d, d);
}

MatrixOperator::MatrixOperator(int d, CMatrix rep, bool self_adjoint)
    : d_(d), rep_(std::move(rep)), self_adjoint_(self_adjoint) {
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  if (d < 1 || rep_.rows() != n || rep_.cols() != n)
    throw ShapeError(fmt::format("operator rep must be {0}x{0}", n));
  if (!rep_.allFinite()) throw InvalidInput("operator rep has non-finite entries");
  if (self_adjoint_) {
    const double asym = (rep_ - rep_.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * (1.0 + rep_.cwiseAbs().maxCoeff()))
      throw InvalidInput(fmt::format("operator flagged self-adjoint has asymmetry {}", asym));
    rep_ = (0.5 * (rep_ + rep_.adjoint())).eval();
  }
}

MatrixOperator MatrixOperator::identity(int d) {
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  return MatrixOperator(d, CMatrix::Identity(n, n), true);
}

MatrixOperator MatrixOperator::zero(int d) {
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  return MatrixOperator(d, CMatrix::Zero(n, n), true);
}

CMatrix MatrixOperator::apply(const CMatrix& m) const {
  if (m.rows() != d_ || m.cols() != d_) throw ShapeError("operator applied to matrix of wrong size");
  return unvec(rep_ * vec(m), d_);
}

HermitianMatrix MatrixOperator::apply(const HermitianMatrix& m) const {
  return HermitianMatrix(apply(m.matrix()));
}

static void require_same(const MatrixOperator& a, const MatrixOperator& b) {
  if (a.dim() != b.dim()) throw ShapeError("operators act on different dimensions");
}

MatrixOperator MatrixOperator::operator+(const MatrixOperator& o) const {
  require_same(*this, o);
  return MatrixOperator(d_, rep_ + o.rep_, self_adjoint_ && o.self_adjoint_);
}

MatrixOperator MatrixOperator::operator-(const MatrixOperator& o) const {
  require_same(*this, o);
  return MatrixOperator(d_, rep_ - o.rep_, self_adjoint_ && o.self_adjoint_);
}

MatrixOperator MatrixOperator::operator*(double s) const {
  return MatrixOperator(d_, rep_ * s, self_adjoint_);
}

MatrixOperator MatrixOperator::compose(const MatrixOperator& other) const {
  require_same(*this, other);
  return MatrixOperator(d_, rep_ * other.rep_, false);
}

double MatrixOperator::norm() const {
  if (self_adjoint_) {
    const RVector ev = eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  }
  Eigen::JacobiSVD<CMatrix> svd(rep_);
  return svd.singularValues()(0);
}

RVector MatrixOperator::eigenvalues() const {
  if (!self_adjoint_) throw InvalidInput("eigenvalues requested for a non-self-adjoint operator");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rep_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double MatrixOperator::lambda_min() const { return eigenvalues()(0); }

MatrixOperator tensor_operator(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.dim() != b.dim()) throw ShapeError("tensor_operator: factors differ in size");
  return MatrixOperator(a.dim(), Eigen::kroneckerProduct(b.matrix().transpose(), a.matrix()).eval(),
                        true);
}

MatrixOperator schur_operator(const CMatrix& u, const RMatrix& f) {
  const int d = static_cast<int>(u.rows());
  const CMatrix left = Eigen::kroneckerProduct(u.conjugate(), u).eval();
  const CMatrix right = Eigen::kroneckerProduct(u.transpose(), u.adjoint()).eval();
  const RMatrix fv = f;
  const Eigen::Map<const RVector> diag(fv.data(), fv.size());
  CMatrix rep = left * diag.cast<Complex>().asDiagonal() * right;
  return MatrixOperator(d, std::move(rep), (f - f.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

MatrixOperator derivative_operator(const ScalarFunction& f, const HermitianMatrix& a) {
  const SpectralDecomposition eig = spectral_decompose(a);
  const int d = a.dim();
  RMatrix dd(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j)
      dd(i, j) = dd(j, i) = divided_difference(f, eig.eigenvalues(i), eig.eigenvalues(j));
  return schur_operator(eig.eigenvectors, dd);
}

MatrixOperator invert_operator(const MatrixOperator& t) {
  Eigen::JacobiSVD<CMatrix> svd(t.rep(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smin > 1e-12 * smax)) throw SingularOperator(smin);
  CMatrix inv = svd.matrixV() * sv.cwiseInverse().cast<Complex>().asDiagonal() * svd.matrixU().adjoint();
  if (t.self_adjoint()) inv = (0.5 * (inv + inv.adjoint())).eval();
  return MatrixOperator(t.dim(), std::move(inv), t.self_adjoint());
}

MatrixOperator apply_operator_function(const std::function<double(double)>& f,
                                       const MatrixOperator& t) {
  if (!t.self_adjoint()) throw InvalidInput("operator function needs a self-adjoint operator");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(t.rep());
  RVector fv = es.eigenvalues().unaryExpr(f);
  if (!fv.allFinite()) throw DomainViolation(es.eigenvalues()(0), -INFINITY, INFINITY);
  CMatrix rep = es.eigenvectors() * fv.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  return MatrixOperator(t.dim(), (0.5 * (rep + rep.adjoint())).eval(), true);
}

namespace {

void require_pd(const MatrixOperator& t, const char* what) {
  if (!t.self_adjoint()) throw NotPositiveDefinite(NAN, what);
  const RVector ev = t.eigenvalues();
  const double scale = 1.0 + std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  if (!(ev(0) > 1e-12 * scale)) throw NotPositiveDefinite(ev(0), what);
}

}  // namespace

MatrixOperator operator_mean(const std::function<double(double)>& f, const MatrixOperator& s,
                             const MatrixOperator& t) {
  require_same(s, t);
  require_pd(s, "first operator of the mean");
  require_pd(t, "second operator of the mean");
  const MatrixOperator root = apply_operator_function([](double x) { return std::sqrt(x); }, s);
  const MatrixOperator inv_root =
      apply_operator_function([](double x) { return 1.0 / std::sqrt(x); }, s);
  CMatrix inner = inv_root.rep() * t.rep() * inv_root.rep();
  inner = (0.5 * (inner + inner.adjoint())).eval();
  const MatrixOperator middle = apply_operator_function(f, MatrixOperator(s.dim(), inner, true));
  CMatrix rep = root.rep() * middle.rep() * root.rep();
  return MatrixOperator(s.dim(), (0.5 * (rep + rep.adjoint())).eval(), true);
}

double operator_mean_concavity_gap(const std::function<double(double)>& f, const MatrixOperator& s1,
                                   const MatrixOperator& t1, const MatrixOperator& s2,
                                   const MatrixOperator& t2, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must lie in [0, 1]");
  const double beta = 1.0 - alpha;
  const MatrixOperator mixed = operator_mean(f, s1 * alpha + s2 * beta, t1 * alpha + t2 * beta);
  const MatrixOperator gap =
      mixed - operator_mean(f, s1, t1) * alpha - operator_mean(f, s2, t2) * beta;
  return gap.lambda_min();
}

PsdWitness psd_order_holds(const MatrixOperator& s, const MatrixOperator& t, double tol) {
  require_same(s, t);
  return psd_order_holds_dense(s.rep(), t.rep(), tol);
}

namespace {

void require_pd(const HermitianMatrix& a) {
  const double lo = lambda_min(a);
  if (!(lo > 1e-12 * (1.0 + spectral_norm(a)))) throw NotPositiveDefinite(lo, "A");
}

MatrixOperator entropy_branch(const HermitianMatrix& a, int nodes) {
  const SpectralDecomposition eig = spectral_decompose(a);
  const auto& rule = gauss_legendre_unit(nodes);
  const int d = a.dim();
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  CMatrix acc = CMatrix::Zero(n, n);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double tau = rule.nodes[k];
    const HermitianMatrix left =
        apply_standard_function([tau](double x) { return std::pow(x, tau); }, eig, Interval::positive());
    const HermitianMatrix right = apply_standard_function(
        [tau](double x) { return std::pow(x, 1.0 - tau); }, eig, Interval::positive());
    acc += rule.weights[k] * tensor_operator(left, right).rep();
  }
  return MatrixOperator(d, (0.5 * (acc + acc.adjoint())).eval(), true);
}

}  // namespace

MatrixOperator power_branch_integral(double p, const HermitianMatrix& a, int nodes) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidInput(fmt::format("power branch needs p in (0, 1], got {}", p));
  if (nodes < 2) throw InvalidInput("quadrature needs at least two nodes");
  require_pd(a);
  const int d = a.dim();
  const HermitianMatrix ap = apply_standard_function([p](double x) { return std::pow(x, p); }, a,
                                                     Interval::positive());
  const MatrixOperator left = tensor_operator(ap, HermitianMatrix::identity(d));
  const MatrixOperator right = tensor_operator(HermitianMatrix::identity(d), ap);
  const double expo = (1.0 - p) / p;
  const auto& rule = gauss_legendre_unit(nodes);
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  CMatrix acc = CMatrix::Zero(n, n);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double tau = rule.nodes[k];
    const MatrixOperator sum = left * tau + right * (1.0 - tau);
    acc += rule.weights[k] *
           apply_operator_function([expo](double x) { return std::pow(x, expo); }, sum).rep();
  }
  acc /= p;
  return MatrixOperator(d, (0.5 * (acc + acc.adjoint())).eval(), true);
}

MatrixOperator integral_inverse_derivative(const PhiFunction& phi, const HermitianMatrix& a,
                                           int nodes) {
  if (phi.is_affine()) throw NoInverseDefined("affine phi has a vanishing derivative of psi");
  if (nodes < 2) throw InvalidInput("quadrature needs at least two nodes");
  require_pd(a);
  if (phi.kind() == PhiFunction::Kind::Entropy) return entropy_branch(a, nodes);
  const double q = phi.exponent();
  const double p = q - 1.0;
  if (!(p > 0.0 && p <= 1.0))
    throw InvalidInput(fmt::format("no integral representation for power exponent {}", q));
  // psi = q t^p, so the inverse derivative carries an extra 1/q.
  return power_branch_integral(p, a, nodes) * (1.0 / q);
}

MatrixOperator integral_inverse_derivative(const PhiFunction& phi, const HermitianMatrix& a) {
  int nodes = 64;
  MatrixOperator current = integral_inverse_derivative(phi, a, nodes);
  while (nodes < 1024) {
    nodes *= 2;
    MatrixOperator next = integral_inverse_derivative(phi, a, nodes);
    const double change = (next - current).norm();
    current = std::move(next);
    if (change < 1e-9) break;
  }
  return current;
}

}  // namespace phientropy
