#include "phientropy/phi_class.hpp"

#include <cmath>

#include "phientropy/parallel.hpp"
#include "phientropy/random.hpp"

namespace phientropy {

MatrixOperator inverse_derivative_map(const PhiFunction& phi, const HermitianMatrix& a) {
  if (phi.is_affine()) throw NoInverseDefined("affine phi has a vanishing derivative of psi");
  const SpectralDecomposition eig = spectral_decompose(a);
  const double scale = 1.0 + std::max(std::abs(eig.lambda_max()), std::abs(eig.lambda_min()));
  if (!(eig.lambda_min() > 1e-12 * scale)) throw NotPositiveDefinite(eig.lambda_min(), "A");
  const ScalarFunction psi = phi.psi_view();
  const int d = a.dim();
  RMatrix f(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j)
      f(i, j) = f(j, i) = 1.0 / divided_difference(psi, eig.eigenvalues(i), eig.eigenvalues(j));
  return schur_operator(eig.eigenvectors, f);
}

ConcavitySample concavity_gap(const PhiFunction& phi, const HermitianMatrix& s,
                              const HermitianMatrix& t, double alpha) {
  const MatrixOperator is = inverse_derivative_map(phi, s);
  const MatrixOperator it = inverse_derivative_map(phi, t);
  const MatrixOperator im = inverse_derivative_map(phi, alpha * s + (1.0 - alpha) * t);
  const MatrixOperator diff = im - is * alpha - it * (1.0 - alpha);
  return {diff.lambda_min(), 1.0 + std::max({is.norm(), it.norm(), im.norm()})};
}

MembershipReport membership_concavity_check(const PhiFunction& phi, int d, std::size_t trials,
                                            std::uint64_t seed) {
  if (d < 1) throw InvalidInput("membership check needs d >= 1");
  if (trials < 1) throw InvalidInput("membership check needs at least one trial");
  struct Trial {
    HermitianMatrix s, t;
    double alpha = 0.0;
    ConcavitySample sample;
  };
  const auto results = parallel_map<Trial>(trials, [&](std::size_t k) {
    Rng rng = make_stream(seed, "membership", k);
    Trial tr;
    tr.s = random_positive_definite(d, rng);
    tr.t = random_positive_definite(d, rng);
    tr.alpha = 0.1 * static_cast<double>(1 + std::uniform_int_distribution<int>(0, 8)(rng));
    tr.sample = concavity_gap(phi, tr.s, tr.t, tr.alpha);
    return tr;
  });
  MembershipReport rep;
  rep.phi = phi.name();
  rep.d = d;
  rep.trials = trials;
  rep.min_gap = INFINITY;
  rep.min_ratio = INFINITY;
  for (std::size_t k = 0; k < trials; ++k) {
    const Trial& tr = results[k];
    rep.alphas.push_back(tr.alpha);
    rep.gaps.push_back(tr.sample.gap);
    rep.scales.push_back(tr.sample.scale);
    rep.min_gap = std::min(rep.min_gap, tr.sample.gap);
    const double ratio = tr.sample.gap / tr.sample.scale;
    if (ratio < rep.min_ratio) {
      rep.min_ratio = ratio;
      rep.worst = {tr.s, tr.t, tr.alpha, k, tr.sample.gap, tr.sample.scale};
    }
  }
  rep.passed = rep.min_ratio >= -1e-7;
  return rep;
}

namespace {

double quadratic_value(const PhiFunction& phi, const HermitianMatrix& y, const HermitianMatrix& k) {
  const MatrixOperator dpsi = derivative_operator(phi.psi_view(), y);
  return trace_inner(k.matrix(), dpsi.apply(k.matrix())).real();
}

}  // namespace

double quadratic_form_convexity_gap(const PhiFunction& phi, const std::vector<QuadraticAtom>& atoms) {
  if (phi.is_affine()) throw NoInverseDefined("affine phi has a vanishing derivative of psi");
  if (atoms.empty()) throw InvalidInput("empty random pair");
  const int d = atoms.front().y.dim();
  double total_p = 0.0;
  double mean_form = 0.0;
  HermitianMatrix ey = HermitianMatrix::zero(d);
  HermitianMatrix ek = HermitianMatrix::zero(d);
  for (const auto& atom : atoms) {
    if (atom.y.dim() != d || atom.k.dim() != d) throw ShapeError("atoms differ in dimension");
    if (!(atom.p >= 0.0)) throw InvalidInput("negative probability");
    const double lo = lambda_min(atom.y);
    if (!(lo > 1e-12 * (1.0 + spectral_norm(atom.y)))) throw NotPositiveDefinite(lo, "Y");
    total_p += atom.p;
    mean_form += atom.p * quadratic_value(phi, atom.y, atom.k);
    ey += atom.p * atom.y;
    ek += atom.p * atom.k;
  }
  if (std::abs(total_p - 1.0) > 1e-12) throw InvalidInput("probabilities do not sum to one");
  return mean_form - quadratic_value(phi, ey, ek);
}

double quadratic_form_convexity_gap(const PhiFunction& phi, int d, std::uint64_t seed) {
  Rng rng = make_stream(seed, "quadratic-form");
  const double p = std::uniform_real_distribution<double>(0.2, 0.8)(rng);
  std::vector<QuadraticAtom> atoms(2);
  atoms[0].p = p;
  atoms[1].p = 1.0 - p;
  for (auto& atom : atoms) {
    atom.y = random_positive_definite(d, rng);
    atom.k = random_hermitian(d, rng);
  }
  return quadratic_form_convexity_gap(phi, atoms);
}

}  // namespace phientropy
