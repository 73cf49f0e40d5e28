#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "phientropy/entropy.hpp"
#include "phientropy/hermitian.hpp"
#include "phientropy/random.hpp"

namespace phientropy {

/// Column j of the matrix has the single entry signs[j] in row perm[j].
struct SignedPermutation {
  std::vector<int> perm;
  std::vector<int> signs;

  int dim() const { return static_cast<int>(perm.size()); }
  RMatrix matrix() const;
  /// Pi* Y Pi.
  HermitianMatrix conjugate(const HermitianMatrix& y) const;
};

SignedPermutation random_signed_permutation(int d, Rng& rng);
/// All 2^d d! elements in a fixed order. d must not exceed 6.
std::vector<SignedPermutation> all_signed_permutations(int d);

/// A random matrix with a finite law, tagged with how it was built.
struct Ensemble {
  enum class Kind { SymmetricDiagonal, WignerSign, Symmetrized, RademacherSeries, Custom };
  Kind kind = Kind::Custom;
  std::string name;
  std::shared_ptr<const ProductModel> model;

  const ProductModel& law() const { return *model; }
  int dim() const { return model->dim(); }
};

/// Rademacher factor with labels "+1" and "-1".
Factor rademacher_factor();

/// Diagonal entries i.i.d., entry j equal to sum_k c_k x_{jk} with Rademacher x and
/// seeded coefficients c_k in [0.5, 1.5] shared by all entries (d m factors).
Ensemble symmetric_diagonal(int d, int m, std::uint64_t seed);
/// Symmetric sign matrix: independent Rademacher entries on and above the diagonal.
Ensemble wigner_sign(int d);
/// Y = sum_i x_i A_i with Rademacher x_i.
Ensemble rademacher_series(const std::vector<HermitianMatrix>& coefficients);
/// Rademacher series with A_i = c_i diag(s_i), c_i in [0.5, 1.5] and sign vectors s_i seeded.
Ensemble rademacher_diagonal(int d, int n, std::uint64_t seed);
/// Inner model conjugated by an independent uniform signed permutation (an extra factor).
Ensemble symmetrized(const ProductModel& inner, const std::string& name = "symmetrized");
/// Wraps an arbitrary model.
Ensemble custom_ensemble(ProductModel model, const std::string& name);

/// Model whose outputs are f(Y(x)) for the standard function f.
ProductModel map_model(const ProductModel& model, const std::function<double(double)>& f, bool psd);
/// -Y.
ProductModel negated(const ProductModel& model);

struct InvarianceReport {
  double deviation = 0.0;  // || E f(X) - tr(E f(X))/d I ||
  double standard_error = 0.0;
  bool exact = false;
};

/// Exact when the law is enumerable, otherwise N samples with a grouped jackknife error.
InvarianceReport invariance_diagnostic(const ProductModel& model, const ScalarFunction& f,
                                       std::size_t n_samples, std::uint64_t seed);
InvarianceReport invariance_diagnostic(const Ensemble& ens, const ScalarFunction& f,
                                       std::size_t n_samples, std::uint64_t seed);

/// sum_i E[(Y - Y'_i)^2 | x] at every outcome, in linear outcome order.
std::vector<HermitianMatrix> variance_matrices(const ProductModel& model);

struct VarianceReport {
  double v_scalar = 0.0;
  std::size_t worst_index = 0;
  std::vector<int> worst_x;
  HermitianMatrix v_matrix_worst;
};

VarianceReport variance_measure(const ProductModel& model);

struct SelfBoundingReport {
  bool feasible = true;
  double c_star = 0.0;
  std::size_t worst_index = 0;    // maximizer, or the offending outcome when infeasible
  double null_component = 0.0;   // largest ||P_null V P_null|| seen
};

/// Smallest c >= 0 with V(x) <= c Y(x) at every outcome.
SelfBoundingReport self_bounding_constant(const ProductModel& model);

/// d exp(-t^2 / (2 v)).
double tail_bound_value(int d, double v, double t);

/// P(lambda_max(Y - E Y) >= t) by enumeration.
std::vector<double> exact_tail(const ProductModel& model, const std::vector<double>& t_grid);

struct TailPoint {
  double t = 0.0;
  double frequency = 0.0;
  double standard_error = 0.0;  // Wilson, z = 1
};

std::vector<TailPoint> empirical_tail(const ProductModel& model, std::size_t n_samples,
                                      std::uint64_t seed, const std::vector<double>& t_grid);

/// sqrt(p(1-p)/n + 1/(4n^2)) / (1 + 1/n).
double wilson_standard_error(double p_hat, std::size_t n);

struct TraceMgfCurve {
  std::vector<double> thetas;  // starts with 0
  std::vector<double> values;
  std::vector<double> derivatives;  // E tr(Y e^{theta Y})/d
};

TraceMgfCurve trace_mgf(const ProductModel& model, const std::vector<double>& theta_grid);
/// Midpoint convexity on consecutive triples of the grid (slack 1e-10 (1 + |m|)).
bool mgf_is_convex(const TraceMgfCurve& curve);

/// 20 log-spaced points in [1e-2, 4].
std::vector<double> default_theta_grid();

struct HerbstRow {
  double theta = 0.0;
  double m = 0.0;
  double dm = 0.0;
  double diff_slack = 0.0;    // theta^2 V/2 - (theta m'/m - log m)
  double herbst_slack = 0.0;  // theta V/2 - log(m)/theta
};

struct HerbstReport {
  double v_scalar = 0.0;
  double scale = 1.0;
  std::vector<HerbstRow> rows;
  double worst_diff_slack = 0.0;
  double worst_herbst_slack = 0.0;
  bool passed = true;
};

/// Requires E tr Y = 0 and a passing invariance diagnostic; otherwise PreconditionFailed.
HerbstReport herbst_diagnostic(const ProductModel& model, const std::vector<double>& theta_grid);

struct MomentReport {
  int q = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double c_star = 0.0;
  double mean_trace = 0.0;
  bool passed = true;
};

/// [E tr Y^q/d]^{1/q} <= E tr Y/d + (q-1) c/2 with c = c_star.
MomentReport moment_bound_check(const ProductModel& model, int q);

/// Throws PreconditionFailed unless E f(Y) is a multiple of I for f = t and t^2.
void require_invariant(const ProductModel& model);

}  // namespace phientropy
