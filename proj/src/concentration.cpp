#include "phientropy/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "phientropy/parallel.hpp"

namespace phientropy {

// ---------------------------------------------------------------- signed permutations

RMatrix SignedPermutation::matrix() const {
  const int d = dim();
  RMatrix m = RMatrix::Zero(d, d);
  for (int j = 0; j < d; ++j) m(perm[j], j) = signs[j];
  return m;
}

HermitianMatrix SignedPermutation::conjugate(const HermitianMatrix& y) const {
  if (y.dim() != dim()) throw ShapeError("signed permutation and matrix differ in size");
  const int d = dim();
  // (Pi* Y Pi)_{jk} = s_j s_k Y_{perm[j], perm[k]}.
  CMatrix out(d, d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) out(j, k) = static_cast<double>(signs[j] * signs[k]) * y(perm[j], perm[k]);
  return HermitianMatrix(out);
}

SignedPermutation random_signed_permutation(int d, Rng& rng) {
  if (d < 1) throw InvalidInput("signed permutation needs d >= 1");
  SignedPermutation sp;
  sp.perm.resize(d);
  std::iota(sp.perm.begin(), sp.perm.end(), 0);
  for (int i = d - 1; i > 0; --i) {
    const int j = std::uniform_int_distribution<int>(0, i)(rng);
    std::swap(sp.perm[i], sp.perm[j]);
  }
  sp.signs.resize(d);
  for (int i = 0; i < d; ++i) sp.signs[i] = std::uniform_int_distribution<int>(0, 1)(rng) ? 1 : -1;
  return sp;
}

std::vector<SignedPermutation> all_signed_permutations(int d) {
  if (d < 1 || d > 6) throw InvalidInput("signed permutations are enumerated for 1 <= d <= 6 only");
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<SignedPermutation> out;
  do {
    for (int mask = 0; mask < (1 << d); ++mask) {
      SignedPermutation sp{perm, std::vector<int>(d)};
      for (int i = 0; i < d; ++i) sp.signs[i] = (mask >> i) & 1 ? -1 : 1;
      out.push_back(std::move(sp));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

// ---------------------------------------------------------------- ensembles

Factor rademacher_factor() { return {{"+1", 0.5}, {"-1", 0.5}}; }

namespace {

double sign_of(int idx) { return idx == 0 ? 1.0 : -1.0; }

Ensemble make_ensemble(Ensemble::Kind kind, std::string name, ProductModel model) {
  return {kind, std::move(name), std::make_shared<const ProductModel>(std::move(model))};
}

}  // namespace

Ensemble symmetric_diagonal(int d, int m, std::uint64_t seed) {
  if (d < 1 || m < 1) throw InvalidInput("symmetric diagonal ensemble needs d, m >= 1");
  Rng rng = make_stream(seed, "symmetric-diagonal");
  std::vector<double> c(m);
  for (auto& v : c) v = std::uniform_real_distribution<double>(0.5, 1.5)(rng);
  std::vector<Factor> factors(static_cast<std::size_t>(d) * m, rademacher_factor());
  MatrixMap map = [d, m, c](std::span<const int> idx) {
    std::vector<double> diag(d, 0.0);
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < m; ++k) diag[j] += c[k] * sign_of(idx[j * m + k]);
    return HermitianMatrix::diagonal(diag);
  };
  return make_ensemble(Ensemble::Kind::SymmetricDiagonal, fmt::format("symmetric-diag(d={},m={})", d, m),
                       ProductModel(std::move(factors), d, std::move(map), false));
}

Ensemble wigner_sign(int d) {
  if (d < 1) throw InvalidInput("Wigner ensemble needs d >= 1");
  std::vector<Factor> factors(static_cast<std::size_t>(d) * (d + 1) / 2, rademacher_factor());
  MatrixMap map = [d](std::span<const int> idx) {
    RMatrix w(d, d);
    int k = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) w(i, j) = w(j, i) = sign_of(idx[k++]);
    return HermitianMatrix::from_real(w);
  };
  return make_ensemble(Ensemble::Kind::WignerSign, fmt::format("wigner-sign(d={})", d),
                       ProductModel(std::move(factors), d, std::move(map), false));
}

Ensemble rademacher_series(const std::vector<HermitianMatrix>& coefficients) {
  if (coefficients.empty()) throw InvalidInput("Rademacher series needs at least one coefficient");
  const int d = coefficients.front().dim();
  for (const auto& a : coefficients)
    if (a.dim() != d) throw ShapeError("series coefficients differ in dimension");
  std::vector<Factor> factors(coefficients.size(), rademacher_factor());
  MatrixMap map = [coefficients, d](std::span<const int> idx) {
    HermitianMatrix y = HermitianMatrix::zero(d);
    for (std::size_t i = 0; i < coefficients.size(); ++i) y += sign_of(idx[i]) * coefficients[i];
    return y;
  };
  return make_ensemble(Ensemble::Kind::RademacherSeries,
                       fmt::format("rademacher-series(d={},n={})", d, coefficients.size()),
                       ProductModel(std::move(factors), d, std::move(map), false));
}

Ensemble rademacher_diagonal(int d, int n, std::uint64_t seed) {
  if (d < 1 || n < 1) throw InvalidInput("Rademacher diagonal series needs d, n >= 1");
  Rng rng = make_stream(seed, "rademacher-diag");
  std::vector<HermitianMatrix> a;
  for (int i = 0; i < n; ++i) {
    const double c = std::uniform_real_distribution<double>(0.5, 1.5)(rng);
    std::vector<double> s(d);
    for (auto& v : s) v = std::uniform_int_distribution<int>(0, 1)(rng) ? c : -c;
    a.push_back(HermitianMatrix::diagonal(s));
  }
  Ensemble e = rademacher_series(a);
  e.name = fmt::format("rademacher-diag(d={},n={})", d, n);
  return e;
}

Ensemble symmetrized(const ProductModel& inner, const std::string& name) {
  const int d = inner.dim();
  auto group = std::make_shared<const std::vector<SignedPermutation>>(all_signed_permutations(d));
  std::vector<Factor> factors = inner.factors();
  Factor pi;
  const double p = 1.0 / static_cast<double>(group->size());
  for (std::size_t g = 0; g < group->size(); ++g) pi.push_back({fmt::format("pi{}", g), p});
  factors.push_back(std::move(pi));
  const MatrixMap inner_map = inner.map();
  const std::size_t n_inner = inner.factors().size();
  MatrixMap map = [inner_map, group, n_inner](std::span<const int> idx) {
    return (*group)[idx[n_inner]].conjugate(inner_map(idx.first(n_inner)));
  };
  return make_ensemble(Ensemble::Kind::Symmetrized, name,
                       ProductModel(std::move(factors), d, std::move(map), inner.psd(), inner.cap()));
}

Ensemble custom_ensemble(ProductModel model, const std::string& name) {
  return make_ensemble(Ensemble::Kind::Custom, name, std::move(model));
}

ProductModel map_model(const ProductModel& model, const std::function<double(double)>& f, bool psd) {
  const MatrixMap inner = model.map();
  return model.with_map(
      [inner, f](std::span<const int> idx) { return apply_standard_function(f, inner(idx)); }, psd);
}

ProductModel negated(const ProductModel& model) {
  const MatrixMap inner = model.map();
  return model.with_map([inner](std::span<const int> idx) { return -inner(idx); }, false);
}

// ---------------------------------------------------------------- invariance

namespace {

double deviation_from_scalar(const HermitianMatrix& m) {
  const HermitianMatrix dev = m - normalized_trace(m) * HermitianMatrix::identity(m.dim());
  return spectral_norm(dev);
}

}  // namespace

InvarianceReport invariance_diagnostic(const ProductModel& model, const ScalarFunction& f,
                                       std::size_t n_samples, std::uint64_t seed) {
  const int d = model.dim();
  InvarianceReport rep;
  if (model.enumerable()) {
    const auto values = parallel_map<HermitianMatrix>(
        model.size(), [&](std::size_t k) { return apply_standard_function(f, model.matrix(k)); });
    HermitianMatrix mean = HermitianMatrix::zero(d);
    for (std::size_t k = 0; k < values.size(); ++k) mean += model.probability(k) * values[k];
    rep.deviation = deviation_from_scalar(mean);
    rep.exact = true;
    return rep;
  }
  if (n_samples < 2) throw InvalidInput("invariance diagnostic needs at least two samples");
  constexpr std::size_t kBlock = 1000;
  const std::size_t blocks = (n_samples + kBlock - 1) / kBlock;
  const auto drawn = parallel_map<std::vector<HermitianMatrix>>(blocks, [&](std::size_t b) {
    Rng rng = make_stream(seed, "invariance-sample", b);
    const std::size_t count = std::min(kBlock, n_samples - b * kBlock);
    std::vector<HermitianMatrix> out;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s)
      out.push_back(apply_standard_function(f, model.evaluate(model.sample(rng))));
    return out;
  });
  const std::size_t groups = std::min<std::size_t>(100, n_samples);
  std::vector<HermitianMatrix> g_sum(groups, HermitianMatrix::zero(d));
  std::vector<double> g_n(groups, 0.0);
  std::size_t j = 0;
  for (const auto& block : drawn) {
    for (const auto& m : block) {
      const std::size_t g = j * groups / n_samples;
      g_sum[g] += m;
      g_n[g] += 1.0;
      ++j;
    }
  }
  HermitianMatrix total = HermitianMatrix::zero(d);
  for (const auto& g : g_sum) total += g;
  const double n = static_cast<double>(n_samples);
  rep.deviation = deviation_from_scalar((1.0 / n) * total);
  std::vector<double> loo(groups);
  double mean_loo = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    loo[g] = deviation_from_scalar((1.0 / (n - g_n[g])) * (total - g_sum[g]));
    mean_loo += loo[g];
  }
  mean_loo /= static_cast<double>(groups);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
  const double gd = static_cast<double>(groups);
  rep.standard_error = std::sqrt((gd - 1.0) / gd * ss);
  return rep;
}

InvarianceReport invariance_diagnostic(const Ensemble& ens, const ScalarFunction& f,
                                       std::size_t n_samples, std::uint64_t seed) {
  return invariance_diagnostic(ens.law(), f, n_samples, seed);
}

void require_invariant(const ProductModel& model) {
  const double s = model.norm_scale();
  const InvarianceReport r1 = invariance_diagnostic(model, ScalarFunction::identity(), 0, 0);
  if (r1.deviation > std::max(5.0 * r1.standard_error, 1e-10 * s))
    throw PreconditionFailed(fmt::format(
        "law is not invariant under signed permutation: E Y deviates from a scalar by {}", r1.deviation));
  const InvarianceReport r2 = invariance_diagnostic(model, ScalarFunction::square(), 0, 0);
  if (r2.deviation > std::max(5.0 * r2.standard_error, 1e-10 * s * s))
    throw PreconditionFailed(fmt::format(
        "law is not invariant under signed permutation: E Y^2 deviates from a scalar by {}", r2.deviation));
}

// ---------------------------------------------------------------- variance measures

std::vector<HermitianMatrix> variance_matrices(const ProductModel& model) {
  const std::size_t total = model.size();
  const int d = model.dim();
  std::vector<std::size_t> strides(model.n());
  for (int i = 0; i < model.n(); ++i) strides[i] = model.stride(i);
  return parallel_map<HermitianMatrix>(total, [&](std::size_t k) {
    const std::vector<int> idx = model.decode(k);
    const CMatrix y = model.matrix(k).matrix();
    CMatrix v = CMatrix::Zero(d, d);
    for (int i = 0; i < model.n(); ++i) {
      const auto& f = model.factors()[i];
      const std::size_t base = k - static_cast<std::size_t>(idx[i]) * strides[i];
      for (std::size_t b = 0; b < f.size(); ++b) {
        if (static_cast<int>(b) == idx[i] || f[b].p == 0.0) continue;
        const CMatrix diff = y - model.matrix(base + b * strides[i]).matrix();
        v += f[b].p * (diff * diff);
      }
    }
    return HermitianMatrix(v);
  });
}

VarianceReport variance_measure(const ProductModel& model) {
  const auto v = variance_matrices(model);
  VarianceReport rep;
  rep.v_scalar = -1.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double nk = spectral_norm(v[k]);
    if (nk > rep.v_scalar) {
      rep.v_scalar = nk;
      rep.worst_index = k;
    }
  }
  rep.v_scalar = std::max(rep.v_scalar, 0.0);
  rep.worst_x = model.decode(rep.worst_index);
  rep.v_matrix_worst = v[rep.worst_index];
  return rep;
}

SelfBoundingReport self_bounding_constant(const ProductModel& model) {
  const std::size_t total = model.size();
  const double scale = model.norm_scale();
  std::vector<HermitianMatrix> ys(total);
  for (std::size_t k = 0; k < total; ++k) {
    ys[k] = model.matrix(k);
    const double lo = lambda_min(ys[k]);
    if (lo < -1e-10 * scale) throw NotPositiveSemidefinite(lo, fmt::format("Y at outcome {}", k));
  }
  const auto v = variance_matrices(model);
  struct PerOutcome {
    double c = 0.0;
    double null_part = 0.0;
  };
  const auto per = parallel_map<PerOutcome>(total, [&](std::size_t k) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(ys[k].matrix());
    const RVector& lam = es.eigenvalues();
    const CMatrix& u = es.eigenvectors();
    std::vector<int> range, null;
    for (Eigen::Index j = 0; j < lam.size(); ++j)
      (lam(j) > 1e-10 * scale ? range : null).push_back(static_cast<int>(j));
    const CMatrix w = u.adjoint() * v[k].matrix() * u;
    PerOutcome out;
    if (!null.empty()) {
      CMatrix nn(null.size(), null.size());
      for (std::size_t a = 0; a < null.size(); ++a)
        for (std::size_t b = 0; b < null.size(); ++b) nn(a, b) = w(null[a], null[b]);
      out.null_part = spectral_norm(HermitianMatrix(nn));
    }
    if (!range.empty()) {
      CMatrix rr(range.size(), range.size());
      for (std::size_t a = 0; a < range.size(); ++a)
        for (std::size_t b = 0; b < range.size(); ++b)
          rr(a, b) = w(range[a], range[b]) / std::sqrt(lam(range[a]) * lam(range[b]));
      out.c = std::max(0.0, lambda_max(HermitianMatrix(rr)));
    }
    return out;
  });
  SelfBoundingReport rep;
  double worst_null = -1.0;
  std::size_t worst_null_index = 0;
  for (std::size_t k = 0; k < total; ++k) {
    if (per[k].null_part > worst_null) {
      worst_null = per[k].null_part;
      worst_null_index = k;
    }
    if (per[k].c > rep.c_star) {
      rep.c_star = per[k].c;
      rep.worst_index = k;
    }
  }
  rep.null_component = std::max(worst_null, 0.0);
  if (rep.null_component > 1e-10 * scale) {
    rep.feasible = false;
    rep.c_star = INFINITY;
    rep.worst_index = worst_null_index;
  }
  return rep;
}

// ---------------------------------------------------------------- tails

double tail_bound_value(int d, double v, double t) {
  if (d < 1) throw InvalidInput("tail bound needs d >= 1");
  if (!(v > 0.0)) throw InvalidInput(fmt::format("variance measure must be positive, got {}", v));
  if (!(t >= 0.0)) throw InvalidInput(fmt::format("tail level must be nonnegative, got {}", t));
  return d * std::exp(-t * t / (2.0 * v));
}

namespace {

bool exceeds(double lam, double t) { return lam >= t - 1e-12 * (1.0 + std::abs(t)); }

}  // namespace

std::vector<double> exact_tail(const ProductModel& model, const std::vector<double>& t_grid) {
  const HermitianMatrix mean = expectation(model);
  const auto lmax = parallel_map<double>(model.size(),
                                         [&](std::size_t k) { return lambda_max(model.matrix(k) - mean); });
  std::vector<double> out(t_grid.size(), 0.0);
  for (std::size_t g = 0; g < t_grid.size(); ++g)
    for (std::size_t k = 0; k < lmax.size(); ++k)
      if (exceeds(lmax[k], t_grid[g])) out[g] += model.probability(k);
  return out;
}

double wilson_standard_error(double p_hat, std::size_t n) {
  const double nn = static_cast<double>(n);
  return std::sqrt(p_hat * (1.0 - p_hat) / nn + 1.0 / (4.0 * nn * nn)) / (1.0 + 1.0 / nn);
}

namespace {

std::vector<HermitianMatrix> draw(const ProductModel& model, std::size_t n, std::uint64_t seed,
                                  const char* purpose) {
  constexpr std::size_t kBlock = 1000;
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  const auto drawn = parallel_map<std::vector<HermitianMatrix>>(blocks, [&](std::size_t b) {
    Rng rng = make_stream(seed, purpose, b);
    const std::size_t count = std::min(kBlock, n - b * kBlock);
    std::vector<HermitianMatrix> out;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) out.push_back(model.evaluate(model.sample(rng)));
    return out;
  });
  std::vector<HermitianMatrix> flat;
  flat.reserve(n);
  for (const auto& block : drawn) flat.insert(flat.end(), block.begin(), block.end());
  return flat;
}

}  // namespace

std::vector<TailPoint> empirical_tail(const ProductModel& model, std::size_t n_samples,
                                      std::uint64_t seed, const std::vector<double>& t_grid) {
  if (n_samples < 100) throw InvalidInput("empirical tail needs at least 100 samples");
  HermitianMatrix mean = HermitianMatrix::zero(model.dim());
  if (model.enumerable()) {
    mean = expectation(model);
  } else {
    const auto pilot = draw(model, 10 * n_samples, seed, "tail-mean");
    for (const auto& m : pilot) mean += m;
    mean = (1.0 / static_cast<double>(pilot.size())) * mean;
  }
  const auto samples = draw(model, n_samples, seed, "tail-sample");
  const auto lmax = parallel_map<double>(samples.size(),
                                         [&](std::size_t k) { return lambda_max(samples[k] - mean); });
  std::vector<TailPoint> out;
  for (double t : t_grid) {
    std::size_t hits = 0;
    for (double l : lmax) hits += exceeds(l, t) ? 1 : 0;
    const double p = static_cast<double>(hits) / static_cast<double>(n_samples);
    out.push_back({t, p, wilson_standard_error(p, n_samples)});
  }
  return out;
}

// ---------------------------------------------------------------- trace mgf

std::vector<double> default_theta_grid() {
  std::vector<double> g(20);
  const double lo = std::log(1e-2);
  const double hi = std::log(4.0);
  for (int i = 0; i < 20; ++i) g[i] = std::exp(lo + (hi - lo) * i / 19.0);
  return g;
}

TraceMgfCurve trace_mgf(const ProductModel& model, const std::vector<double>& theta_grid) {
  for (double th : theta_grid)
    if (!(th > 0.0) || !std::isfinite(th)) throw InvalidInput("theta grid must hold positive reals");
  const auto eigs = parallel_map<RVector>(model.size(), [&](std::size_t k) {
    return RVector(Eigen::SelfAdjointEigenSolver<CMatrix>(model.matrix(k).matrix(), Eigen::EigenvaluesOnly)
                       .eigenvalues());
  });
  TraceMgfCurve curve;
  curve.thetas.push_back(0.0);
  curve.thetas.insert(curve.thetas.end(), theta_grid.begin(), theta_grid.end());
  const double d = model.dim();
  for (double th : curve.thetas) {
    double m = 0.0;
    double dm = 0.0;
    for (std::size_t k = 0; k < eigs.size(); ++k) {
      double mk = 0.0;
      double dk = 0.0;
      for (Eigen::Index j = 0; j < eigs[k].size(); ++j) {
        const double e = std::exp(th * eigs[k](j));
        mk += e;
        dk += eigs[k](j) * e;
      }
      m += model.probability(k) * mk / d;
      dm += model.probability(k) * dk / d;
    }
    curve.values.push_back(th == 0.0 ? 1.0 : m);
    curve.derivatives.push_back(dm);
  }
  return curve;
}

bool mgf_is_convex(const TraceMgfCurve& c) {
  for (std::size_t i = 1; i + 1 < c.thetas.size(); ++i) {
    const double t0 = c.thetas[i - 1], t1 = c.thetas[i], t2 = c.thetas[i + 1];
    const double w = (t2 - t1) / (t2 - t0);
    const double chord = w * c.values[i - 1] + (1.0 - w) * c.values[i + 1];
    if (c.values[i] > chord + 1e-10 * (1.0 + std::abs(chord))) return false;
  }
  return true;
}

HerbstReport herbst_diagnostic(const ProductModel& model, const std::vector<double>& theta_grid) {
  const double scale = model.norm_scale();
  const double mean_trace = normalized_trace(expectation(model));
  if (std::abs(mean_trace) > 1e-10 * scale)
    throw PreconditionFailed(fmt::format("Y is not centered: E tr Y/d = {}", mean_trace));
  require_invariant(model);
  HerbstReport rep;
  rep.scale = scale;
  rep.v_scalar = variance_measure(model).v_scalar;
  const TraceMgfCurve curve = trace_mgf(model, theta_grid);
  rep.worst_diff_slack = INFINITY;
  rep.worst_herbst_slack = INFINITY;
  for (std::size_t i = 1; i < curve.thetas.size(); ++i) {
    HerbstRow row;
    row.theta = curve.thetas[i];
    row.m = curve.values[i];
    row.dm = curve.derivatives[i];
    const double lm = std::log(row.m);
    row.diff_slack = row.theta * row.theta * rep.v_scalar / 2.0 - (row.theta * row.dm / row.m - lm);
    row.herbst_slack = row.theta * rep.v_scalar / 2.0 - lm / row.theta;
    rep.worst_diff_slack = std::min(rep.worst_diff_slack, row.diff_slack);
    rep.worst_herbst_slack = std::min(rep.worst_herbst_slack, row.herbst_slack);
    rep.rows.push_back(row);
  }
  if (rep.rows.empty()) rep.worst_diff_slack = rep.worst_herbst_slack = 0.0;
  rep.passed = rep.worst_diff_slack >= -1e-9 * scale && rep.worst_herbst_slack >= -1e-9 * scale;
  return rep;
}

MomentReport moment_bound_check(const ProductModel& model, int q) {
  if (q < 2) throw InvalidInput(fmt::format("moment order must be an integer >= 2, got {}", q));
  const SelfBoundingReport sb = self_bounding_constant(model);
  if (!sb.feasible)
    throw PreconditionFailed(fmt::format("no finite self-bounding constant (null component {})",
                                         sb.null_component));
  require_invariant(model);
  MomentReport rep;
  rep.q = q;
  rep.c_star = sb.c_star;
  double moment = 0.0;
  double mean = 0.0;
  for (std::size_t k = 0; k < model.size(); ++k) {
    const HermitianMatrix y = model.matrix(k);
    const auto es = Eigen::SelfAdjointEigenSolver<CMatrix>(y.matrix(), Eigen::EigenvaluesOnly);
    double mk = 0.0;
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j)
      mk += std::pow(std::max(es.eigenvalues()(j), 0.0), q);
    moment += model.probability(k) * mk / y.dim();
    mean += model.probability(k) * normalized_trace(y);
  }
  rep.mean_trace = mean;
  rep.lhs = std::pow(moment, 1.0 / q);
  rep.rhs = mean + (q - 1) * rep.c_star / 2.0;
  rep.passed = rep.lhs <= rep.rhs + 1e-10 * model.norm_scale();
  return rep;
}

}  // namespace phientropy
