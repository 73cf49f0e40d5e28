#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "phientropy/concentration.hpp"
#include "phientropy/entropy.hpp"
#include "phientropy/random.hpp"

namespace testing {

using namespace phientropy;

/// Table-driven product model with random factor laws and random PSD outputs.
/// A quarter of the models get rank-deficient outputs when `allow_singular`.
inline ProductModel random_psd_model(std::uint64_t seed, std::size_t index, bool allow_singular,
                                     int max_n = 4, int max_size = 3, int max_d = 4,
                                     int fixed_d = 0) {
  Rng rng = make_stream(seed, "test-model", index);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int n = uni(1, max_n);
  const int d = fixed_d > 0 ? fixed_d : uni(1, max_d);
  const bool singular = allow_singular && d > 1 && uni(0, 3) == 0;
  std::vector<Factor> factors;
  std::size_t count = 1;
  for (int i = 0; i < n; ++i) {
    const int k = uni(2, max_size);
    std::vector<double> w(k);
    double total = 0.0;
    for (auto& x : w) total += x = std::exponential_distribution<double>(1.0)(rng) + 0.05;
    Factor f;
    for (int a = 0; a < k; ++a) f.push_back({std::to_string(a), w[a] / total});
    factors.push_back(std::move(f));
    count *= k;
  }
  auto table = std::make_shared<std::vector<HermitianMatrix>>();
  for (std::size_t k = 0; k < count; ++k) {
    if (singular) {
      const CMatrix g = random_complex_gaussian(d, d - 1, rng);
      table->push_back(HermitianMatrix(g * g.adjoint() / d));
    } else {
      table->push_back(random_positive_definite(d, rng) * (1.0 / d));
    }
  }
  std::vector<std::size_t> strides(n, 1);
  for (int i = 1; i < n; ++i) strides[i] = strides[i - 1] * factors[i - 1].size();
  MatrixMap map = [table, strides](std::span<const int> idx) {
    std::size_t lin = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) lin += strides[i] * idx[i];
    return (*table)[lin];
  };
  return ProductModel(std::move(factors), d, map, true);
}

/// Random PD candidate T(x) on the outcome space of `model`.
inline MatrixMap random_candidate(const ProductModel& model, Rng& rng) {
  auto table = std::make_shared<std::vector<HermitianMatrix>>();
  for (std::size_t k = 0; k < model.size(); ++k)
    table->push_back(random_positive_definite(model.dim(), rng) * (1.0 / model.dim()));
  const ProductModel* m = &model;
  return [table, m](std::span<const int> idx) { return (*table)[m->encode(idx)]; };
}

inline Ensemble random_inner_symmetrized(int d, int n, Rng& rng) {
  std::vector<HermitianMatrix> coeffs;
  for (int i = 0; i < n; ++i) coeffs.push_back(random_hermitian(d, rng) * 0.5);
  return symmetrized(rademacher_series(coeffs).law());
}

/// Seeded invariant ensembles of the three kinds.
inline std::vector<Ensemble> invariant_family(std::uint64_t seed, int count) {
  Rng rng = make_stream(seed, "test-family");
  std::vector<Ensemble> out;
  for (int k = 0; k < count; ++k) {
    switch (k % 4) {
      case 0: out.push_back(rademacher_diagonal(1 + k % 4, 2 + k % 9, seed + k)); break;
      case 1: out.push_back(wigner_sign(1 + k % 3)); break;
      case 2: out.push_back(symmetric_diagonal(1 + k % 3, 1 + k % 3, seed + k)); break;
      default: out.push_back(random_inner_symmetrized(1 + k % 2, 1 + k % 3, rng)); break;
    }
  }
  return out;
}

// ------------------------------------------------------------------ scalar oracle

/// Scalar convex function written out by hand: t log t or t^q.
struct ScalarPhi {
  bool entropy = true;
  double q = 2.0;
  double phi(double t) const { return entropy ? (t > 0.0 ? t * std::log(t) : 0.0) : std::pow(t, q); }
  double psi(double t) const { return entropy ? 1.0 + std::log(t) : q * std::pow(t, q - 1.0); }
};

/// A d = 1 product law flattened to plain arrays.
struct ScalarLaw {
  std::vector<std::vector<double>> probs;  // per factor
  std::vector<double> z;                   // first factor fastest

  std::size_t size() const { return z.size(); }
  std::vector<int> digits(std::size_t k) const {
    std::vector<int> out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
      out[i] = static_cast<int>(k % probs[i].size());
      k /= probs[i].size();
    }
    return out;
  }
  std::size_t index(const std::vector<int>& x) const {
    std::size_t k = 0, s = 1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      k += s * x[i];
      s *= probs[i].size();
    }
    return k;
  }
  double p(std::size_t k) const {
    const auto x = digits(k);
    double out = 1.0;
    for (std::size_t i = 0; i < probs.size(); ++i) out *= probs[i][x[i]];
    return out;
  }
};

inline ScalarLaw scalar_law_of(const ProductModel& m) {
  ScalarLaw law;
  for (const auto& f : m.factors()) {
    std::vector<double> p;
    for (const auto& o : f) p.push_back(o.p);
    law.probs.push_back(p);
  }
  for (std::size_t k = 0; k < m.size(); ++k) law.z.push_back(m.matrix(k)(0, 0).real());
  return law;
}

inline double scalar_mean(const ScalarLaw& l, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t k = 0; k < l.size(); ++k) s += l.p(k) * v[k];
  return s;
}

inline double scalar_entropy(const ScalarPhi& f, const ScalarLaw& l) {
  double a = 0.0, m = 0.0;
  for (std::size_t k = 0; k < l.size(); ++k) {
    a += l.p(k) * f.phi(l.z[k]);
    m += l.p(k) * l.z[k];
  }
  return a - f.phi(m);
}

/// E over x_{-i} of [E_i phi(Z) - phi(E_i Z)].
inline double scalar_conditional(const ScalarPhi& f, const ScalarLaw& l, int i) {
  double total = 0.0;
  for (std::size_t k = 0; k < l.size(); ++k) {
    auto x = l.digits(k);
    if (x[i] != 0) continue;
    double prest = 1.0;
    for (std::size_t j = 0; j < l.probs.size(); ++j)
      if (static_cast<int>(j) != i) prest *= l.probs[j][x[j]];
    double a = 0.0, m = 0.0;
    for (std::size_t b = 0; b < l.probs[i].size(); ++b) {
      x[i] = static_cast<int>(b);
      const double zb = l.z[l.index(x)];
      a += l.probs[i][b] * f.phi(zb);
      m += l.probs[i][b] * zb;
    }
    total += prest * (a - f.phi(m));
  }
  return total;
}

inline double scalar_exchangeability(const ScalarPhi& f, const ScalarLaw& l) {
  double total = 0.0;
  for (std::size_t i = 0; i < l.probs.size(); ++i)
    for (std::size_t k = 0; k < l.size(); ++k) {
      auto x = l.digits(k);
      const double z = l.z[k];
      for (std::size_t b = 0; b < l.probs[i].size(); ++b) {
        x[i] = static_cast<int>(b);
        const double w = l.z[l.index(x)];
        total += 0.5 * l.p(k) * l.probs[i][b] * (z - w) * (f.psi(z) - f.psi(w));
      }
    }
  return total;
}

inline double scalar_symmetrized(const ScalarPhi& f, const ScalarLaw& l) {
  double total = 0.0;
  for (std::size_t k = 0; k < l.size(); ++k)
    for (std::size_t j = 0; j < l.size(); ++j)
      total += 0.5 * l.p(k) * l.p(j) * (l.z[k] - l.z[j]) * (f.psi(l.z[k]) - f.psi(l.z[j]));
  return total;
}

inline double scalar_infimum(const ScalarPhi& f, const ScalarLaw& l, double a) {
  double total = 0.0;
  for (std::size_t k = 0; k < l.size(); ++k)
    total += l.p(k) * (f.phi(l.z[k]) - f.phi(a) - (l.z[k] - a) * f.psi(a));
  return total;
}

inline double scalar_supremum(const ScalarPhi& f, const ScalarLaw& l, const std::vector<double>& t) {
  const double et = scalar_mean(l, t);
  double total = 0.0;
  for (std::size_t k = 0; k < l.size(); ++k)
    total += l.p(k) * ((f.psi(t[k]) - f.psi(et)) * (l.z[k] - t[k]) + f.phi(t[k]) - f.phi(et));
  return total;
}

/// E_a [entropy over the rest at X_i = a] - entropy over the rest of E_i Z.
inline double scalar_conditional_jensen(const ScalarPhi& f, const ScalarLaw& l, int i) {
  const std::size_t k_i = l.probs[i].size();
  std::vector<double> ez(l.size(), 0.0);  // E_i Z as a function of x (constant in x_i)
  for (std::size_t k = 0; k < l.size(); ++k) {
    auto x = l.digits(k);
    double m = 0.0;
    for (std::size_t b = 0; b < k_i; ++b) {
      x[i] = static_cast<int>(b);
      m += l.probs[i][b] * l.z[l.index(x)];
    }
    ez[k] = m;
  }
  auto rest_prob = [&](const std::vector<int>& x) {
    double p = 1.0;
    for (std::size_t j = 0; j < l.probs.size(); ++j)
      if (static_cast<int>(j) != i) p *= l.probs[j][x[j]];
    return p;
  };
  double lhs = 0.0;
  for (std::size_t a = 0; a < k_i; ++a) {
    double ephi = 0.0, ez_rest = 0.0;
    for (std::size_t k = 0; k < l.size(); ++k) {
      const auto x = l.digits(k);
      if (x[i] != static_cast<int>(a)) continue;
      ephi += rest_prob(x) * f.phi(l.z[k]);
      ez_rest += rest_prob(x) * l.z[k];
    }
    lhs += l.probs[i][a] * (ephi - f.phi(ez_rest));
  }
  double ephi = 0.0, emean = 0.0;
  for (std::size_t k = 0; k < l.size(); ++k) {
    const auto x = l.digits(k);
    if (x[i] != 0) continue;
    ephi += rest_prob(x) * f.phi(ez[k]);
    emean += rest_prob(x) * ez[k];
  }
  return lhs - (ephi - f.phi(emean));
}

// ------------------------------------------------------------------ matrix oracles

/// Dense Kronecker product by explicit loops.
inline CMatrix kron_loops(const CMatrix& a, const CMatrix& b) {
  const auto ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
  CMatrix out(ra * rb, ca * cb);
  for (Eigen::Index i = 0; i < ra; ++i)
    for (Eigen::Index j = 0; j < ca; ++j)
      for (Eigen::Index k = 0; k < rb; ++k)
        for (Eigen::Index l = 0; l < cb; ++l) out(i * rb + k, j * cb + l) = a(i, j) * b(k, l);
  return out;
}

/// Matrix logarithm and powers through Eigen's Schur-Pade routines.
inline CMatrix pade_log(const CMatrix& a) { return a.log(); }
inline CMatrix pade_pow(const CMatrix& a, double p) { return a.pow(p); }
inline CMatrix pade_exp(const CMatrix& a) { return a.exp(); }

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing
