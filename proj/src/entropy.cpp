#include "phientropy/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "phientropy/parallel.hpp"

namespace phientropy {

// ---------------------------------------------------------------- ProductModel

ProductModel::ProductModel(std::vector<Factor> factors, int d, MatrixMap map, bool psd,
                           std::size_t cap)
    : factors_(std::move(factors)), d_(d), map_(std::move(map)), psd_(psd), cap_(cap) {
  if (d < 1) throw InvalidInput("model dimension must be positive");
  if (factors_.empty()) throw InvalidInput("model needs at least one factor");
  if (!map_) throw InvalidInput("model needs a matrix map");
  strides_.resize(factors_.size());
  double count = 1.0;
  std::size_t stride = 1;
  for (std::size_t j = 0; j < factors_.size(); ++j) {
    const Factor& f = factors_[j];
    if (f.empty()) throw InvalidInput(fmt::format("factor {} has no outcomes", j));
    double total = 0.0;
    for (const auto& o : f) {
      if (!(o.p >= 0.0) || !std::isfinite(o.p))
        throw InvalidInput(fmt::format("factor {} has an invalid probability", j));
      total += o.p;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw InvalidInput(fmt::format("factor {} probabilities sum to {}", j, total));
    strides_[j] = stride;
    count *= static_cast<double>(f.size());
    if (count <= static_cast<double>(cap_)) stride *= f.size();
  }
  count_ = count;
  if (!enumerable()) return;

  const std::size_t total = static_cast<std::size_t>(count_);
  probs_.resize(total);
  for (std::size_t k = 0; k < total; ++k) {
    double p = 1.0;
    std::size_t rest = k;
    for (const auto& f : factors_) {
      p *= f[rest % f.size()].p;
      rest /= f.size();
    }
    probs_[k] = p;
  }
  cache_ = parallel_map<HermitianMatrix>(total, [&](std::size_t k) { return evaluate(decode(k)); });
  double norm = 0.0;
  for (std::size_t k = 0; k < total; ++k) {
    const double nk = spectral_norm(cache_[k]);
    norm = std::max(norm, nk);
    if (psd_) {
      const double lo = lambda_min(cache_[k]);
      if (lo < -1e-10 * (1.0 + nk))
        throw NotPositiveSemidefinite(lo, fmt::format("model output at outcome {}", k));
    }
  }
  norm_scale_ = 1.0 + norm;
}

ProductModel ProductModel::from_table(
    std::vector<Factor> factors, int d,
    const std::vector<std::pair<std::vector<std::string>, HermitianMatrix>>& entries, bool psd,
    std::size_t cap) {
  std::vector<std::map<std::string, int>> lookup(factors.size());
  for (std::size_t j = 0; j < factors.size(); ++j) {
    for (std::size_t a = 0; a < factors[j].size(); ++a) {
      if (!lookup[j].emplace(factors[j][a].label, static_cast<int>(a)).second)
        throw InvalidInput(fmt::format("factor {} repeats label '{}'", j, factors[j][a].label));
    }
  }
  auto table = std::make_shared<std::map<std::vector<int>, HermitianMatrix>>();
  for (const auto& [labels, m] : entries) {
    if (labels.size() != factors.size())
      throw InvalidInput(fmt::format("table entry has {} labels, expected {}", labels.size(), factors.size()));
    if (m.dim() != d) throw ShapeError(fmt::format("table entry has dimension {}, expected {}", m.dim(), d));
    std::vector<int> idx(labels.size());
    for (std::size_t j = 0; j < labels.size(); ++j) {
      const auto it = lookup[j].find(labels[j]);
      if (it == lookup[j].end())
        throw InvalidInput(fmt::format("unknown label '{}' for factor {}", labels[j], j));
      idx[j] = it->second;
    }
    if (!table->emplace(idx, m).second) throw InvalidInput("table lists an outcome twice");
  }
  MatrixMap map = [table](std::span<const int> idx) {
    const auto it = table->find(std::vector<int>(idx.begin(), idx.end()));
    if (it == table->end()) throw InvalidInput("table map is missing an outcome");
    return it->second;
  };
  return ProductModel(std::move(factors), d, std::move(map), psd, cap);
}

std::size_t ProductModel::size() const {
  if (!enumerable()) throw TooLargeToEnumerate(count_, cap_);
  return static_cast<std::size_t>(count_);
}

std::vector<int> ProductModel::decode(std::size_t linear) const {
  std::vector<int> idx(factors_.size());
  for (std::size_t j = 0; j < factors_.size(); ++j) {
    idx[j] = static_cast<int>(linear % factors_[j].size());
    linear /= factors_[j].size();
  }
  return idx;
}

std::size_t ProductModel::encode(std::span<const int> idx) const {
  if (idx.size() != factors_.size()) throw InvalidInput("outcome tuple has the wrong length");
  std::size_t k = 0;
  for (std::size_t j = factors_.size(); j-- > 0;) {
    if (idx[j] < 0 || static_cast<std::size_t>(idx[j]) >= factors_[j].size())
      throw InvalidInput("outcome index out of range");
    k = k * factors_[j].size() + static_cast<std::size_t>(idx[j]);
  }
  return k;
}

double ProductModel::probability(std::size_t linear) const { return probs_.at(linear); }

HermitianMatrix ProductModel::matrix(std::size_t linear) const {
  if (linear < cache_.size()) return cache_[linear];
  return evaluate(decode(linear));
}

HermitianMatrix ProductModel::evaluate(std::span<const int> idx) const {
  HermitianMatrix z = map_(idx);
  if (z.dim() != d_) throw ShapeError(fmt::format("map returned dimension {}, expected {}", z.dim(), d_));
  return z;
}

double ProductModel::norm_scale() const {
  size();
  return norm_scale_;
}

std::size_t ProductModel::stride(int i) const {
  size();
  return strides_.at(i);
}

std::vector<int> ProductModel::sample(Rng& rng) const {
  std::vector<int> idx(factors_.size());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t j = 0; j < factors_.size(); ++j) {
    const double u = unif(rng);
    double acc = 0.0;
    int pick = static_cast<int>(factors_[j].size()) - 1;
    for (std::size_t a = 0; a < factors_[j].size(); ++a) {
      acc += factors_[j][a].p;
      if (u < acc) {
        pick = static_cast<int>(a);
        break;
      }
    }
    while (pick > 0 && factors_[j][pick].p == 0.0) --pick;
    idx[j] = pick;
  }
  return idx;
}

ProductModel ProductModel::with_map(MatrixMap map, bool psd) const {
  return ProductModel(factors_, d_, std::move(map), psd, cap_);
}

// ---------------------------------------------------------------- helpers

namespace {

Eigen::SelfAdjointEigenSolver<CMatrix> eig_of(const HermitianMatrix& z) {
  return Eigen::SelfAdjointEigenSolver<CMatrix>(z.matrix());
}

template <class F>
HermitianMatrix clamped_function(const HermitianMatrix& z, F f) {
  const auto es = eig_of(z);
  RVector v = es.eigenvalues().unaryExpr([&](double x) { return f(std::max(x, 0.0)); });
  if (!v.allFinite()) throw DomainViolation(es.eigenvalues()(0), 0.0, INFINITY);
  const CMatrix& u = es.eigenvectors();
  return HermitianMatrix(CMatrix(u * v.cast<Complex>().asDiagonal() * u.adjoint()));
}

void require_psd_model(const ProductModel& model) {
  const std::size_t total = model.size();
  if (model.psd()) return;
  for (std::size_t k = 0; k < total; ++k) {
    const HermitianMatrix z = model.matrix(k);
    const double lo = lambda_min(z);
    if (lo < -1e-10 * (1.0 + spectral_norm(z)))
      throw NotPositiveSemidefinite(lo, fmt::format("model output at outcome {}", k));
  }
}

void require_index(const ProductModel& model, int i) {
  if (i < 0 || i >= model.n())
    throw InvalidInput(fmt::format("coordinate index {} outside [0, {})", i, model.n()));
}

/// Outcomes sharing x_{-i}: a base index plus the members base + a * stride.
struct Block {
  double p_rest = 1.0;
  std::vector<std::size_t> members;
};

Block block_of(const ProductModel& model, int i, std::size_t rest) {
  const std::size_t s = model.stride(i);
  const std::size_t r = model.factors()[i].size();
  const std::size_t base = rest % s + (rest / s) * s * r;
  Block b;
  const std::vector<int> idx = model.decode(base);
  for (int j = 0; j < model.n(); ++j)
    if (j != i) b.p_rest *= model.factors()[j][idx[j]].p;
  b.members.resize(r);
  for (std::size_t a = 0; a < r; ++a) b.members[a] = base + a * s;
  return b;
}

std::size_t block_count(const ProductModel& model, int i) {
  return model.size() / model.factors()[i].size();
}

double ordered_sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::vector<double> trace_phi_all(const PhiFunction& phi, const ProductModel& model) {
  return parallel_map<double>(model.size(),
                              [&](std::size_t k) { return trace_phi(phi, model.matrix(k)); });
}

double expected(const ProductModel& model, const std::vector<double>& v) {
  double acc = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) acc += model.probability(k) * v[k];
  return acc;
}

double min_eigenvalue_over(const ProductModel& model) {
  double lo = INFINITY;
  for (std::size_t k = 0; k < model.size(); ++k) lo = std::min(lo, lambda_min(model.matrix(k)));
  return lo;
}

/// Shift used before psi is evaluated on outputs of a PSD model.
double psi_shift(const PhiFunction& phi, const ProductModel& model) {
  if (!phi.psi_singular_at_zero()) return 0.0;
  if (min_eigenvalue_over(model) > 0.0) return 0.0;
  return 1e-8 * model.norm_scale();
}

std::vector<HermitianMatrix> psi_all(const PhiFunction& phi, const ProductModel& model, double shift) {
  const int d = model.dim();
  return parallel_map<HermitianMatrix>(model.size(), [&](std::size_t k) {
    HermitianMatrix z = model.matrix(k);
    if (shift > 0.0) z += shift * HermitianMatrix::identity(d);
    return psi_of(phi, z);
  });
}

double pair_term(const HermitianMatrix& za, const HermitianMatrix& zb, const HermitianMatrix& pa,
                 const HermitianMatrix& pb) {
  return normalized_trace_product(za - zb, pa - pb);
}

}  // namespace

double trace_phi(const PhiFunction& phi, const HermitianMatrix& z) {
  const auto es = Eigen::SelfAdjointEigenSolver<CMatrix>(z.matrix(), Eigen::EigenvaluesOnly);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
    acc += phi.phi(std::max(es.eigenvalues()(k), 0.0));
  return acc / z.dim();
}

HermitianMatrix phi_of(const PhiFunction& phi, const HermitianMatrix& z) {
  return clamped_function(z, [&](double x) { return phi.phi(x); });
}

HermitianMatrix psi_of(const PhiFunction& phi, const HermitianMatrix& z) {
  return clamped_function(z, [&](double x) { return phi.psi(x); });
}

double entropy_scale(const PhiFunction& phi, const ProductModel& model) {
  double m = 0.0;
  for (std::size_t k = 0; k < model.size(); ++k) {
    const auto es = Eigen::SelfAdjointEigenSolver<CMatrix>(model.matrix(k).matrix(), Eigen::EigenvaluesOnly);
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
      const double lam = std::max(es.eigenvalues()(j), 0.0);
      m = std::max({m, std::abs(es.eigenvalues()(j)), std::abs(phi.phi(lam))});
    }
  }
  return 1.0 + m;
}

HermitianMatrix expectation(const ProductModel& model) {
  HermitianMatrix acc = HermitianMatrix::zero(model.dim());
  for (std::size_t k = 0; k < model.size(); ++k) acc += model.probability(k) * model.matrix(k);
  return acc;
}

double phi_entropy_value(const PhiFunction& phi, const ProductModel& model) {
  require_psd_model(model);
  return expected(model, trace_phi_all(phi, model)) - trace_phi(phi, expectation(model));
}

namespace {

double conditional_term_with(const PhiFunction& phi, const ProductModel& model, int i,
                             double mean_trace_phi) {
  const auto inner = parallel_map<double>(block_count(model, i), [&](std::size_t rest) {
    const Block b = block_of(model, i, rest);
    HermitianMatrix ez = HermitianMatrix::zero(model.dim());
    for (std::size_t a = 0; a < b.members.size(); ++a)
      ez += model.factors()[i][a].p * model.matrix(b.members[a]);
    return b.p_rest * trace_phi(phi, ez);
  });
  return mean_trace_phi - ordered_sum(inner);
}

double exchangeability_with(const ProductModel& model, const std::vector<HermitianMatrix>& psi) {
  double total = 0.0;
  for (int i = 0; i < model.n(); ++i) {
    const auto& f = model.factors()[i];
    const auto per_block = parallel_map<double>(block_count(model, i), [&](std::size_t rest) {
      const Block b = block_of(model, i, rest);
      double acc = 0.0;
      for (std::size_t a = 0; a < b.members.size(); ++a) {
        for (std::size_t c = a + 1; c < b.members.size(); ++c) {
          const std::size_t ka = b.members[a];
          const std::size_t kc = b.members[c];
          acc += f[a].p * f[c].p * pair_term(model.matrix(ka), model.matrix(kc), psi[ka], psi[kc]);
        }
      }
      return b.p_rest * acc;
    });
    total += ordered_sum(per_block);
  }
  return total;
}

}  // namespace

EntropyReport phi_entropy_exact(const PhiFunction& phi, const ProductModel& model) {
  require_psd_model(model);
  EntropyReport rep;
  rep.phi = phi.name();
  rep.scale = entropy_scale(phi, model);
  const double mean_tp = expected(model, trace_phi_all(phi, model));
  rep.h_phi = mean_tp - trace_phi(phi, expectation(model));
  for (int i = 0; i < model.n(); ++i)
    rep.per_coordinate_terms.push_back(conditional_term_with(phi, model, i, mean_tp));
  rep.conditional_sum = ordered_sum(rep.per_coordinate_terms);
  rep.shift = psi_shift(phi, model);
  rep.rhs_exchangeability = exchangeability_with(model, psi_all(phi, model, rep.shift));
  rep.subadditivity_gap = rep.conditional_sum - rep.h_phi;
  rep.exchangeability_gap = rep.rhs_exchangeability - rep.conditional_sum;
  return rep;
}

double conditional_entropy_term(const PhiFunction& phi, const ProductModel& model, int i) {
  require_index(model, i);
  require_psd_model(model);
  return conditional_term_with(phi, model, i, expected(model, trace_phi_all(phi, model)));
}

double subadditivity_gap(const PhiFunction& phi, const ProductModel& model) {
  require_psd_model(model);
  const double mean_tp = expected(model, trace_phi_all(phi, model));
  const double h = mean_tp - trace_phi(phi, expectation(model));
  std::vector<double> terms;
  for (int i = 0; i < model.n(); ++i) terms.push_back(conditional_term_with(phi, model, i, mean_tp));
  return ordered_sum(terms) - h;
}

ShiftedValue exchangeability_rhs(const PhiFunction& phi, const ProductModel& model) {
  require_psd_model(model);
  const double shift = psi_shift(phi, model);
  return {exchangeability_with(model, psi_all(phi, model, shift)), shift};
}

ShiftedValue symmetrized_bound(const PhiFunction& phi, const ProductModel& model) {
  require_psd_model(model);
  const double shift = psi_shift(phi, model);
  const auto psi = psi_all(phi, model, shift);
  const std::size_t total = model.size();
  const auto rows = parallel_map<double>(total, [&](std::size_t k) {
    double acc = 0.0;
    for (std::size_t l = k + 1; l < total; ++l)
      acc += model.probability(l) * pair_term(model.matrix(k), model.matrix(l), psi[k], psi[l]);
    return model.probability(k) * acc;
  });
  return {ordered_sum(rows), shift};
}

ShiftedValue supremum_candidate_value(const PhiFunction& phi, const ProductModel& model,
                                      const MatrixMap& candidate) {
  require_psd_model(model);
  const std::size_t total = model.size();
  const int d = model.dim();
  std::vector<HermitianMatrix> t(total);
  double worst = INFINITY;
  double tscale = 1.0;
  for (std::size_t k = 0; k < total; ++k) {
    t[k] = candidate(model.decode(k));
    if (t[k].dim() != d) throw ShapeError("candidate dimension differs from the model");
    const double nk = spectral_norm(t[k]);
    tscale = std::max(tscale, 1.0 + nk);
    worst = std::min(worst, lambda_min(t[k]) / (1.0 + nk));
  }
  double shift = 0.0;
  if (!(worst > 1e-12)) {
    if (worst < -1e-10) throw NotPositiveDefinite(worst, "candidate T");
    if (phi.psi_singular_at_zero()) {
      shift = 1e-8 * tscale;
      for (auto& m : t) m += shift * HermitianMatrix::identity(d);
    }
  }
  HermitianMatrix et = HermitianMatrix::zero(d);
  for (std::size_t k = 0; k < total; ++k) et += model.probability(k) * t[k];
  const HermitianMatrix psi_et = psi_of(phi, et);
  const auto terms = parallel_map<double>(total, [&](std::size_t k) {
    const HermitianMatrix psi_t = psi_of(phi, t[k]);
    return model.probability(k) *
           (normalized_trace_product(psi_t - psi_et, model.matrix(k) - t[k]) + trace_phi(phi, t[k]));
  });
  return {ordered_sum(terms) - trace_phi(phi, et), shift};
}

double infimum_candidate_value(const PhiFunction& phi, const ProductModel& model,
                               const HermitianMatrix& a) {
  require_psd_model(model);
  if (a.dim() != model.dim()) throw ShapeError("A has the wrong dimension");
  const double lo = lambda_min(a);
  if (!(lo > 1e-12 * (1.0 + spectral_norm(a)))) throw NotPositiveDefinite(lo, "A");
  const double mean_tp = expected(model, trace_phi_all(phi, model));
  return mean_tp - trace_phi(phi, a) - normalized_trace_product(expectation(model) - a, psi_of(phi, a));
}

double conditional_jensen_gap(const PhiFunction& phi, const ProductModel& model, int i) {
  require_index(model, i);
  require_psd_model(model);
  const int d = model.dim();
  const std::size_t r = model.factors()[i].size();
  const std::size_t blocks = block_count(model, i);
  // For each value a of X_i: E_rest Z(a, .). For each rest: E_i Z(., rest).
  std::vector<HermitianMatrix> by_value(r, HermitianMatrix::zero(d));
  std::vector<double> outer(blocks);
  for (std::size_t rest = 0; rest < blocks; ++rest) {
    const Block b = block_of(model, i, rest);
    HermitianMatrix ez = HermitianMatrix::zero(d);
    for (std::size_t a = 0; a < r; ++a) {
      const HermitianMatrix z = model.matrix(b.members[a]);
      by_value[a] += b.p_rest * z;
      ez += model.factors()[i][a].p * z;
    }
    outer[rest] = b.p_rest * trace_phi(phi, ez);
  }
  const double mean_tp = expected(model, trace_phi_all(phi, model));
  double lhs_inner = 0.0;  // sum_a p_a tr phi(E_rest Z(a, .))
  for (std::size_t a = 0; a < r; ++a) lhs_inner += model.factors()[i][a].p * trace_phi(phi, by_value[a]);
  const double e1_h = mean_tp - lhs_inner;
  const double h_e1 = ordered_sum(outer) - trace_phi(phi, expectation(model));
  return e1_h - h_e1;
}

// ---------------------------------------------------------------- Monte Carlo

MonteCarloEstimate phi_entropy_mc(const PhiFunction& phi, const MatrixSampler& sampler, int d,
                                  std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 2) throw InvalidInput("Monte Carlo needs at least two samples");
  constexpr std::size_t kBlock = 1000;
  struct Draw {
    double tp = 0.0;
    HermitianMatrix z;
  };
  const std::size_t blocks = (n_samples + kBlock - 1) / kBlock;
  const auto drawn = parallel_map<std::vector<Draw>>(blocks, [&](std::size_t b) {
    Rng rng = make_stream(seed, "mc-sample", b);
    const std::size_t count = std::min(kBlock, n_samples - b * kBlock);
    std::vector<Draw> out(count);
    for (auto& draw : out) {
      draw.z = sampler(rng);
      if (draw.z.dim() != d)
        throw ShapeError(fmt::format("sampler returned dimension {}, expected {}", draw.z.dim(), d));
      const double lo = lambda_min(draw.z);
      if (lo < -1e-10 * (1.0 + spectral_norm(draw.z))) throw NotPositiveSemidefinite(lo, "sample");
      draw.tp = trace_phi(phi, draw.z);
    }
    return out;
  });
  const std::size_t groups = std::min<std::size_t>(100, n_samples);
  std::vector<double> g_tp(groups, 0.0);
  std::vector<double> g_n(groups, 0.0);
  std::vector<HermitianMatrix> g_z(groups, HermitianMatrix::zero(d));
  double all_tp = 0.0;
  HermitianMatrix all_z = HermitianMatrix::zero(d);
  std::size_t j = 0;
  for (const auto& block : drawn) {
    for (const auto& draw : block) {
      const std::size_t g = j * groups / n_samples;
      g_tp[g] += draw.tp;
      g_z[g] += draw.z;
      g_n[g] += 1.0;
      ++j;
    }
  }
  for (std::size_t g = 0; g < groups; ++g) {
    all_tp += g_tp[g];
    all_z += g_z[g];
  }
  const double n = static_cast<double>(n_samples);
  MonteCarloEstimate est;
  est.samples = n_samples;
  est.groups = groups;
  est.value = all_tp / n - trace_phi(phi, (1.0 / n) * all_z);
  std::vector<double> loo(groups);
  double loo_mean = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    const double m = n - g_n[g];
    loo[g] = (all_tp - g_tp[g]) / m - trace_phi(phi, (1.0 / m) * (all_z - g_z[g]));
    loo_mean += loo[g];
  }
  loo_mean /= static_cast<double>(groups);
  double ss = 0.0;
  for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
  const double gd = static_cast<double>(groups);
  est.standard_error = std::sqrt((gd - 1.0) / gd * ss);
  return est;
}

MonteCarloEstimate phi_entropy_mc(const PhiFunction& phi, const ProductModel& model,
                                  std::size_t n_samples, std::uint64_t seed) {
  const MatrixSampler sampler = [&model](Rng& rng) { return model.evaluate(model.sample(rng)); };
  return phi_entropy_mc(phi, sampler, model.dim(), n_samples, seed);
}

// ---------------------------------------------------------------- pinching

PinchingAlgebra::PinchingAlgebra(int d, std::vector<std::vector<int>> block_ids)
    : d_(d), blocks_(std::move(block_ids)) {
  if (d < 1) throw InvalidInput("pinching dimension must be positive");
  if (blocks_.empty()) throw InvalidInput("pinching needs at least one partition");
  for (const auto& ids : blocks_) {
    if (static_cast<int>(ids.size()) != d) throw ShapeError("partition does not label every index");
    RMatrix m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = ids[i] == ids[j] ? 1.0 : 0.0;
    masks_.push_back(std::move(m));
  }
}

PinchingAlgebra PinchingAlgebra::from_masks(const std::vector<RMatrix>& masks) {
  if (masks.empty()) throw InvalidInput("pinching needs at least one mask");
  const int d = static_cast<int>(masks.front().rows());
  std::vector<std::vector<int>> ids;
  for (const auto& m : masks) {
    if (m.rows() != d || m.cols() != d) throw ShapeError("masks differ in size");
    for (int i = 0; i < d; ++i) {
      if (m(i, i) != 1.0) throw InvalidInput("mask is not reflexive");
      for (int j = 0; j < d; ++j) {
        if (m(i, j) != 0.0 && m(i, j) != 1.0) throw InvalidInput("mask entries must be 0 or 1");
        if (m(i, j) != m(j, i)) throw InvalidInput("mask is not symmetric");
        for (int k = 0; k < d; ++k)
          if (m(i, j) == 1.0 && m(j, k) == 1.0 && m(i, k) != 1.0)
            throw InvalidInput("mask is not transitive");
      }
    }
    std::vector<int> block(d, -1);
    int next = 0;
    for (int i = 0; i < d; ++i) {
      if (block[i] >= 0) continue;
      for (int j = i; j < d; ++j)
        if (m(i, j) == 1.0) block[j] = next;
      ++next;
    }
    ids.push_back(std::move(block));
  }
  return PinchingAlgebra(d, std::move(ids));
}

HermitianMatrix pinching_expectation(const PinchingAlgebra& alg, std::size_t index,
                                     const HermitianMatrix& m) {
  if (m.dim() != alg.dim()) throw ShapeError("matrix and pinching differ in dimension");
  if (index >= alg.size()) throw InvalidInput("pinching index out of range");
  return HermitianMatrix(CMatrix(m.matrix().cwiseProduct(alg.mask(index).cast<Complex>())));
}

HermitianMatrix pinching_composition(const PinchingAlgebra& alg, std::span<const std::size_t> order,
                                     const HermitianMatrix& m) {
  HermitianMatrix out = m;
  for (auto it = order.rbegin(); it != order.rend(); ++it) out = pinching_expectation(alg, *it, out);
  return out;
}

SubalgebraReport subalgebra_subadditivity(const PhiFunction& phi, const HermitianMatrix& a,
                                          const PinchingAlgebra& alg) {
  if (a.dim() != alg.dim()) throw ShapeError("matrix and pinching differ in dimension");
  const double lo = lambda_min(a);
  if (lo < -1e-10 * (1.0 + spectral_norm(a))) throw NotPositiveSemidefinite(lo, "A");
  const double base = trace_phi(phi, a);
  SubalgebraReport rep;
  for (std::size_t k = 0; k < alg.size(); ++k)
    rep.terms.push_back(base - trace_phi(phi, pinching_expectation(alg, k, a)));
  std::vector<std::size_t> order(alg.size());
  std::iota(order.begin(), order.end(), 0);
  const HermitianMatrix joint = pinching_composition(alg, order, a);
  rep.joint = base - trace_phi(phi, joint);
  rep.gap = ordered_sum(rep.terms) - rep.joint;
  auto compare = [&](const std::vector<std::size_t>& o) {
    const HermitianMatrix other = pinching_composition(alg, o, a);
    rep.order_deviation = std::max(rep.order_deviation, (other - joint).max_abs_entry());
  };
  if (alg.size() <= 6) {
    while (std::next_permutation(order.begin(), order.end())) compare(order);
  } else {
    std::reverse(order.begin(), order.end());
    compare(order);
  }
  return rep;
}

double subalgebra_subadditivity_gap(const PhiFunction& phi, const HermitianMatrix& a,
                                    const PinchingAlgebra& alg) {
  return subalgebra_subadditivity(phi, a, alg).gap;
}

}  // namespace phientropy
