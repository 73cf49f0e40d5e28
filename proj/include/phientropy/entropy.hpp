#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phientropy/hermitian.hpp"
#include "phientropy/phi_function.hpp"
#include "phientropy/random.hpp"

namespace phientropy {

struct Outcome {
  std::string label;
  double p = 0.0;
};
using Factor = std::vector<Outcome>;

/// Maps outcome indices (one per factor) to a matrix.
using MatrixMap = std::function<HermitianMatrix(std::span<const int>)>;

inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

/// Finite product space x = (X_1, ..., X_n) with a matrix-valued map Z(x).
/// Outcomes are linearly indexed with the first factor varying fastest.
/// Enumerable models are evaluated and, when `psd` is set, certified at
/// construction.
class ProductModel {
 public:
  ProductModel(std::vector<Factor> factors, int d, MatrixMap map, bool psd = true,
               std::size_t cap = kDefaultEnumerationCap);

  /// Table-driven map: one entry per outcome tuple, keyed by labels.
  static ProductModel from_table(std::vector<Factor> factors, int d,
                                 const std::vector<std::pair<std::vector<std::string>, HermitianMatrix>>& entries,
                                 bool psd = true, std::size_t cap = kDefaultEnumerationCap);

  int n() const { return static_cast<int>(factors_.size()); }
  int dim() const { return d_; }
  bool psd() const { return psd_; }
  std::size_t cap() const { return cap_; }
  const std::vector<Factor>& factors() const { return factors_; }
  const MatrixMap& map() const { return map_; }
  /// Number of outcomes as a double (may exceed size_t).
  double outcome_count() const { return count_; }
  bool enumerable() const { return count_ <= static_cast<double>(cap_); }
  std::size_t size() const;  // throws TooLargeToEnumerate

  std::vector<int> decode(std::size_t linear) const;
  std::size_t encode(std::span<const int> idx) const;
  double probability(std::size_t linear) const;
  HermitianMatrix matrix(std::size_t linear) const;
  HermitianMatrix evaluate(std::span<const int> idx) const;
  /// 1 + the largest spectral norm over outcomes.
  double norm_scale() const;

  /// Stride of factor i in the linear index.
  std::size_t stride(int i) const;

  /// Draws one outcome from the product measure.
  std::vector<int> sample(Rng& rng) const;

  /// Same factors with the map replaced.
  ProductModel with_map(MatrixMap map, bool psd) const;

 private:
  std::vector<Factor> factors_;
  int d_ = 0;
  MatrixMap map_;
  bool psd_ = true;
  std::size_t cap_ = kDefaultEnumerationCap;
  double count_ = 1.0;
  std::vector<std::size_t> strides_;
  std::vector<double> probs_;
  std::vector<HermitianMatrix> cache_;
  double norm_scale_ = 1.0;
};

/// tr phi(Z)/d with eigenvalues clamped at zero (Z is PSD up to rounding).
double trace_phi(const PhiFunction& phi, const HermitianMatrix& z);
/// phi or psi applied to a PSD matrix with eigenvalues clamped at zero.
HermitianMatrix phi_of(const PhiFunction& phi, const HermitianMatrix& z);
HermitianMatrix psi_of(const PhiFunction& phi, const HermitianMatrix& z);

/// Tolerance scale for phi-entropy quantities of a model:
/// 1 + max over outcomes of max(||Z||, max |phi(lambda)|).
double entropy_scale(const PhiFunction& phi, const ProductModel& model);

struct EntropyReport {
  std::string phi;
  double h_phi = 0.0;
  std::vector<double> per_coordinate_terms;
  double conditional_sum = 0.0;
  double rhs_exchangeability = 0.0;
  double subadditivity_gap = 0.0;    // conditional_sum - h_phi
  double exchangeability_gap = 0.0;  // rhs - conditional_sum
  double scale = 1.0;
  double shift = 0.0;  // epsilon added to Z before psi was evaluated
};

/// E tr phi(Z)/d - tr phi(E Z)/d by exact enumeration.
double phi_entropy_value(const PhiFunction& phi, const ProductModel& model);
/// Full report: entropy, conditional terms, exchangeability bound.
EntropyReport phi_entropy_exact(const PhiFunction& phi, const ProductModel& model);

struct MonteCarloEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
  std::size_t groups = 0;
};

using MatrixSampler = std::function<HermitianMatrix(Rng&)>;

/// Plug-in estimate with a grouped jackknife standard error. Samples are drawn
/// in fixed blocks of 1000 from streams derived from (seed, block).
MonteCarloEstimate phi_entropy_mc(const PhiFunction& phi, const MatrixSampler& sampler, int d,
                                  std::size_t n_samples, std::uint64_t seed);
MonteCarloEstimate phi_entropy_mc(const PhiFunction& phi, const ProductModel& model,
                                  std::size_t n_samples, std::uint64_t seed);

/// E over x_{-i} of H_phi(Z | x_{-i}).
double conditional_entropy_term(const PhiFunction& phi, const ProductModel& model, int i);
/// sum_i E H_phi(Z | x_{-i}) - H_phi(Z).
double subadditivity_gap(const PhiFunction& phi, const ProductModel& model);

struct ShiftedValue {
  double value = 0.0;
  double shift = 0.0;
};

/// (1/2) sum_i E tr[(Z - Z'_i)(psi(Z) - psi(Z'_i))]/d with Z'_i resampling coordinate i.
ShiftedValue exchangeability_rhs(const PhiFunction& phi, const ProductModel& model);
/// (1/2) E tr[(Z - Z')(psi(Z) - psi(Z'))]/d with Z' an independent copy.
ShiftedValue symmetrized_bound(const PhiFunction& phi, const ProductModel& model);

/// E tr[(psi(T) - psi(E T))(Z - T) + phi(T) - phi(E T)]/d for a candidate T on the
/// same outcome space. T must be positive definite; a PSD T is shifted when psi is
/// singular at zero.
ShiftedValue supremum_candidate_value(const PhiFunction& phi, const ProductModel& model,
                                      const MatrixMap& candidate);
/// E tr[phi(Z) - phi(A) - (Z - A) psi(A)]/d for a fixed positive definite A.
double infimum_candidate_value(const PhiFunction& phi, const ProductModel& model,
                               const HermitianMatrix& a);

/// E Z by enumeration.
HermitianMatrix expectation(const ProductModel& model);

/// E_i H_phi(Z | X_i) - H_phi(E_i Z), where X_i is coordinate i and the
/// entropies are taken over the remaining coordinates.
double conditional_jensen_gap(const PhiFunction& phi, const ProductModel& model, int i = 0);

/// Block-diagonal *-subalgebras given by partitions of {0, ..., d-1}.
class PinchingAlgebra {
 public:
  /// Each entry assigns a block id to every index.
  PinchingAlgebra(int d, std::vector<std::vector<int>> block_ids);
  /// Builds from 0/1 masks, checked to be reflexive, symmetric, transitive.
  static PinchingAlgebra from_masks(const std::vector<RMatrix>& masks);

  int dim() const { return d_; }
  std::size_t size() const { return masks_.size(); }
  const RMatrix& mask(std::size_t k) const { return masks_.at(k); }
  const std::vector<int>& blocks(std::size_t k) const { return blocks_.at(k); }

 private:
  int d_ = 0;
  std::vector<std::vector<int>> blocks_;
  std::vector<RMatrix> masks_;
};

HermitianMatrix pinching_expectation(const PinchingAlgebra& alg, std::size_t index,
                                     const HermitianMatrix& m);
/// Applies the conditional expectations in the given order.
HermitianMatrix pinching_composition(const PinchingAlgebra& alg, std::span<const std::size_t> order,
                                     const HermitianMatrix& m);

struct SubalgebraReport {
  std::vector<double> terms;  // H_phi(A | alg_i)
  double joint = 0.0;         // H_phi(A | alg_1, ..., alg_n)
  double gap = 0.0;           // sum(terms) - joint
  double order_deviation = 0.0;
};

SubalgebraReport subalgebra_subadditivity(const PhiFunction& phi, const HermitianMatrix& a,
                                          const PinchingAlgebra& alg);
double subalgebra_subadditivity_gap(const PhiFunction& phi, const HermitianMatrix& a,
                                    const PinchingAlgebra& alg);

}  // namespace phientropy
