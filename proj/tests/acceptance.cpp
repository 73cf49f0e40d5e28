// Acceptance run: one PASS/FAIL line per criterion. Tolerances are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "golden.hpp"
#include "phientropy/concentration.hpp"
#include "phientropy/entropy.hpp"
#include "phientropy/errors.hpp"
#include "phientropy/operator.hpp"
#include "phientropy/phi_class.hpp"
#include "phientropy/random.hpp"
#include "support.hpp"

using namespace phientropy;
using testing::max_abs;

namespace {

constexpr double kRelSlack = 1e-9;         // criteria 1-3, 7
constexpr double kOperatorTol = 1e-6;      // criterion 5
constexpr double kScalarTol = 1e-12;       // criterion 9
constexpr double kSubalgebraGap = 1e-9;    // criterion 10
constexpr double kOrderTol = 1e-12;        // criterion 10
constexpr double kHandTol = 1e-9;          // criterion 8
constexpr double kWilsonMultiple = 3.0;    // criterion 6

struct Verdict {
  bool pass = true;
  std::string detail;
  double budget_s = 0.0;  // 0 means no runtime target
};

const std::vector<PhiFunction>& corpus_phis() {
  static const std::vector<PhiFunction> v = {PhiFunction::entropy(), PhiFunction::power(1.25), PhiFunction::power(1.5),
                                             PhiFunction::power(2.0)};
  return v;
}

testing::ScalarPhi scalar_of(const PhiFunction& phi) {
  if (phi.kind() == PhiFunction::Kind::Entropy) return {true, 0.0};
  return {false, phi.exponent()};
}

// corpus shared by criteria 1 and 2
struct CorpusRow {
  double scale, h, sum, rhs;
};
std::vector<CorpusRow> corpus_rows;

Verdict subadditivity_suite() {
  const std::size_t models = 500;
  double worst = INFINITY;
  std::size_t bad = 0;
  for (std::size_t k = 0; k < models; ++k) {
    const ProductModel m = testing::random_psd_model(1001, k, true);
    for (const auto& phi : corpus_phis()) {
      const EntropyReport r = phi_entropy_exact(phi, m);
      corpus_rows.push_back({r.scale, r.h_phi, r.conditional_sum, r.rhs_exchangeability});
      const double rel = r.subadditivity_gap / r.scale;
      worst = std::min(worst, rel);
      if (rel < -kRelSlack) ++bad;
    }
  }
  return {bad == 0, fmt::format("{} models x {} phi, {} violations, min gap/scale = {:.3e}", models,
                                corpus_phis().size(), bad, worst),
          120.0};
}

Verdict chain_of_bounds() {
  double worst_lo = INFINITY, worst_hi = INFINITY;
  std::size_t bad = 0;
  for (const auto& r : corpus_rows) {
    const double lo = (r.sum - r.h) / r.scale, hi = (r.rhs - r.sum) / r.scale;
    worst_lo = std::min(worst_lo, lo);
    worst_hi = std::min(worst_hi, hi);
    if (lo < -kRelSlack || hi < -kRelSlack) ++bad;
  }
  return {bad == 0 && !corpus_rows.empty(),
          fmt::format("{} cases, {} violations, min (sum - H)/scale = {:.3e}, min (rhs - sum)/scale = {:.3e}",
                      corpus_rows.size(), bad, worst_lo, worst_hi)};
}

Verdict variational_sandwich() {
  const std::size_t models = 100;
  const int candidates = 10;
  std::size_t bad = 0, checks = 0;
  double worst_sup = INFINITY, worst_inf = INFINITY, worst_eq = 0.0;
  for (std::size_t k = 0; k < models; ++k) {
    const ProductModel m = testing::random_psd_model(1003, k, false);
    Rng rng = make_stream(1003, "acceptance-candidates", k);
    const HermitianMatrix ez = expectation(m);
    for (const auto& phi : corpus_phis()) {
      const EntropyReport r = phi_entropy_exact(phi, m);
      for (int c = 0; c < candidates; ++c) {
        const double sup = supremum_candidate_value(phi, m, testing::random_candidate(m, rng)).value;
        const HermitianMatrix a = random_positive_definite(m.dim(), rng) * (1.0 / m.dim());
        const double inf = infimum_candidate_value(phi, m, a);
        const double s = (r.h_phi - sup) / r.scale, i = (inf - r.h_phi) / r.scale;
        worst_sup = std::min(worst_sup, s);
        worst_inf = std::min(worst_inf, i);
        bad += (s < -kRelSlack) + (i < -kRelSlack);
        checks += 2;
      }
      const ShiftedValue at_z = supremum_candidate_value(phi, m, m.map());
      const double e1 = std::abs(at_z.value - r.h_phi) / r.scale;
      const double e2 = std::abs(infimum_candidate_value(phi, m, ez) - r.h_phi) / r.scale;
      worst_eq = std::max({worst_eq, e1, e2});
      bad += (e1 > kRelSlack) + (e2 > kRelSlack) + (at_z.shift != 0.0);
      checks += 2;
    }
  }
  return {bad == 0, fmt::format("{} checks, {} violations, min (H - sup)/scale = {:.3e}, min (inf - H)/scale = {:.3e}, "
                                "max equality error/scale = {:.3e}",
                                checks, bad, worst_sup, worst_inf, worst_eq)};
}

Verdict membership_suite() {
  std::vector<PhiFunction> phis = {PhiFunction::entropy()};
  for (double q : {1.1, 1.25, 1.5, 1.75, 2.0}) phis.push_back(PhiFunction::power(q));
  std::size_t failed = 0, runs = 0;
  double worst = INFINITY;
  for (const auto& phi : phis)
    for (int d = 1; d <= 4; ++d) {
      const MembershipReport r = membership_concavity_check(phi, d, 200, 2000 + d);
      ++runs;
      failed += !r.passed;
      worst = std::min(worst, r.min_ratio);
    }
  const MembershipReport t4 = membership_concavity_check(PhiFunction::unchecked_power(4.0), 1, 200, 2000);
  const bool witness = !t4.passed && t4.worst.gap < 0.0 && t4.worst.s.dim() == 1;
  return {failed == 0 && witness,
          fmt::format("{} runs x 200 trials, {} failed, min ratio = {:.3e}; t^4 control {} (witness gap {:.4e} at "
                      "alpha {:.1f})",
                      runs, failed, worst, t4.passed ? "passed" : "failed", t4.worst.gap, t4.worst.alpha),
          300.0};
}

Verdict operator_oracles() {
  Rng rng = make_stream(1005, "acceptance-operator");
  const std::vector<ScalarFunction> fs = {ScalarFunction::log(), ScalarFunction::exp(), ScalarFunction::power(0.25),
                                          ScalarFunction::power(0.5), ScalarFunction::power(0.75),
                                          ScalarFunction::power(1.5), ScalarFunction::square()};
  double worst_fd = 0.0;
  std::size_t bad = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const int d = 1 + trial % 6;
    const HermitianMatrix a =
        random_positive_definite(d, rng) * (1.0 / d) + HermitianMatrix::identity(d) * 0.5;
    const HermitianMatrix h = random_hermitian(d, rng) * (1.0 / std::sqrt(d));
    const ScalarFunction& f = fs[trial % fs.size()];
    const double s = 1e-5;
    const CMatrix fd = (apply_standard_function(f, a + h * s).matrix() - apply_standard_function(f, a - h * s).matrix()) /
                       (2.0 * s);
    const CMatrix exact = derivative_operator(f, a).apply(h.matrix());
    const double scale = tolerance_scale({&a, &h});
    const double err = max_abs(exact - fd) / scale;
    worst_fd = std::max(worst_fd, err);
    bad += err > kOperatorTol;
  }
  double worst_id = 0.0;
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 1 + trial % 6;
    const HermitianMatrix a = random_positive_definite(d, rng);
    const CMatrix id = CMatrix::Identity(d * d, d * d);
    const MatrixOperator ent = integral_inverse_derivative(PhiFunction::entropy(), a, 64);
    double err = max_abs(ent.compose(derivative_operator(ScalarFunction::log(), a)).rep() - id);
    for (double p : {0.25, 0.5, 0.75, 1.0}) {
      const MatrixOperator inv = power_branch_integral(p, a, 64);
      err = std::max(err, max_abs(inv.compose(derivative_operator(ScalarFunction::power(p), a)).rep() - id));
    }
    worst_id = std::max(worst_id, err);
    bad += err > kOperatorTol;
  }
  return {bad == 0, fmt::format("120 difference checks, max error/scale = {:.3e}; 60 x 5 compositions d <= 6, max "
                                "deviation from identity = {:.3e}",
                                worst_fd, worst_id)};
}

Verdict tail_bound() {
  const Ensemble e = rademacher_diagonal(3, 10, 1006);
  const ProductModel& y = e.law();
  // independent V: 2 || sum A_i^2 || with A_i read off by flipping one sign at a time
  const std::vector<int> zero(10, 0);
  const HermitianMatrix base = y.evaluate(zero);
  CMatrix sum_sq = CMatrix::Zero(3, 3);
  for (int i = 0; i < 10; ++i) {
    std::vector<int> x = zero;
    x[i] = 1;
    const CMatrix ai = 0.5 * (base.matrix() - y.evaluate(x).matrix());
    sum_sq += ai * ai;
  }
  const double v_direct = 2.0 * spectral_norm(HermitianMatrix(sum_sq));
  const double v = variance_measure(y).v_scalar;
  const bool v_ok = std::abs(v - v_direct) <= 1e-12 * v_direct;

  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(4.0 * std::sqrt(v) * i / 40.0);
  const std::vector<double> exact = exact_tail(y, grid);
  const std::vector<TailPoint> emp = empirical_tail(y, 100000, 1006, grid);
  std::size_t bad = 0;
  double min_exact = INFINITY, min_emp = INFINITY;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double b = tail_bound_value(3, v, grid[k]);
    min_exact = std::min(min_exact, b - exact[k]);
    min_emp = std::min(min_emp, b + kWilsonMultiple * emp[k].standard_error - emp[k].frequency);
    bad += exact[k] > b;
    bad += emp[k].frequency > b + kWilsonMultiple * emp[k].standard_error;
  }
  return {v_ok && bad == 0,
          fmt::format("V = {:.6f} (direct {:.6f}), {} grid points, {} violations, min bound - exact = {:.3e}, min "
                      "bound + 3se - empirical = {:.3e}",
                      v, v_direct, grid.size(), bad, min_exact, min_emp),
          60.0};
}

Verdict herbst_suite() {
  const auto family = testing::invariant_family(1007, 20);
  std::size_t bad = 0, rows = 0;
  double worst_d = INFINITY, worst_h = INFINITY;
  for (const Ensemble& e : family) {
    const HerbstReport r = herbst_diagnostic(e.law(), default_theta_grid());
    rows += r.rows.size();
    worst_d = std::min(worst_d, r.worst_diff_slack / r.scale);
    worst_h = std::min(worst_h, r.worst_herbst_slack / r.scale);
    bad += r.worst_diff_slack < -kRelSlack * r.scale || r.worst_herbst_slack < -kRelSlack * r.scale;
  }
  return {bad == 0, fmt::format("{} models, {} rows, {} failing models, min slack/scale = {:.3e} (differential), "
                                "{:.3e} (integrated)",
                                family.size(), rows, bad, worst_d, worst_h)};
}

Verdict moment_suite() {
  const auto family = testing::invariant_family(1008, 24);
  const std::vector<std::function<double(double)>> maps = {[](double x) { return std::exp(x); },
                                                          [](double x) { return x * x; },
                                                          [](double x) { return 1.0 + std::abs(x); }};
  std::size_t configs = 0, infeasible = 0, bad = 0;
  for (const Ensemble& e : family)
    for (const auto& f : maps) {
      const ProductModel z = map_model(e.law(), f, true);
      if (!self_bounding_constant(z).feasible) {
        ++infeasible;
        continue;
      }
      ++configs;
      for (int q = 2; q <= 5; ++q) {
        try {
          bad += !moment_bound_check(z, q).passed;
        } catch (const Error&) {
          ++bad;
        }
      }
    }
  const ProductModel hand({{{"lo", 0.5}, {"hi", 0.5}}}, 1, [](std::span<const int> x) {
    return HermitianMatrix::diagonal({x[0] ? 2.0 : 1.0});
  });
  const MomentReport h = moment_bound_check(hand, 2);
  const bool hand_ok = std::abs(h.lhs - std::sqrt(2.5)) <= kHandTol && std::abs(h.rhs - 1.75) <= kHandTol && h.passed;
  return {bad == 0 && configs > 0 && hand_ok,
          fmt::format("{} feasible configurations x q = 2..5, {} skipped as infeasible, {} failures; hand example lhs "
                      "= {:.9f} <= rhs = {:.9f}",
                      configs, infeasible, bad, h.lhs, h.rhs)};
}

Verdict scalar_regression() {
  Rng rng = make_stream(1009, "acceptance-scalar");
  std::size_t checks = 0, bad = 0;
  double worst = 0.0;
  auto compare = [&](double got, double oracle) {
    const double err = std::abs(got - oracle) / (1.0 + std::abs(oracle));
    worst = std::max(worst, err);
    bad += err > kScalarTol;
    ++checks;
  };
  for (std::size_t k = 0; k < 100; ++k) {
    const ProductModel m = testing::random_psd_model(1009, k, false, 4, 3, 1, 1);
    const auto law = testing::scalar_law_of(m);
    for (const auto& phi : corpus_phis()) {
      const testing::ScalarPhi f = scalar_of(phi);
      const EntropyReport r = phi_entropy_exact(phi, m);
      compare(r.h_phi, testing::scalar_entropy(f, law));
      for (int i = 0; i < m.n(); ++i) {
        compare(r.per_coordinate_terms[i], testing::scalar_conditional(f, law, i));
        compare(conditional_jensen_gap(phi, m, i), testing::scalar_conditional_jensen(f, law, i));
      }
      compare(r.rhs_exchangeability, testing::scalar_exchangeability(f, law));
      compare(symmetrized_bound(phi, m).value, testing::scalar_symmetrized(f, law));
      const double a = 0.2 + std::uniform_real_distribution<double>()(rng);
      compare(infimum_candidate_value(phi, m, HermitianMatrix::diagonal({a})), testing::scalar_infimum(f, law, a));
      const MatrixMap cand = testing::random_candidate(m, rng);
      std::vector<double> t;
      for (std::size_t j = 0; j < m.size(); ++j) t.push_back(cand(m.decode(j))(0, 0).real());
      compare(supremum_candidate_value(phi, m, cand).value, testing::scalar_supremum(f, law, t));
    }
  }
  return {bad == 0, fmt::format("100 models, {} comparisons, {} mismatches, max relative error = {:.3e}", checks, bad,
                                worst)};
}

Verdict subalgebra_suite() {
  Rng rng = make_stream(1010, "acceptance-subalgebra");
  const int dims[] = {2, 4, 6};
  std::size_t bad = 0;
  double worst_gap = INFINITY, worst_order = 0.0;
  auto partition = [&](int d) {
    const int blocks = std::uniform_int_distribution<int>(1, d)(rng);
    std::vector<int> ids(d);
    for (auto& b : ids) b = std::uniform_int_distribution<int>(0, blocks - 1)(rng);
    return ids;
  };
  for (int k = 0; k < 200; ++k) {
    const int d = dims[k % 3];
    HermitianMatrix a = random_positive_definite(d, rng);
    if (k % 5 == 4) {
      const CMatrix g = random_complex_gaussian(d, d - 1, rng);
      a = HermitianMatrix(g * g.adjoint() / d);
    }
    const PhiFunction& phi = corpus_phis()[k % corpus_phis().size()];
    const SubalgebraReport r = subalgebra_subadditivity(phi, a, PinchingAlgebra(d, {partition(d), partition(d)}));
    worst_gap = std::min(worst_gap, r.gap);
    worst_order = std::max(worst_order, r.order_deviation);
    bad += r.gap < -kSubalgebraGap || r.order_deviation > kOrderTol;
  }
  return {bad == 0, fmt::format("200 instances, {} violations, min gap = {:.3e}, max order deviation = {:.3e}", bad,
                                worst_gap, worst_order)};
}

Verdict determinism() {
  const auto entries = golden::load_manifest();
  const auto root = golden::scratch_dir("acceptance-golden");
  std::size_t bad = 0, files = 0;
  for (const auto& e : entries) {
    const golden::Run a = golden::run_config(e, root / "a");
    const golden::Run b = golden::run_config(e, root / "b");
    files += a.files.size();
    bad += a.files != b.files || a.exit_code != b.exit_code || a.exit_code != e.expected_exit;
  }
  return {bad == 0 && !entries.empty(),
          fmt::format("{} configs run twice, {} output files compared, {} differences", entries.size(), files, bad)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {"subadditivity suite", subadditivity_suite},
      {"chain of bounds", chain_of_bounds},
      {"variational sandwich", variational_sandwich},
      {"membership suite", membership_suite},
      {"operator-calculus oracles", operator_oracles},
      {"tail bound", tail_bound},
      {"Herbst diagnostics", herbst_suite},
      {"moment bound", moment_suite},
      {"scalar regression", scalar_regression},
      {"subalgebra subadditivity", subalgebra_suite},
      {"determinism", determinism},
  };
  int failures = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict o;
    try {
      o = criteria[k].run();
    } catch (const std::exception& ex) {
      o = {false, fmt::format("threw: {}", ex.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt::format("{:.2f} s", secs);
    if (o.budget_s > 0.0) {
      timing += fmt::format(", target < {:.0f} s", o.budget_s);
      if (secs >= o.budget_s) o.pass = false;
    }
    failures += !o.pass;
    fmt::print("{} [{:2}] {}: {} ({})\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].name, o.detail, timing);
    std::fflush(stdout);
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  fmt::print("{} of {} criteria passed in {:.2f} s\n", criteria.size() - failures, criteria.size(), total);
  return failures == 0 ? 0 : 1;
}
