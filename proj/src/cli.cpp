#include "phientropy/cli.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "phientropy/concentration.hpp"
#include "phientropy/entropy.hpp"
#include "phientropy/io.hpp"
#include "phientropy/phi_class.hpp"

namespace phientropy::cli {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kCommands = {"entropy", "subadd", "membership", "tail", "moments", "herbst"};

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = true;
};

struct Outcome {
  Json report;
  std::vector<std::pair<std::string, std::string>> tables;  // file name, CSV text
  std::vector<Check> checks;
  std::string failure;  // precondition message, empty when none
  Json witness;
};

std::string num(double x) { return fmt::format("{}", x); }

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) { row(header); }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
    text_ += '\n';
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

Ensemble make_builtin(const ExperimentConfig& c) {
  const std::uint64_t seed = *c.seed;
  const std::string& b = c.builtin;
  if (b == "rademacher-diag") return rademacher_diagonal(c.d, c.n, seed);
  if (b == "wigner-sign") return wigner_sign(c.d);
  if (b == "symmetric-diag") return symmetric_diagonal(c.d, c.n, seed);
  if (b == "symmetrized") {
    if (c.d > 4) throw InvalidInput("field 'd': the symmetrized builtin supports d <= 4");
    Rng rng = make_stream(seed, "symmetrized-inner");
    std::vector<HermitianMatrix> coeffs;
    for (int i = 0; i < c.n; ++i) {
      RMatrix g(c.d, c.d);
      for (int r = 0; r < c.d; ++r)
        for (int s = 0; s < c.d; ++s) g(r, s) = std::normal_distribution<double>(0.0, 1.0)(rng);
      coeffs.push_back(HermitianMatrix::from_real(0.5 * (g + g.transpose())));
    }
    return symmetrized(rademacher_series(coeffs).law(), fmt::format("symmetrized(d={},n={})", c.d, c.n));
  }
  if (b == "biased-diag") {
    const Ensemble base = rademacher_diagonal(c.d, c.n, seed);
    std::vector<double> shift(c.d, 0.0);
    shift[0] = 1.0;
    const HermitianMatrix offset = HermitianMatrix::diagonal(shift);
    const MatrixMap inner = base.law().map();
    return custom_ensemble(
        base.law().with_map([inner, offset](std::span<const int> idx) { return inner(idx) + offset; }, false),
        fmt::format("biased-diag(d={},n={})", c.d, c.n));
  }
  throw InvalidInput(fmt::format("field 'builtin': unknown ensemble '{}'", b));
}

/// The random matrix Y of the command, as a model (not necessarily PSD).
Ensemble load_law(const ExperimentConfig& c, bool psd) {
  if (!c.model_path.empty()) {
    if (!fs::exists(c.model_path)) throw InvalidInput(fmt::format("field 'model': no such file '{}'", c.model_path));
    return custom_ensemble(model_from_json(read_json_file(c.model_path), psd), fs::path(c.model_path).filename().string());
  }
  if (c.builtin.empty()) throw InvalidInput("one of fields 'model' or 'builtin' is required");
  Ensemble e = make_builtin(c);
  if (psd) {
    // Builtins are symmetric sign models; their matrix exponential is PSD and inherits invariance.
    ProductModel z = map_model(e.law(), [](double x) { return std::exp(x); }, true);
    e = Ensemble{e.kind, "exp(" + e.name + ")", std::make_shared<const ProductModel>(std::move(z))};
  }
  return e;
}

void add_check(Outcome& o, const std::string& name, double value, double threshold) {
  o.checks.push_back({name, value, threshold, value >= threshold});
}

Json checks_json(const std::vector<Check>& checks) {
  Json arr = Json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"passed", c.passed}});
  return arr;
}

Json doubles(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Json outcome_labels(const ProductModel& m, const std::vector<int>& idx) {
  Json a = Json::array();
  for (int i = 0; i < m.n(); ++i) a.push_back(m.factors()[i][idx[i]].label);
  return a;
}

// ---------------------------------------------------------------- commands

Outcome cmd_entropy(const ExperimentConfig& c, const Ensemble& e, const PhiFunction& phi) {
  Outcome o;
  const ProductModel& m = e.law();
  if (!m.enumerable()) {
    const MonteCarloEstimate est = phi_entropy_mc(phi, m, c.samples, *c.seed);
    o.report["mode"] = "monte-carlo";
    o.report["h_phi"] = est.value;
    o.report["standard_error"] = est.standard_error;
    o.report["groups"] = est.groups;
    add_check(o, "h_phi >= -5 stderr", est.value, -5.0 * est.standard_error);
    Csv csv({"estimate", "stderr", "samples"});
    csv.row({num(est.value), num(est.standard_error), std::to_string(est.samples)});
    o.tables.emplace_back("entropy.csv", csv.text());
    return o;
  }
  const EntropyReport r = phi_entropy_exact(phi, m);
  o.report["mode"] = "exact";
  o.report["h_phi"] = r.h_phi;
  o.report["per_coordinate_terms"] = doubles(r.per_coordinate_terms);
  o.report["rhs_exchangeability"] = r.rhs_exchangeability;
  o.report["scale"] = r.scale;
  o.report["shift"] = r.shift;
  add_check(o, "h_phi >= -1e-10 scale", r.h_phi, -1e-10 * r.scale);
  Csv csv({"coordinate", "conditional_term"});
  for (std::size_t i = 0; i < r.per_coordinate_terms.size(); ++i)
    csv.row({std::to_string(i), num(r.per_coordinate_terms[i])});
  o.tables.emplace_back("entropy.csv", csv.text());
  return o;
}

Outcome cmd_subadd(const ExperimentConfig&, const Ensemble& e, const PhiFunction& phi) {
  Outcome o;
  const EntropyReport r = phi_entropy_exact(phi, e.law());
  o.report["h_phi"] = r.h_phi;
  o.report["per_coordinate_terms"] = doubles(r.per_coordinate_terms);
  o.report["conditional_sum"] = r.conditional_sum;
  o.report["rhs_exchangeability"] = r.rhs_exchangeability;
  o.report["subadditivity_gap"] = r.subadditivity_gap;
  o.report["exchangeability_gap"] = r.exchangeability_gap;
  o.report["scale"] = r.scale;
  o.report["shift"] = r.shift;
  add_check(o, "subadditivity gap", r.subadditivity_gap, -1e-9 * r.scale);
  add_check(o, "exchangeability gap", r.exchangeability_gap, -1e-9 * r.scale);
  Csv csv({"coordinate", "conditional_term"});
  for (std::size_t i = 0; i < r.per_coordinate_terms.size(); ++i)
    csv.row({std::to_string(i), num(r.per_coordinate_terms[i])});
  o.tables.emplace_back("subadd.csv", csv.text());
  return o;
}

Outcome cmd_membership(const ExperimentConfig& c, const PhiFunction& phi) {
  Outcome o;
  const MembershipReport r = membership_concavity_check(phi, c.d, c.trials, *c.seed);
  o.report["admissible"] = phi.admissible();
  o.report["trials"] = r.trials;
  o.report["min_gap"] = r.min_gap;
  o.report["min_relative_gap"] = r.min_ratio;
  o.checks.push_back({"concavity gap / scale", r.min_ratio, -1e-7, r.passed});
  Csv csv({"trial", "alpha", "gap", "scale"});
  for (std::size_t k = 0; k < r.trials; ++k)
    csv.row({std::to_string(k), num(r.alphas[k]), num(r.gaps[k]), num(r.scales[k])});
  o.tables.emplace_back("membership.csv", csv.text());
  o.witness = {{"trial", r.worst.trial},
               {"alpha", r.worst.alpha},
               {"gap", r.worst.gap},
               {"scale", r.worst.scale},
               {"S", matrix_to_json(r.worst.s)},
               {"T", matrix_to_json(r.worst.t)}};
  return o;
}

Outcome cmd_tail(const ExperimentConfig& c, const Ensemble& e) {
  Outcome o;
  const ProductModel& m = e.law();
  try {
    require_invariant(m);
    o.report["certified"] = true;
  } catch (const PreconditionFailed& ex) {
    o.failure = ex.what();
    o.report["certified"] = false;
    o.report["note"] = "bound not established: the law fails the signed-permutation invariance diagnostic";
  }
  const VarianceReport v = variance_measure(m);
  o.report["v_scalar"] = v.v_scalar;
  o.report["worst_x"] = outcome_labels(m, v.worst_x);
  o.report["v_matrix_worst"] = matrix_to_json(v.v_matrix_worst);
  std::vector<double> grid = c.t_grid;
  if (grid.empty()) {
    const double top = 4.0 * std::sqrt(std::max(v.v_scalar, 1e-300));
    for (int i = 0; i <= 20; ++i) grid.push_back(top * i / 20.0);
  }
  auto bound = [&](double t) {
    if (v.v_scalar > 0.0) return tail_bound_value(m.dim(), v.v_scalar, t);
    return t > 0.0 ? 0.0 : static_cast<double>(m.dim());
  };
  const std::vector<double> exact = exact_tail(m, grid);
  const std::vector<TailPoint> emp = empirical_tail(m, c.samples, *c.seed, grid);
  Csv csv({"t", "bound", "empirical", "stderr"});
  Json curve = Json::array();
  double worst_exact = INFINITY;
  double worst_emp = INFINITY;
  std::size_t worst_exact_i = 0, worst_emp_i = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double b = bound(grid[i]);
    csv.row({num(grid[i]), num(b), num(emp[i].frequency), num(emp[i].standard_error)});
    curve.push_back({{"t", grid[i]},
                     {"bound", b},
                     {"exact", exact[i]},
                     {"empirical", emp[i].frequency},
                     {"stderr", emp[i].standard_error}});
    const double se = b - exact[i];
    if (se < worst_exact) worst_exact = se, worst_exact_i = i;
    const double sm = b + 3.0 * emp[i].standard_error - emp[i].frequency;
    if (sm < worst_emp) worst_emp = sm, worst_emp_i = i;
  }
  o.report["curve"] = std::move(curve);
  add_check(o, "bound - exact tail", worst_exact, -1e-12);
  add_check(o, "bound + 3 stderr - empirical tail", worst_emp, 0.0);
  o.tables.emplace_back("tail.csv", csv.text());
  if (o.failure.empty())
    o.witness = {{"exact_t", grid[worst_exact_i]}, {"empirical_t", grid[worst_emp_i]}};
  else
    o.witness = {{"precondition", o.failure}};
  return o;
}

Outcome cmd_moments(const ExperimentConfig& c, const Ensemble& e) {
  Outcome o;
  Csv csv({"q", "lhs", "rhs", "c_star"});
  Json rows = Json::array();
  try {
    for (int q : c.q_list) {
      const MomentReport r = moment_bound_check(e.law(), q);
      csv.row({std::to_string(q), num(r.lhs), num(r.rhs), num(r.c_star)});
      rows.push_back({{"q", q}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"c_star", r.c_star}, {"passed", r.passed}});
      o.checks.push_back({fmt::format("moment bound q={}", q), r.rhs - r.lhs, -1e-10 * e.law().norm_scale(), r.passed});
      if (!r.passed && o.witness.is_null()) o.witness = rows.back();
    }
  } catch (const PreconditionFailed& ex) {
    o.failure = ex.what();
  }
  o.report["rows"] = std::move(rows);
  o.tables.emplace_back("moments.csv", csv.text());
  return o;
}

Outcome cmd_herbst(const ExperimentConfig& c, const Ensemble& e) {
  Outcome o;
  const std::vector<double> grid = c.theta_grid.empty() ? default_theta_grid() : c.theta_grid;
  Csv csv({"theta", "m", "diff_slack", "herbst_slack"});
  try {
    const HerbstReport r = herbst_diagnostic(e.law(), grid);
    o.report["v_scalar"] = r.v_scalar;
    o.report["scale"] = r.scale;
    Json rows = Json::array();
    double worst = INFINITY;
    for (const auto& row : r.rows) {
      csv.row({num(row.theta), num(row.m), num(row.diff_slack), num(row.herbst_slack)});
      rows.push_back({{"theta", row.theta},
                      {"m", row.m},
                      {"dm", row.dm},
                      {"diff_slack", row.diff_slack},
                      {"herbst_slack", row.herbst_slack}});
      const double w = std::min(row.diff_slack, row.herbst_slack);
      if (w < worst) {
        worst = w;
        o.witness = rows.back();
      }
    }
    o.report["rows"] = std::move(rows);
    add_check(o, "differential inequality slack", r.worst_diff_slack, -1e-9 * r.scale);
    add_check(o, "integrated slack", r.worst_herbst_slack, -1e-9 * r.scale);
  } catch (const PreconditionFailed& ex) {
    o.failure = ex.what();
  }
  o.tables.emplace_back("herbst.csv", csv.text());
  return o;
}

void validate(const ExperimentConfig& c) {
  if (std::find(kCommands.begin(), kCommands.end(), c.command) == kCommands.end())
    throw InvalidInput(fmt::format("field 'command': unknown command '{}'", c.command));
  if (!c.seed) throw InvalidInput("field 'seed' is required");
  if (c.d < 1) throw InvalidInput("field 'd' must be positive");
  if (c.n < 1) throw InvalidInput("field 'n' must be positive");
  if (c.samples < 1) throw InvalidInput("field 'N' must be positive");
  if (c.trials < 1) throw InvalidInput("field 'trials' must be positive");
  if (c.out.empty()) throw InvalidInput("field 'out' must not be empty");
  for (double t : c.theta_grid)
    if (!(t > 0.0)) throw InvalidInput("field 'theta_grid' must hold positive numbers");
  for (double t : c.t_grid)
    if (!(t >= 0.0)) throw InvalidInput("field 't_grid' must hold nonnegative numbers");
  for (int q : c.q_list)
    if (q < 2) throw InvalidInput("field 'q_list' must hold integers >= 2");
  if (!c.model_path.empty() && !c.builtin.empty())
    throw InvalidInput("fields 'model' and 'builtin' are mutually exclusive");
  if (c.command == "tail" && c.samples < 100) throw InvalidInput("field 'N' must be at least 100 for tail");
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"rademacher-diag", "wigner-sign", "symmetric-diag", "symmetrized", "biased-diag"};
}

int run(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  Outcome o;
  std::string ensemble_name;
  PhiFunction phi = PhiFunction::entropy();
  try {
    validate(c);
    phi = PhiFunction::parse(c.phi);
    if (c.command == "membership") {
      o = cmd_membership(c, phi);
    } else {
      const bool psd = c.command == "entropy" || c.command == "subadd" || c.command == "moments";
      const Ensemble e = load_law(c, psd);
      ensemble_name = e.name;
      if (c.command == "entropy") o = cmd_entropy(c, e, phi);
      if (c.command == "subadd") o = cmd_subadd(c, e, phi);
      if (c.command == "tail") o = cmd_tail(c, e);
      if (c.command == "moments") o = cmd_moments(c, e);
      if (c.command == "herbst") o = cmd_herbst(c, e);
    }
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  }

  bool ok = o.failure.empty();
  for (const auto& ch : o.checks) ok = ok && ch.passed;

  Json report;
  report["command"] = c.command;
  report["status"] = ok ? "pass" : "fail";
  report["metadata"] = {{"seed", *c.seed},
                        {"N", c.samples},
                        {"d", c.d},
                        {"n", c.n},
                        {"ensemble", c.command == "membership" ? "" : ensemble_name},
                        {"phi", phi_to_json(phi)}};
  if (!o.failure.empty()) report["precondition_failure"] = o.failure;
  report["checks"] = checks_json(o.checks);
  for (auto& [k, v] : o.report.items()) report[k] = v;
  if (!ok && !o.witness.is_null()) report["witness"] = o.witness;

  const fs::path dir = fs::path(c.out) / fmt::format("{}-{}", c.command, *c.seed);
  try {
    fs::create_directories(dir);
    write_text_file(dir / "report.json", report.dump(2) + "\n");
    for (const auto& [name, text] : o.tables) write_text_file(dir / name, text);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  }

  for (const auto& ch : o.checks)
    out << fmt::format("{} {}: {} (threshold {})\n", ch.passed ? "PASS" : "FAIL", ch.name, ch.value, ch.threshold);
  if (!o.failure.empty()) out << "FAIL precondition: " << o.failure << '\n';
  if (!ok && !o.witness.is_null()) err << "witness: " << o.witness.dump() << '\n';
  out << "wrote " << dir.string() << '\n';
  return ok ? kExitOk : kExitCheckFailed;
}

namespace {

template <class T>
T json_get(const Json& j, const char* name) {
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidInput(fmt::format("config field '{}' has the wrong type", name));
  }
}

void apply_file(ExperimentConfig& c, const fs::path& path) {
  const Json j = read_json_file(path);
  if (!j.is_object()) throw InvalidInput("config file must hold a JSON object");
  static const std::vector<std::string> known = {"command", "model", "builtin", "phi", "d", "n", "N", "seed",
                                                 "trials", "theta_grid", "t_grid", "q_list", "out"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw InvalidInput(fmt::format("config field '{}' is not recognized", k));
  if (j.contains("command") && json_get<std::string>(j, "command") != c.command)
    throw InvalidInput("config field 'command' disagrees with the subcommand");
  if (j.contains("model")) {
    const fs::path p = json_get<std::string>(j, "model");
    c.model_path = (p.is_absolute() ? p : path.parent_path() / p).string();
  }
  if (j.contains("builtin")) c.builtin = json_get<std::string>(j, "builtin");
  if (j.contains("phi")) c.phi = j.at("phi").is_string() ? json_get<std::string>(j, "phi") : phi_from_json(j.at("phi")).name();
  if (j.contains("d")) c.d = json_get<int>(j, "d");
  if (j.contains("n")) c.n = json_get<int>(j, "n");
  if (j.contains("N")) {
    if (!j.at("N").is_number_integer() || j.at("N").get<long long>() < 1) throw InvalidInput("config field 'N' must be a positive integer");
    c.samples = json_get<std::size_t>(j, "N");
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw InvalidInput("config field 'seed' must be a nonnegative integer");
    c.seed = json_get<std::uint64_t>(j, "seed");
  }
  if (j.contains("trials")) {
    if (!j.at("trials").is_number_integer() || j.at("trials").get<long long>() < 1) throw InvalidInput("config field 'trials' must be a positive integer");
    c.trials = json_get<std::size_t>(j, "trials");
  }
  if (j.contains("theta_grid")) c.theta_grid = json_get<std::vector<double>>(j, "theta_grid");
  if (j.contains("t_grid")) c.t_grid = json_get<std::vector<double>>(j, "t_grid");
  if (j.contains("q_list")) c.q_list = json_get<std::vector<int>>(j, "q_list");
  if (j.contains("out")) c.out = json_get<std::string>(j, "out");
}

}  // namespace

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Matrix phi-entropy and concentration experiments"};
  app.require_subcommand(1);

  struct Flags {
    std::string config, model, builtin, phi, out;
    int d = 0, n = 0;
    std::size_t samples = 0, trials = 0;
    std::uint64_t seed = 0;
    std::vector<double> theta_grid, t_grid;
    std::vector<int> q_list;
  } f;
  std::map<std::string, CLI::Option*> opts;
  std::vector<CLI::App*> subs;
  for (const auto& name : kCommands) {
    CLI::App* s = app.add_subcommand(name, fmt::format("run the {} experiment", name));
    s->add_option("--config", f.config, "JSON config file; flags override its values");
    s->add_option("--model", f.model, "ProductModel JSON file");
    s->add_option("--builtin", f.builtin, "builtin ensemble")->check(CLI::IsMember(builtin_names()));
    s->add_option("--phi", f.phi, "entropy | power:<q> | affine:<slope>:<intercept>");
    s->add_option("--d", f.d, "dimension");
    s->add_option("--n", f.n, "number of factors");
    s->add_option("--N", f.samples, "Monte Carlo sample count");
    s->add_option("--seed", f.seed, "master seed (required)");
    s->add_option("--trials", f.trials, "membership trials");
    s->add_option("--theta-grid", f.theta_grid, "comma-separated theta values")->delimiter(',');
    s->add_option("--t-grid", f.t_grid, "comma-separated tail levels")->delimiter(',');
    s->add_option("--q-list", f.q_list, "comma-separated moment orders")->delimiter(',');
    s->add_option("--out", f.out, "output directory");
    subs.push_back(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App* s = nullptr;
  for (auto* sub : subs)
    if (sub->parsed()) s = sub;
  if (s == nullptr) {
    err << "error: a subcommand is required\n";
    return kExitUsage;
  }
  ExperimentConfig c;
  c.command = s->get_name();
  auto given = [&](const char* flag) { return s->get_option(flag)->count() > 0; };
  try {
    if (given("--config")) apply_file(c, f.config);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (given("--model")) c.model_path = f.model, c.builtin.clear();
  if (given("--builtin")) c.builtin = f.builtin, c.model_path = given("--model") ? c.model_path : "";
  if (given("--phi")) c.phi = f.phi;
  if (given("--d")) c.d = f.d;
  if (given("--n")) c.n = f.n;
  if (given("--N")) c.samples = f.samples;
  if (given("--seed")) c.seed = f.seed;
  if (given("--trials")) c.trials = f.trials;
  if (given("--theta-grid")) c.theta_grid = f.theta_grid;
  if (given("--t-grid")) c.t_grid = f.t_grid;
  if (given("--q-list")) c.q_list = f.q_list;
  if (given("--out")) c.out = f.out;
  return run(c, out, err);
}

}  // namespace phientropy::cli
