#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "golden.hpp"
#include "phientropy/cli.hpp"
#include "phientropy/io.hpp"

using namespace phientropy;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("golden configs return their recorded exit codes deterministically") {
  const auto entries = golden::load_manifest();
  REQUIRE(entries.size() == 10);
  const fs::path root = golden::scratch_dir("cli-golden");
  for (const auto& e : entries) {
    CAPTURE(e.config);
    const golden::Run a = golden::run_config(e, root / "a");
    const golden::Run b = golden::run_config(e, root / "b");
    CHECK(a.exit_code == e.expected_exit);
    CHECK(b.exit_code == e.expected_exit);
    CHECK(a.files == b.files);
    if (e.expected_exit != cli::kExitUsage) CHECK_FALSE(a.files.empty());
  }
}

TEST_CASE("cli outputs") {
  const fs::path out = golden::scratch_dir("cli-outputs");
  std::ostringstream so, se;
  const std::string outs = out.string();
  const char* argv[] = {"phientropy", "subadd", "--builtin", "rademacher-diag", "--d", "3", "--n", "3",
                        "--phi", "entropy", "--seed", "7", "--out", outs.c_str()};
  REQUIRE(cli::main_entry(14, argv, so, se) == cli::kExitOk);
  const Json report = Json::parse(slurp(out / "subadd-7" / "report.json"));
  CHECK(report["status"] == "pass");
  CHECK(report["metadata"]["seed"] == 7);
  CHECK(report["metadata"]["d"] == 3);
  CHECK(report["metadata"].contains("ensemble"));
  CHECK(report["subadditivity_gap"].get<double>() >= 0.0);
  CHECK(slurp(out / "subadd-7" / "subadd.csv").rfind("coordinate,conditional_term\n", 0) == 0);

  const char* mem[] = {"phientropy", "membership", "--phi", "power:4.0", "--d", "1", "--trials", "500",
                       "--seed", "7", "--out", outs.c_str()};
  CHECK(cli::main_entry(12, mem, so, se) == cli::kExitCheckFailed);
  const Json mrep = Json::parse(slurp(out / "membership-7" / "report.json"));
  CHECK(mrep["witness"]["gap"].get<double>() < 0.0);
  CHECK(mrep["witness"].contains("S"));
  CHECK(slurp(out / "membership-7" / "membership.csv").rfind("trial,alpha,gap,scale\n", 0) == 0);

  const char* tail[] = {"phientropy", "tail", "--builtin", "wigner-sign", "--d", "2", "--N", "2000",
                        "--t-grid", "0,0.5,1,2", "--seed", "4", "--out", outs.c_str()};
  CHECK(cli::main_entry(14, tail, so, se) == cli::kExitOk);
  const std::string csv = slurp(out / "tail-4" / "tail.csv");
  CHECK(csv.rfind("t,bound,empirical,stderr\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

  const char* herbst[] = {"phientropy", "herbst", "--builtin", "symmetric-diag", "--d", "2", "--n", "2",
                          "--theta-grid", "0.5,1", "--seed", "4", "--out", outs.c_str()};
  CHECK(cli::main_entry(14, herbst, so, se) == cli::kExitOk);
  CHECK(slurp(out / "herbst-4" / "herbst.csv").rfind("theta,m,diff_slack,herbst_slack\n", 0) == 0);

  const char* mom[] = {"phientropy", "moments", "--builtin", "wigner-sign", "--d", "2", "--q-list", "2,3",
                       "--seed", "4", "--out", outs.c_str()};
  CHECK(cli::main_entry(12, mom, so, se) == cli::kExitOk);
  CHECK(slurp(out / "moments-4" / "moments.csv").rfind("q,lhs,rhs,c_star\n", 0) == 0);
}

TEST_CASE("flags override config values") {
  const fs::path out = golden::scratch_dir("cli-override");
  const std::string cfg = (golden::golden_dir() / "subadd_rdiag.json").string();
  const std::string outs = out.string();
  std::ostringstream so, se;
  const char* argv[] = {"phientropy", "subadd", "--config", cfg.c_str(), "--seed", "8", "--d", "2", "--out", outs.c_str()};
  CHECK(cli::main_entry(10, argv, so, se) == cli::kExitOk);
  const Json report = Json::parse(slurp(out / "subadd-8" / "report.json"));
  CHECK(report["metadata"]["d"] == 2);
  CHECK(report["metadata"]["n"] == 3);
}

TEST_CASE("usage errors name the offending field") {
  const std::string outs = golden::scratch_dir("cli-usage").string();
  auto run = [&](std::vector<std::string> args) {
    args.insert(args.begin(), "phientropy");
    args.push_back("--out");
    args.push_back(outs);
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream so, se;
    const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), so, se);
    return std::make_pair(code, se.str());
  };
  auto [c1, e1] = run({"subadd", "--builtin", "wigner-sign"});
  CHECK(c1 == cli::kExitUsage);
  CHECK(e1.find("seed") != std::string::npos);
  auto [c2, e2] = run({"subadd", "--builtin", "wigner-sign", "--seed", "1", "--d", "0"});
  CHECK(c2 == cli::kExitUsage);
  CHECK(e2.find("'d'") != std::string::npos);
  auto [c3, e3] = run({"entropy", "--model", "/nonexistent/model.json", "--seed", "1"});
  CHECK(c3 == cli::kExitUsage);
  CHECK(e3.find("model") != std::string::npos);
  auto [c4, e4] = run({"subadd", "--builtin", "nope", "--seed", "1"});
  CHECK(c4 == cli::kExitUsage);
  auto [c5, e5] = run({"frobnicate", "--seed", "1"});
  CHECK(c5 == cli::kExitUsage);
  auto [c6, e6] = run({"membership", "--phi", "cosh", "--seed", "1"});
  CHECK(c6 == cli::kExitUsage);
  auto [c7, e7] = run({"tail", "--builtin", "wigner-sign", "--seed", "1", "--N", "50"});
  CHECK(c7 == cli::kExitUsage);
  CHECK(e7.find("'N'") != std::string::npos);
  (void)e4, (void)e5, (void)e6;

  std::ostringstream so, se;
  const char* help[] = {"phientropy", "--help"};
  CHECK(cli::main_entry(2, help, so, se) == cli::kExitOk);
  CHECK(so.str().find("subadd") != std::string::npos);
}

TEST_CASE("bad config files are usage errors") {
  const fs::path dir = golden::scratch_dir("cli-bad-config");
  const fs::path cfg = dir / "bad.json";
  std::ofstream(cfg) << R"({"command": "subadd", "builtin": "wigner-sign", "seed": 1, "colour": "red"})";
  const std::string cfgs = cfg.string(), outs = dir.string();
  std::ostringstream so, se;
  const char* argv[] = {"phientropy", "subadd", "--config", cfgs.c_str(), "--out", outs.c_str()};
  CHECK(cli::main_entry(6, argv, so, se) == cli::kExitUsage);
  CHECK(se.str().find("colour") != std::string::npos);

  std::ofstream(cfg, std::ios::trunc) << R"({"seed": -3})";
  std::ostringstream so2, se2;
  CHECK(cli::main_entry(6, argv, so2, se2) == cli::kExitUsage);
  CHECK(se2.str().find("seed") != std::string::npos);
}
