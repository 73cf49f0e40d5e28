#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace phientropy::cli {

struct ExperimentConfig {
  std::string command;  // entropy | subadd | membership | tail | moments | herbst
  std::string model_path;
  std::string builtin;
  std::string phi = "entropy";
  int d = 3;
  int n = 3;
  std::size_t samples = 100000;  // --N
  std::optional<std::uint64_t> seed;
  std::size_t trials = 200;
  std::vector<double> theta_grid;
  std::vector<double> t_grid;
  std::vector<int> q_list = {2, 3, 4, 5};
  std::string out = "results";
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitCheckFailed = 2;

/// Builtin ensembles accepted by --builtin.
std::vector<std::string> builtin_names();

/// Executes a validated config and writes `<out>/<command>-<seed>/`.
int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv (flags override values from --config) and runs.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace phientropy::cli
