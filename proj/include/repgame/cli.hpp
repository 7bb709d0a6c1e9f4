#pragma once

// Subcommand entry points shared by the command line binary and the tests.
// Each returns a process exit code: 0 success, 2 no equilibrium found or
// verification failed, 3 input validation failure, 4 I/O failure. Commands
// write nothing outside the configured output directory; `out` and `err`
// receive what the binary prints on stdout and stderr.

#include <optional>
#include <string>

#include <json.hpp>

namespace repgame {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNoEquilibrium = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitIo = 4;

struct SweepAxis {
  std::string name;  // delta_bar | delta_hat | pi | c
  double from = 0.0;
  double to = 0.0;
  int steps = 0;  // >= 2
};

struct RunConfig {
  nlohmann::json game;  // inline game document (shorthand or matrix form)
  double delta_hat = 0.0;
  double delta_bar = 0.0;
  double pi = 0.0;
  double tol = 1e-8;
  unsigned long long seed = 1;
  std::string out_dir;  // empty: stdout only, no files
  std::optional<SweepAxis> sweep;
  std::string policy;  // full | none | halve | path to a policy JSON
  std::optional<double> x_required;
  std::string report_path;  // for verify: solve report JSON to certify
  int n_agents = 100000;
  int n_periods = 2000;
  int burn_in = 500;
  int jobs = 0;  // 0: hardware concurrency
};

// Reads the config JSON; a game given as {"file": "path"} is loaded from that
// path. Throws IoError / nlohmann::json::exception on malformed input.
RunConfig load_run_config(const std::string& config_path);

// "AXIS=FROM:TO:STEPS" -> SweepAxis; throws std::invalid_argument.
SweepAxis parse_sweep_axis(const std::string& text);

int cmd_solve(const RunConfig& cfg, std::string& out, std::string& err);
int cmd_sweep(const RunConfig& cfg, std::string& out, std::string& err);
int cmd_simulate(const RunConfig& cfg, std::string& out, std::string& err);
int cmd_disclose(const RunConfig& cfg, std::string& out, std::string& err);
int cmd_verify(const RunConfig& cfg, std::string& out, std::string& err);

}  // namespace repgame
