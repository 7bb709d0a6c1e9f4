#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "repgame/cli.hpp"
#include "repgame/report.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "Solver, verifier, and simulator for repeated reputation games with "
      "costly record erasure"};
  app.require_subcommand(1);

  std::string config_path, out_dir, sweep_text, policy, report_path;
  unsigned long long seed = 1;
  double tol = 1e-8, x_required = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration JSON")
        ->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--seed", seed, "RNG seed (overrides config)");
    sub->add_option("--tol", tol, "numeric tolerance (overrides config)");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve one parameter point");
  add_common(solve);
  CLI::App* sweep = app.add_subcommand("sweep", "solve along one axis");
  add_common(sweep);
  sweep->add_option("--sweep", sweep_text,
                    "axis as NAME=FROM:TO:STEPS (overrides config)");
  CLI::App* simulate =
      app.add_subcommand("simulate", "finite-population Monte Carlo");
  add_common(simulate);
  CLI::App* disclose =
      app.add_subcommand("disclose", "partial-disclosure bounds and audit");
  add_common(disclose);
  disclose->add_option("--policy", policy,
                       "full | none | halve | policy JSON path");
  disclose->add_option("--x-required", x_required,
                       "required posterior for the incentive audit");
  CLI::App* verify =
      app.add_subcommand("verify", "certify a solve report");
  add_common(verify);
  verify->add_option("--report", report_path, "solve report JSON to certify");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? repgame::kExitOk : repgame::kExitValidation;
  }

  CLI::App* sub = app.get_subcommands().front();

  repgame::RunConfig cfg;
  try {
    cfg = repgame::load_run_config(config_path);
  } catch (const repgame::IoError& e) {
    std::cerr << e.what() << "\n";
    return repgame::kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "config malformed: " << e.what() << "\n";
    return repgame::kExitValidation;
  }

  if (sub->count("--out") > 0) cfg.out_dir = out_dir;
  if (sub->count("--seed") > 0) cfg.seed = seed;
  if (sub->count("--tol") > 0) cfg.tol = tol;
  if (sub == sweep && !sweep_text.empty()) {
    try {
      cfg.sweep = repgame::parse_sweep_axis(sweep_text);
    } catch (const std::invalid_argument& e) {
      std::cerr << e.what() << "\n";
      return repgame::kExitValidation;
    }
  }
  if (sub == disclose) {
    if (!policy.empty()) cfg.policy = policy;
    if (sub->count("--x-required") > 0) cfg.x_required = x_required;
  }
  if (sub == verify && !report_path.empty()) cfg.report_path = report_path;

  std::string out, err;
  int rc = repgame::kExitValidation;
  if (sub == solve)
    rc = repgame::cmd_solve(cfg, out, err);
  else if (sub == sweep)
    rc = repgame::cmd_sweep(cfg, out, err);
  else if (sub == simulate)
    rc = repgame::cmd_simulate(cfg, out, err);
  else if (sub == disclose)
    rc = repgame::cmd_disclose(cfg, out, err);
  else if (sub == verify)
    rc = repgame::cmd_verify(cfg, out, err);

  std::cout << out;
  std::cerr << err;
  return rc;
}
