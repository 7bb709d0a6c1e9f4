#include "repgame/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <future>
#include <sstream>
#include <thread>

#include "repgame/disclosure.hpp"
#include "repgame/report.hpp"
#include "repgame/simulate.hpp"
#include "repgame/solver.hpp"
#include "repgame/verify.hpp"

namespace fs = std::filesystem;

namespace repgame {

namespace {

std::string resolve_against(const fs::path& dir, const std::string& path) {
  fs::path p(path);
  if (p.is_absolute() || dir.empty()) return path;
  return (dir / p).string();
}

bool known_policy_name(const std::string& s) {
  return s == "full" || s == "none" || s == "halve";
}

struct Prepared {
  StageGame g = StageGame::product_choice(1.0, 0.5, 0.2);
  BestReplyChain chain;
  Discounting disc;
};

int prepare(const RunConfig& cfg, std::string& err, Prepared& out) {
  try {
    out.g = parse_game(cfg.game);
  } catch (const nlohmann::json::exception& e) {
    err += std::string("game document malformed: ") + e.what() + "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    err += std::string("game rejected: ") + e.what() + "\n";
    return kExitValidation;
  }
  const ValidationReport rep = validate_assumptions(out.g);
  for (const ValidationIssue& issue : rep.issues) {
    if (issue.fatal)
      err += "invalid game: " + issue.condition + "\n";
    else
      err += "warning: " + issue.condition + "\n";
  }
  if (!rep.ok()) return kExitValidation;
  try {
    out.chain = build_best_reply_chain(out.g);
  } catch (const std::exception& e) {
    err += std::string("best-reply chain rejected: ") + e.what() + "\n";
    return kExitValidation;
  }
  if (!(cfg.delta_hat > 0.0 && cfg.delta_hat <= 1.0) ||
      !(cfg.delta_bar > 0.0 && cfg.delta_bar < 1.0)) {
    err += "discount parameters out of range\n";
    return kExitValidation;
  }
  out.disc = Discounting{cfg.delta_hat, cfg.delta_bar};
  return kExitOk;
}

int write_pair(const std::string& out_dir, const std::string& stem,
               const std::string& json_text, const std::string& csv_text,
               std::string& err) {
  if (out_dir.empty()) return kExitOk;
  try {
    fs::create_directories(out_dir);
    atomic_write((fs::path(out_dir) / (stem + ".json")).string(), json_text);
    if (!csv_text.empty())
      atomic_write((fs::path(out_dir) / (stem + ".csv")).string(), csv_text);
  } catch (const std::exception& e) {
    err += std::string("output failed: ") + e.what() + "\n";
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace

RunConfig load_run_config(const std::string& config_path) {
  const std::string text = read_file(config_path);
  const nlohmann::json j = nlohmann::json::parse(text);
  const fs::path dir = fs::path(config_path).parent_path();

  RunConfig cfg;
  const nlohmann::json& game = j.at("game");
  if (game.is_object() && game.contains("file")) {
    const std::string gp =
        resolve_against(dir, game.at("file").get<std::string>());
    cfg.game = nlohmann::json::parse(read_file(gp));
  } else {
    cfg.game = game;
  }
  cfg.delta_hat = j.at("delta_hat").get<double>();
  cfg.delta_bar = j.at("delta_bar").get<double>();
  cfg.pi = j.at("pi").get<double>();
  if (j.contains("tol")) cfg.tol = j.at("tol").get<double>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<unsigned long long>();
  if (j.contains("out_dir"))
    cfg.out_dir = resolve_against(dir, j.at("out_dir").get<std::string>());
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    cfg.sweep = SweepAxis{s.at("axis").get<std::string>(),
                          s.at("from").get<double>(), s.at("to").get<double>(),
                          s.at("steps").get<int>()};
  }
  if (j.contains("policy")) {
    cfg.policy = j.at("policy").get<std::string>();
    if (!known_policy_name(cfg.policy))
      cfg.policy = resolve_against(dir, cfg.policy);
  }
  if (j.contains("x_required"))
    cfg.x_required = j.at("x_required").get<double>();
  if (j.contains("report_path"))
    cfg.report_path = resolve_against(dir, j.at("report_path").get<std::string>());
  if (j.contains("n_agents")) cfg.n_agents = j.at("n_agents").get<int>();
  if (j.contains("n_periods")) cfg.n_periods = j.at("n_periods").get<int>();
  if (j.contains("burn_in")) cfg.burn_in = j.at("burn_in").get<int>();
  if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<int>();
  return cfg;
}

SweepAxis parse_sweep_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("sweep axis must look like NAME=FROM:TO:STEPS");
  SweepAxis axis;
  axis.name = text.substr(0, eq);
  if (axis.name != "delta_bar" && axis.name != "delta_hat" &&
      axis.name != "pi" && axis.name != "c")
    throw std::invalid_argument("unknown sweep axis: " + axis.name);
  const std::string rest = text.substr(eq + 1);
  const auto c1 = rest.find(':');
  const auto c2 = rest.find(':', c1 == std::string::npos ? 0 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw std::invalid_argument("sweep axis must look like NAME=FROM:TO:STEPS");
  try {
    axis.from = std::stod(rest.substr(0, c1));
    axis.to = std::stod(rest.substr(c1 + 1, c2 - c1 - 1));
    axis.steps = std::stoi(rest.substr(c2 + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("sweep axis numbers malformed: " + text);
  }
  if (axis.steps < 2)
    throw std::invalid_argument("sweep needs at least two steps");
  return axis;
}

int cmd_solve(const RunConfig& cfg, std::string& out, std::string& err) {
  Prepared prep;
  if (int rc = prepare(cfg, err, prep); rc != kExitOk) return rc;
  SolveResult sr;
  try {
    sr = solve(prep.g, prep.chain, prep.disc, cfg.pi, cfg.tol);
  } catch (const NoEquilibriumFound& e) {
    err += std::string("no equilibrium: ") + e.what() + "\n";
    for (const std::string& d : e.diagnostics) err += "  " + d + "\n";
    return kExitNoEquilibrium;
  } catch (const std::invalid_argument& e) {
    err += std::string("invalid parameters: ") + e.what() + "\n";
    return kExitValidation;
  } catch (const InvalidPrior& e) {
    err += std::string("invalid parameters: ") + e.what() + "\n";
    return kExitValidation;
  }
  const SolveReport report{prep.g, cfg.delta_hat, cfg.delta_bar, cfg.pi,
                           sr.profile, sr.path};
  const nlohmann::json j = solve_report_to_json(report);
  out += j.dump(2) + "\n";
  return write_pair(cfg.out_dir, "solve", j.dump(2) + "\n",
                    solve_report_to_csv(report), err);
}

int cmd_sweep(const RunConfig& cfg, std::string& out, std::string& err) {
  if (!cfg.sweep.has_value()) {
    err += "sweep axis required\n";
    return kExitValidation;
  }
  const SweepAxis axis = *cfg.sweep;
  if (axis.steps < 2 ||
      (axis.name != "delta_bar" && axis.name != "delta_hat" &&
       axis.name != "pi" && axis.name != "c")) {
    err += "sweep axis malformed\n";
    return kExitValidation;
  }
  Prepared prep;
  if (int rc = prepare(cfg, err, prep); rc != kExitOk) return rc;

  std::vector<SweepRow> rows(axis.steps);
  auto run_point = [&](int i) {
    const double v =
        axis.from + (axis.to - axis.from) * i / double(axis.steps - 1);
    SweepRow& row = rows[i];
    row.axis = axis.name;
    row.axis_value = v;
    try {
      double dh = cfg.delta_hat, db = cfg.delta_bar, pi = cfg.pi;
      const StageGame* gp = &prep.g;
      const BestReplyChain* cp = &prep.chain;
      StageGame local = prep.g;
      BestReplyChain local_chain;
      if (axis.name == "delta_bar") db = v;
      if (axis.name == "delta_hat") dh = v;
      if (axis.name == "pi") pi = v;
      if (axis.name == "c") {
        nlohmann::json doc = cfg.game;
        if (doc.contains("product_choice"))
          doc["product_choice"]["c"] = v;
        else
          doc["erase_cost"] = v;
        local = parse_game(doc);
        const ValidationReport vr = validate_assumptions(local);
        if (!vr.ok()) {
          row.note = "invalid game at this cost";
          return;
        }
        local_chain = build_best_reply_chain(local);
        gp = &local;
        cp = &local_chain;
      }
      const Discounting disc{dh, db};
      const SolveResult sr = solve(*gp, *cp, disc, pi, cfg.tol);
      row.solved = true;
      row.branch = to_string(sr.profile.branch);
      row.t = sr.profile.t;
      row.t0 = sr.profile.t0;
      row.payoff = sr.profile.payoff;
      row.p0_star = sr.path.p_star.empty() ? 0.0 : sr.path.p_star[0];
      row.t_upper = t_upper_bound(*gp, *cp, disc);
      row.t_lower = t_lower_bound(row.p0_star, db);
      row.at_erasure_bound =
          std::abs(row.payoff -
                   theorem1_payoff_bound(gp->erase_cost, disc.delta())) <=
          1e-9;
    } catch (const NoEquilibriumFound& e) {
      row.note = e.what();
    } catch (const std::exception& e) {
      row.note = e.what();
    }
  };

  int jobs = cfg.jobs > 0
                 ? cfg.jobs
                 : static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::clamp(jobs, 1, axis.steps);
  std::vector<std::future<void>> workers;
  for (int w = 0; w < jobs; ++w)
    workers.push_back(std::async(std::launch::async, [&, w] {
      for (int i = w; i < axis.steps; i += jobs) run_point(i);
    }));
  for (auto& f : workers) f.get();

  const std::string csv = sweep_to_csv(rows);
  out += csv;
  return write_pair(cfg.out_dir, "sweep", sweep_to_json(rows).dump(2) + "\n",
                    csv, err);
}

int cmd_simulate(const RunConfig& cfg, std::string& out, std::string& err) {
  Prepared prep;
  if (int rc = prepare(cfg, err, prep); rc != kExitOk) return rc;
  SolveResult sr;
  try {
    sr = solve(prep.g, prep.chain, prep.disc, cfg.pi, cfg.tol);
  } catch (const NoEquilibriumFound& e) {
    err += std::string("no equilibrium: ") + e.what() + "\n";
    return kExitNoEquilibrium;
  } catch (const std::exception& e) {
    err += std::string("invalid parameters: ") + e.what() + "\n";
    return kExitValidation;
  }
  const SimConfig sim_cfg{cfg.n_agents, cfg.n_periods, cfg.burn_in,
                          cfg.seed,     cfg.pi,        cfg.delta_hat,
                          cfg.delta_bar};
  SimStats stats;
  try {
    stats = run_simulation(prep.g, prep.chain, sr.profile, sr.path, cfg.pi,
                           prep.disc, sim_cfg);
  } catch (const std::invalid_argument& e) {
    err += std::string("invalid simulation size: ") + e.what() + "\n";
    return kExitValidation;
  }
  const RecordDistribution predicted =
      record_distribution(sr.profile, sr.path, cfg.pi, cfg.delta_bar);
  const nlohmann::json j = sim_stats_to_json(stats, predicted);
  out += j.dump(2) + "\n";
  return write_pair(cfg.out_dir, "simulate", j.dump(2) + "\n",
                    sim_census_to_csv(stats, predicted), err);
}

int cmd_disclose(const RunConfig& cfg, std::string& out, std::string& err) {
  Prepared prep;
  if (int rc = prepare(cfg, err, prep); rc != kExitOk) return rc;
  const PayoffBounds bounds =
      no_disclosure_bounds(prep.g, prep.chain, cfg.pi, prep.disc);
  const double cap = theorem2_cap(prep.g, prep.chain, cfg.pi, prep.disc);

  DisclosurePolicy policy;
  const int m_max = static_cast<int>(
      std::ceil(std::log(1e-9) / std::log(cfg.delta_bar)));
  const std::string name = cfg.policy.empty() ? "full" : cfg.policy;
  try {
    if (name == "full")
      policy = DisclosurePolicy::full(m_max);
    else if (name == "none")
      policy = DisclosurePolicy::none(m_max);
    else if (name == "halve")
      policy = DisclosurePolicy::halve_round_up(m_max);
    else
      policy = policy_from_json(nlohmann::json::parse(read_file(name)));
    policy.validate();
  } catch (const IoError& e) {
    err += std::string("policy unreadable: ") + e.what() + "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err += std::string("policy rejected: ") + e.what() + "\n";
    return kExitValidation;
  }

  UnconditionalDisclosed disclosed;
  try {
    disclosed = unconditional_distribution(policy, cfg.delta_bar);
  } catch (const std::exception& e) {
    err += std::string("policy rejected: ") + e.what() + "\n";
    return kExitValidation;
  }

  SolveResult sr;
  bool solved = true;
  std::string solve_note;
  try {
    sr = solve(prep.g, prep.chain, prep.disc, cfg.pi, cfg.tol);
  } catch (const NoEquilibriumFound& e) {
    solved = false;
    solve_note = e.what();
  } catch (const std::exception& e) {
    err += std::string("invalid parameters: ") + e.what() + "\n";
    return kExitValidation;
  }

  nlohmann::json j;
  std::string csv;
  if (solved) {
    const double x_required =
        cfg.x_required.value_or(prep.chain.top_threshold());
    const DisclosureAudit audit = audit_constraints(
        sr.profile, sr.path, disclosed, cfg.pi, cfg.delta_bar, x_required);
    j = disclosure_audit_to_json(audit, disclosed, bounds, cap);
    csv = disclosure_audit_to_csv(audit);
  } else {
    j = disclosure_audit_to_json(DisclosureAudit{}, disclosed, bounds, cap);
    j["note"] = "no equilibrium: " + solve_note;
  }
  out += j.dump(2) + "\n";
  if (int rc = write_pair(cfg.out_dir, "disclose", j.dump(2) + "\n", csv, err);
      rc != kExitOk)
    return rc;
  return solved ? kExitOk : kExitNoEquilibrium;
}

int cmd_verify(const RunConfig& cfg, std::string& out, std::string& err) {
  if (cfg.report_path.empty()) {
    err += "verify needs a report path\n";
    return kExitValidation;
  }
  std::string text;
  try {
    text = read_file(cfg.report_path);
  } catch (const IoError& e) {
    err += std::string(e.what()) + "\n";
    return kExitIo;
  }
  SolveReport report;
  BestReplyChain chain;
  try {
    report = solve_report_from_json(nlohmann::json::parse(text));
    chain = build_best_reply_chain(report.game);
  } catch (const std::exception& e) {
    err += std::string("report malformed: ") + e.what() + "\n";
    return kExitValidation;
  }
  const ConstraintReport rep = verify_equilibrium(
      report.game, chain, Discounting{report.delta_hat, report.delta_bar},
      report.pi, report.profile, report.path, cfg.tol);
  const nlohmann::json j = constraint_report_to_json(rep);
  out += j.dump(2) + "\n";
  if (int rc = write_pair(cfg.out_dir, "verify", j.dump(2) + "\n",
                          constraint_report_to_csv(rep), err);
      rc != kExitOk)
    return rc;
  return rep.all_pass() ? kExitOk : kExitNoEquilibrium;
}

}  // namespace repgame
