#pragma once

// JSON and CSV serialization for games, solved profiles, simulation census
// tables, disclosure audits, and verification reports. All floating point
// output uses 12 significant digits so reports round-trip losslessly at the
// tolerances the rest of the system works to.

#include <optional>
#include <string>
#include <vector>

#include "repgame/belief.hpp"
#include "repgame/disclosure.hpp"
#include "repgame/profile.hpp"
#include "repgame/simulate.hpp"
#include "repgame/stage_game.hpp"
#include "repgame/verify.hpp"

#include <json.hpp>

namespace repgame {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numbers are emitted through this helper everywhere so JSON and CSV agree.
std::string format_sig(double v);

// Writes content to path atomically: a sibling temp file is written, flushed,
// and renamed over the target.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// ---- game ----
nlohmann::json game_to_json(const StageGame& g);
StageGame game_from_json(const nlohmann::json& j);

// Accepts either a full matrix-form game or the {"product_choice": {...}}
// shorthand.
StageGame parse_game(const nlohmann::json& j);

// ---- solve report ----
struct SolveReport {
  StageGame game;
  double delta_hat = 0.0;
  double delta_bar = 0.0;
  double pi = 0.0;
  EquilibriumProfile profile;
  BeliefPath path;
};

nlohmann::json solve_report_to_json(const SolveReport& r);
SolveReport solve_report_from_json(const nlohmann::json& j);
std::string solve_report_to_csv(const SolveReport& r);

// ---- sweep ----
struct SweepRow {
  std::string axis;
  double axis_value = 0.0;
  bool solved = false;
  std::string branch;
  int t = 0;
  int t0 = 0;
  double payoff = 0.0;
  double p0_star = 0.0;
  double t_upper = 0.0;   // record-length span bound
  double t_lower = 0.0;   // p0-implied span bound
  bool at_erasure_bound = false;  // payoff equals (1-delta)c/delta
  std::string note;
};

std::string sweep_to_csv(const std::vector<SweepRow>& rows);
nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows);

// ---- verification ----
nlohmann::json constraint_report_to_json(const ConstraintReport& r);
std::string constraint_report_to_csv(const ConstraintReport& r);

// ---- simulation ----
nlohmann::json sim_stats_to_json(const SimStats& s, const RecordDistribution& predicted);
std::string sim_census_to_csv(const SimStats& s, const RecordDistribution& predicted);

// ---- disclosure ----
nlohmann::json disclosure_audit_to_json(const DisclosureAudit& a,
                                        const UnconditionalDisclosed& disclosed,
                                        const PayoffBounds& bounds,
                                        double cap);
std::string disclosure_audit_to_csv(const DisclosureAudit& a);

nlohmann::json policy_to_json(const DisclosurePolicy& p);
DisclosurePolicy policy_from_json(const nlohmann::json& j);

}  // namespace repgame
