#pragma once

// Stationary-profile solver: the erase-indifference point on the chain, the
// per-point value operator, the forward value recursion along clean records,
// horizon bounds, the equilibrium search itself, the survival cutoff beyond
// which the payoff cap binds, and the honest-type erase check.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "repgame/belief.hpp"
#include "repgame/profile.hpp"
#include "repgame/stage_game.hpp"

namespace repgame {

struct NoTermination : std::runtime_error {
  explicit NoTermination(const std::string& what) : std::runtime_error(what) {}
};
struct NonMonotone : std::runtime_error {
  explicit NonMonotone(const std::string& what) : std::runtime_error(what) {}
};
struct InvalidPrior : std::runtime_error {
  explicit InvalidPrior(const std::string& what) : std::runtime_error(what) {}
};
struct NoEquilibriumFound : std::runtime_error {
  std::vector<std::string> diagnostics;
  explicit NoEquilibriumFound(const std::string& what,
                              std::vector<std::string> diag = {})
      : std::runtime_error(what), diagnostics(std::move(diag)) {}
};

// Chain point where the low action's payoff equals c / delta, i.e. where
// erasing and keeping a posted low action tie. Empty when every chain point
// sits below that payoff (the low-discounting regime).
std::optional<ChainPoint> beta_dagger(const StageGame& g,
                                      const BestReplyChain& chain,
                                      double delta);

// Smallest effective discount factor at which the indifference point exists.
double delta_floor(const StageGame& g, const BestReplyChain& chain);

// Lowest posterior on the commitment action at which the top column is a
// best reply.
double pi_star(const BestReplyChain& chain);

struct PointValue {
  double value = 0.0;
  EraseRegime regime = EraseRegime::keep;
};

// Stationary continuation value of an opportunistic player facing beta
// forever: best of "post the low action and erase each period" versus "post
// it once and walk away".
PointValue value_of(const StageGame& g, const BestReplyChain& chain,
                    const ChainPoint& beta, const Discounting& disc);

struct ValuePath {
  std::vector<ChainPoint> beta;     // size t+1, beta[t] = chain top
  std::vector<double> value;        // size t+1
  std::vector<EraseRegime> regime;  // size t+1
  int t = 0;
};

// Forward value recursion from beta0: each step solves the indifference
// between the commitment action today plus the next point's value, and the
// current point's stationary value. Stops at the first step whose required
// continuation exceeds the chain top. Throws NoTermination past the step cap
// and NonMonotone if the value path ever decreases.
ValuePath forward_beta_recursion(const StageGame& g,
                                 const BestReplyChain& chain,
                                 const ChainPoint& beta0,
                                 const Discounting& disc);

// Horizon cap: top payoff divided by the per-step value gain floor.
double t_upper_bound(const StageGame& g, const BestReplyChain& chain,
                     const Discounting& disc);

// Learning-speed floor on the horizon given the starting probability p0.
double t_lower_bound(double p0, double delta_bar);

// Payoff cap in the high-survival regime: (1 - delta) c / delta.
double theorem1_payoff_bound(double erase_cost, double delta);

struct SolveResult {
  EquilibriumProfile profile;
  BeliefPath path;
};

// Equilibrium search. pi = 0 returns the static minmax profile. Otherwise
// three constructions are tried in order (anchored at the erase-indifference
// point, boundary-hit, pure-anchored); each closes the belief system with a
// one-dimensional bisection on its continuous knob and is accepted only when
// every consistency check passes. Throws InvalidPrior for pi outside [0,1)
// and NoEquilibriumFound (with diagnostics) when no construction closes.
SolveResult solve(const StageGame& g, const BestReplyChain& chain,
                  const Discounting& disc, double pi,
                  double residual_tol = 1e-8);

// Smallest survival probability (on a 1e-4 grid, capped at 1 - 1e-6) at
// which the learning-speed floor exceeds the horizon cap; returns 1.0 when
// the cap is never exceeded below the grid ceiling.
double reputation_failure_cutoff(const StageGame& g,
                                 const BestReplyChain& chain, double delta_hat,
                                 double pi);

struct HonestEraseRow {
  int tau = 0;
  double keep_value = 0.0;       // never erase
  double deviation_value = 0.0;  // freeze the record at tau by erasing after
  bool tie = false;
  bool violation = false;
};

struct HonestEraseReport {
  std::vector<HonestEraseRow> rows;
  bool ok = true;  // no strict violations
};

// Confirms the honest type prefers never erasing to freezing its record at
// any length tau <= t (ties reported, not flagged).
HonestEraseReport check_honest_no_erase(const StageGame& g,
                                        const BestReplyChain& chain,
                                        const EquilibriumProfile& profile,
                                        const Discounting& disc,
                                        double tol = kPayoffTol);

}  // namespace repgame
