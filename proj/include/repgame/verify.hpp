#pragma once

// Definition-level certification of solved profiles, independent of the
// solver's code paths: every equilibrium condition is re-derived from raw
// payoff evaluations, enumerated deviations, and bisection (no closed forms),
// and reported as one constraint row per (record length, condition).

#include <string>
#include <vector>

#include "repgame/profile.hpp"
#include "repgame/stage_game.hpp"

namespace repgame {

struct ConstraintRow {
  int k = 0;
  std::string id;      // P1-optimality | P2-best-reply | Bayes | boundary | mass
  std::string detail;  // which sub-condition
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // pass iff slack >= -tol
  bool pass = false;
};

struct ConstraintReport {
  std::vector<ConstraintRow> rows;  // sorted by (k, id, detail)
  double tol = 1e-8;

  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
  std::size_t fail_count() const {
    std::size_t n = 0;
    for (const auto& r : rows)
      if (!r.pass) ++n;
    return n;
  }
};

// Checks the long-run player's one-shot-deviation optimality (against the
// enumerated deviation set), the consumer's best reply at every record
// length, posterior and stationarity consistency of (x, p, mu), the boundary
// conditions at t-1 and t, and the per-length mass bound.
ConstraintReport verify_equilibrium(const StageGame& g,
                                    const BestReplyChain& chain,
                                    const Discounting& disc, double pi,
                                    const EquilibriumProfile& profile,
                                    const BeliefPath& path, double tol = 1e-8);

struct BruteForcePoint {
  ChainPoint beta0;
  double residual = 0.0;
  double payoff = 0.0;
  int t = 0;
};

struct BruteForceCluster {
  std::vector<BruteForcePoint> points;  // ascending chain position
  double lo_position = 0.0;
  double hi_position = 0.0;
};

struct BruteForceResult {
  std::vector<BruteForceCluster> clusters;
  double cell_width = 0.0;  // grid spacing in chain-position units
};

// Grid search over starting consumer actions: each candidate is expanded by a
// naive value recursion (direct max comparisons, per-step bisection) and a
// belief recursion solved by per-step bisection on the likelihood equation;
// candidates whose consistency residual is below 10 * tol are clustered by
// grid adjacency. Intended for small chains (<= 3 segments) at modest
// resolution.
BruteForceResult brute_force_profiles(const StageGame& g,
                                      const BestReplyChain& chain,
                                      const Discounting& disc, double pi,
                                      int grid_resolution, double tol = 1e-8);

}  // namespace repgame
