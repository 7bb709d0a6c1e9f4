#pragma once

// Shared value types describing a solved stationary profile of the repeated
// game: the consumer action path along clean records, the long-run player's
// values and erase behavior, and the belief/population path.

#include <string>
#include <vector>

#include "repgame/stage_game.hpp"

namespace repgame {

// Effective discount factor is the product of patience and survival.
struct Discounting {
  double delta_hat = 0.0;  // patience
  double delta_bar = 0.0;  // per-period survival probability

  double delta() const { return delta_hat * delta_bar; }
};

enum class EraseRegime { keep, indifferent, erase };

const char* to_string(EraseRegime r);

enum class SolveBranch {
  minmax,        // zero prior on the honest type: static play, no erasures
  anchored,      // consumer path starts at the erase-indifference point
  boundary_hit,  // consumer path reaches the top action exactly at t-1
  pure_anchor,   // consumer path starts at a pure chain action
};

const char* to_string(SolveBranch b);

// Admissible-belief interval attached to a record length where the consumer
// action is pure (the posterior is only interval-constrained there).
struct MultiplicityNote {
  int k = 0;
  int pure_action = 0;  // column index
  double x_lo = 0.0;
  double x_hi = 1.0;
};

struct EquilibriumProfile {
  int t = 0;        // first record length with reputation 1
  int t0 = -1;      // last record length without certain erasure (-1: none)
  double payoff = 0.0;
  std::vector<ChainPoint> beta;      // size t+1; beta[t] is the chain top
  std::vector<double> value;         // size t+1
  std::vector<EraseRegime> regime;   // size t+1
  double erase_mix = 1.0;            // erase probability at t0 when indifferent
  SolveBranch branch = SolveBranch::minmax;
  std::vector<MultiplicityNote> multiplicity;
  std::vector<std::string> notes;

  // Erase probability the profile prescribes after the low action at record
  // length k (clamped to the last row beyond t).
  double erase_prob_at(int k) const;
};

// Posterior and population path along clean records of length k.
struct BeliefPath {
  std::vector<double> p_star;      // k = 0..t-1: commitment-action probability
  std::vector<double> mu_star;     // k = 0..t-1: opportunistic mass at length k
  std::vector<double> x;           // k = 0..t-1: consumer posterior on a1_star
  std::vector<double> reputation;  // k = 0..t: posterior on the honest type
  double likelihood_ratio = 0.0;   // pi / (1 - pi)

  double p_at(int k) const {
    return k < static_cast<int>(p_star.size()) ? p_star[k] : 0.0;
  }
};

}  // namespace repgame
