#pragma once

// Random game factory for property tests: additively separable long-run
// payoffs plus supermodular short-run payoffs, rejection-sampled until the
// maintained assumptions validate, with the erase cost drawn strictly inside
// its admissible band.

#include <random>

#include "repgame/profile.hpp"
#include "repgame/solver.hpp"
#include "repgame/stage_game.hpp"

namespace repgame::testing {

struct RandomGame {
  StageGame g = StageGame::product_choice(1.0, 0.5, 0.2);
  BestReplyChain chain;
};

// Draws until validation passes and the best-reply chain builds; throws
// std::runtime_error after too many rejections.
RandomGame random_valid_game(std::mt19937_64& rng);

// A random game solved in the high-survival regime: survival is escalated
// through a fixed ladder until the solver lands on the anchored branch.
struct PatientInstance {
  StageGame g = StageGame::product_choice(1.0, 0.5, 0.2);
  BestReplyChain chain;
  Discounting disc;
  double pi = 0.0;
  SolveResult solved;
};

PatientInstance draw_patient_instance(std::mt19937_64& rng);

}  // namespace repgame::testing
