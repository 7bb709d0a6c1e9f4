#pragma once

// Finite-population Monte Carlo of the record game: overlapping generations
// of firms playing a solved profile against short-run consumers, with
// geometric exit, type redraws at birth, and costly erasure. Randomness comes
// from a counter-based generator keyed by (seed, agent, period, purpose), so
// results are bit-identical for a given seed at any worker count.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "repgame/belief.hpp"
#include "repgame/profile.hpp"
#include "repgame/stage_game.hpp"

namespace repgame {

struct ProfileMismatch : std::runtime_error {
  explicit ProfileMismatch(const std::string& what)
      : std::runtime_error(what) {}
};

// Stateless counter-based generator (splitmix64 finalizer chain).
struct CounterRng {
  std::uint64_t seed = 0;

  static std::uint64_t mix(std::uint64_t z);
  // Uniform double in [0, 1) for the given key.
  double uniform(std::uint64_t agent, std::uint64_t period,
                 std::uint64_t purpose) const;
};

enum class AgentType : std::uint8_t { honest, opportunistic };

struct Agent {
  AgentType type = AgentType::honest;
  bool separated = false;
  int record = 0;      // clean-record length, or post-separation length
  int age = 0;         // periods lived
  std::uint64_t id = 0;        // RNG stream key
  std::int64_t birth_period = 0;
  double disc_payoff = 0.0;    // running sum of delta_hat^age * (u - c paid)
  double weight = 1.0;         // current delta_hat^age factor
};

struct SimConfig {
  int n_agents = 0;
  int n_periods = 0;
  int burn_in = 0;
  std::uint64_t seed = 1;
  double pi = 0.0;
  double delta_hat = 0.0;
  double delta_bar = 0.0;
};

struct SimStats {
  SimConfig config;
  // Census-averaged record-state distributions (post burn-in).
  std::vector<double> honest_chain;
  std::vector<double> opp_chain;
  std::vector<double> opp_separated;
  // Consumer action tallies by clean-record length: freq[k][a2]. The last row
  // aggregates separated records.
  std::vector<std::vector<double>> consumer_freq;
  // Lifetime-value estimate for opportunistic entrants.
  double v0_hat = 0.0;
  int completed_lifetimes = 0;
  // Total-variation distances of the census against the stationary
  // distribution implied by the profile.
  double tv_honest = 0.0;
  double tv_opportunistic = 0.0;
  double erase_mix_used = 1.0;
};

// Advances every agent one period in place. Exposed for tests; run() drives
// it. `period` keys the RNG, `census` (optional) receives state tallies
// before the exit draw.
void sim_step(std::vector<Agent>& agents, const StageGame& g,
              const BestReplyChain& chain, const EquilibriumProfile& profile,
              const BeliefPath& path, const SimConfig& cfg,
              const CounterRng& rng, std::int64_t period,
              std::uint64_t& next_agent_id, SimStats* stats);

// Full run: burn-in, census-averaged distributions, consumer tallies, and the
// entrant lifetime-value estimate (completed lifetimes of agents born in the
// post-burn-in window only). Throws ProfileMismatch when the config's
// parameters disagree with the ones the profile was solved under.
SimStats run_simulation(const StageGame& g, const BestReplyChain& chain,
                        const EquilibriumProfile& profile,
                        const BeliefPath& path, double profile_pi,
                        const Discounting& profile_disc, const SimConfig& cfg);

}  // namespace repgame
