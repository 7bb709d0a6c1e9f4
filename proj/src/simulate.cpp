#include "repgame/simulate.hpp"

#include <algorithm>
#include <cmath>

namespace repgame {

std::uint64_t CounterRng::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double CounterRng::uniform(std::uint64_t agent, std::uint64_t period,
                           std::uint64_t purpose) const {
  const std::uint64_t h = mix(mix(mix(mix(seed) ^ agent) ^ period) ^ purpose);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

namespace {

// Purpose tags for the counter generator. One stream per decision per agent
// per period, so evaluation order never shifts the draws.
constexpr std::uint64_t kDrawConsumer = 0;
constexpr std::uint64_t kDrawCommit = 1;
constexpr std::uint64_t kDrawErase = 2;
constexpr std::uint64_t kDrawExit = 3;
constexpr std::uint64_t kDrawType = 4;

void bump(std::vector<double>& v, int idx) {
  if (idx >= static_cast<int>(v.size())) v.resize(idx + 1, 0.0);
  v[idx] += 1.0;
}

// Number of periods after which the remaining discounted tail is below 0.1%
// of a lifetime value; births later than n_periods minus this window are
// excluded from the lifetime-value sample.
int tail_window(double delta_bar) {
  return static_cast<int>(
      std::ceil(std::log(1e-3) / std::log(delta_bar)));
}

}  // namespace

void sim_step(std::vector<Agent>& agents, const StageGame& g,
              const BestReplyChain& chain, const EquilibriumProfile& profile,
              const BeliefPath& path, const SimConfig& cfg,
              const CounterRng& rng, std::int64_t period,
              std::uint64_t& next_agent_id, SimStats* stats) {
  const int t = profile.t;
  const std::uint64_t up = static_cast<std::uint64_t>(period);
  const int window = tail_window(cfg.delta_bar);

  if (stats && stats->consumer_freq.empty())
    stats->consumer_freq.assign(t + 2,
                                std::vector<double>(g.n2(), 0.0));

  for (Agent& a : agents) {
    if (stats) {
      if (a.type == AgentType::honest)
        bump(stats->honest_chain, a.record);
      else if (a.separated)
        bump(stats->opp_separated, a.record);
      else
        bump(stats->opp_chain, a.record);
    }

    // Consumer action at this record.
    int a2;
    if (a.separated) {
      a2 = chain.pure_actions[0];
    } else {
      const ChainPoint& b = profile.beta[std::min(a.record, t)];
      const bool upper = rng.uniform(a.id, up, kDrawConsumer) < b.weight;
      a2 = chain.pure_actions[b.segment + (upper ? 1 : 0)];
    }
    if (stats) {
      const int row = a.separated ? t + 1 : std::min(a.record, t);
      stats->consumer_freq[row][a2] += 1.0;
    }

    // Firm action.
    int a1;
    if (a.separated)
      a1 = 0;
    else if (a.type == AgentType::honest)
      a1 = g.a1_star;
    else
      a1 = rng.uniform(a.id, up, kDrawCommit) < path.p_at(a.record)
               ? g.a1_star
               : 0;

    // Record transition and erasure cost.
    double cost = 0.0;
    if (a.separated) {
      a.record += 1;
    } else if (a1 == g.a1_star) {
      a.record += 1;
    } else {
      const bool erase =
          rng.uniform(a.id, up, kDrawErase) < profile.erase_prob_at(a.record);
      if (erase) {
        cost = g.erase_cost;
      } else {
        a.separated = true;
        a.record = 0;
      }
    }

    a.disc_payoff += a.weight * (g.u1[a1][a2] - cost);
    a.age += 1;
    a.weight *= cfg.delta_hat;

    // Exit draw; replacement enters next period.
    if (rng.uniform(a.id, up, kDrawExit) >= cfg.delta_bar) {
      if (stats && a.type == AgentType::opportunistic &&
          a.birth_period >= cfg.burn_in &&
          a.birth_period <= static_cast<std::int64_t>(cfg.n_periods) - window) {
        stats->v0_hat += a.disc_payoff;
        stats->completed_lifetimes += 1;
      }
      Agent fresh;
      fresh.id = next_agent_id++;
      fresh.birth_period = period + 1;
      fresh.type = rng.uniform(fresh.id, up, kDrawType) < cfg.pi
                       ? AgentType::honest
                       : AgentType::opportunistic;
      a = fresh;
    }
  }
}

namespace {

double half_l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double av = i < a.size() ? a[i] : 0.0;
    const double bv = i < b.size() ? b[i] : 0.0;
    s += std::abs(av - bv);
  }
  return s;
}

void scale(std::vector<double>& v, double total) {
  if (total <= 0.0) return;
  for (double& x : v) x /= total;
}

}  // namespace

SimStats run_simulation(const StageGame& g, const BestReplyChain& chain,
                        const EquilibriumProfile& profile,
                        const BeliefPath& path, double profile_pi,
                        const Discounting& profile_disc, const SimConfig& cfg) {
  if (std::abs(cfg.pi - profile_pi) > 1e-12 ||
      std::abs(cfg.delta_hat - profile_disc.delta_hat) > 1e-12 ||
      std::abs(cfg.delta_bar - profile_disc.delta_bar) > 1e-12)
    throw ProfileMismatch(
        "simulation parameters disagree with the ones the profile was solved "
        "under");
  if (cfg.n_agents <= 0 || cfg.n_periods <= 0 || cfg.burn_in < 0 ||
      cfg.burn_in >= cfg.n_periods)
    throw std::invalid_argument("simulation size parameters out of range");

  SimStats stats;
  stats.config = cfg;
  stats.erase_mix_used = profile.erase_mix;
  stats.consumer_freq.assign(profile.t + 2,
                             std::vector<double>(g.n2(), 0.0));

  const CounterRng rng{cfg.seed};
  std::vector<Agent> agents(cfg.n_agents);
  for (int i = 0; i < cfg.n_agents; ++i) {
    agents[i].id = static_cast<std::uint64_t>(i);
    agents[i].type = rng.uniform(agents[i].id, 0, kDrawType) < cfg.pi
                         ? AgentType::honest
                         : AgentType::opportunistic;
  }
  std::uint64_t next_agent_id = static_cast<std::uint64_t>(cfg.n_agents);

  for (int period = 0; period < cfg.n_periods; ++period)
    sim_step(agents, g, chain, profile, path, cfg, rng, period, next_agent_id,
             period >= cfg.burn_in ? &stats : nullptr);

  // Normalize the census per type and the consumer table per record row.
  double honest_total = 0.0, opp_total = 0.0;
  for (double v : stats.honest_chain) honest_total += v;
  for (double v : stats.opp_chain) opp_total += v;
  for (double v : stats.opp_separated) opp_total += v;
  scale(stats.honest_chain, honest_total);
  scale(stats.opp_chain, opp_total);
  scale(stats.opp_separated, opp_total);
  for (auto& row : stats.consumer_freq) {
    double s = 0.0;
    for (double v : row) s += v;
    scale(row, s);
  }

  if (stats.completed_lifetimes > 0)
    stats.v0_hat *= (1.0 - profile_disc.delta()) / stats.completed_lifetimes;
  else
    stats.v0_hat = 0.0;

  const RecordDistribution rd =
      record_distribution(profile, path, profile_pi, profile_disc.delta_bar);
  stats.tv_honest = 0.5 * half_l1(stats.honest_chain, rd.honest_chain);
  stats.tv_opportunistic =
      0.5 * (half_l1(stats.opp_chain, rd.opp_chain) +
             half_l1(stats.opp_separated, rd.opp_separated));
  return stats;
}

}  // namespace repgame
