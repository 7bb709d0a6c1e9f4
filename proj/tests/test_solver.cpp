#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "repgame/belief.hpp"
#include "repgame/solver.hpp"
#include "repgame/stage_game.hpp"
#include "support/random_games.hpp"

using namespace repgame;

namespace {

StageGame flagship_game() { return StageGame::product_choice(1.0, 0.5, 0.2); }

const Discounting kFlagshipDisc{0.9, 0.99};

}  // namespace

TEST_CASE("erase-indifference point on the chain") {
  const StageGame g = flagship_game();
  const BestReplyChain chain = build_best_reply_chain(g);

  CHECK(delta_floor(g, chain) == doctest::Approx(0.1));
  CHECK(pi_star(chain) == doctest::Approx(0.5));

  // c / delta = 0.2 / 0.891, reached on the first segment at weight ~0.1122.
  const auto bd = beta_dagger(g, chain, kFlagshipDisc.delta());
  REQUIRE(bd.has_value());
  CHECK(bd->segment == 0);
  CHECK(bd->weight == doctest::Approx(0.112233445567).epsilon(1e-9));
  CHECK(u1_on_chain(g, chain, 0, *bd) ==
        doctest::Approx(0.2 / 0.891).epsilon(1e-12));

  // At the floor the indifference point sits exactly on the chain top.
  const auto at_floor = beta_dagger(g, chain, 0.1);
  REQUIRE(at_floor.has_value());
  CHECK(at_floor->position() == doctest::Approx(1.0));

  // Below it no chain point pays enough to justify erasing.
  CHECK(!beta_dagger(g, chain, 0.05).has_value());
}

TEST_CASE("stationary point values by regime") {
  const StageGame g = flagship_game();
  const BestReplyChain chain = build_best_reply_chain(g);
  const auto bd = beta_dagger(g, chain, kFlagshipDisc.delta());
  REQUIRE(bd.has_value());

  const PointValue at_dagger = value_of(g, chain, *bd, kFlagshipDisc);
  CHECK(at_dagger.regime == EraseRegime::indifferent);
  CHECK(at_dagger.value == doctest::Approx(0.0244668911336).epsilon(1e-9));

  const PointValue at_bottom = value_of(g, chain, chain.bottom(), kFlagshipDisc);
  CHECK(at_bottom.regime == EraseRegime::keep);
  CHECK(at_bottom.value == doctest::Approx(0.0));

  const PointValue at_top = value_of(g, chain, chain.top(), kFlagshipDisc);
  CHECK(at_top.regime == EraseRegime::erase);
  CHECK(at_top.value == doctest::Approx(1.8));
}

TEST_CASE("forward value recursion from the indifference point") {
  const StageGame g = flagship_game();
  const BestReplyChain chain = build_best_reply_chain(g);
  const auto bd = beta_dagger(g, chain, kFlagshipDisc.delta());
  REQUIRE(bd.has_value());

  const ValuePath vp = forward_beta_recursion(g, chain, *bd, kFlagshipDisc);
  CHECK(vp.t == 19);
  REQUIRE(vp.beta.size() == 20);
  CHECK(vp.value[0] == doctest::Approx(0.0244668911336).epsilon(1e-9));
  CHECK(vp.value[1] == doctest::Approx(0.122334455668).epsilon(1e-9));
  CHECK(vp.beta[1].weight == doctest::Approx(0.161167227834).epsilon(1e-9));
  CHECK(vp.beta[vp.t].position() == doctest::Approx(1.0));
  CHECK(vp.regime[0] == EraseRegime::indifferent);
  CHECK(vp.regime[1] == EraseRegime::erase);

  const double delta = kFlagshipDisc.delta();
  const double gap = incentive_gap(g, chain);
  for (int k = 0; k < vp.t; ++k) {
    const double promised = (1.0 - delta) *
                                u1_on_chain(g, chain, g.a1_star, vp.beta[k]) +
                            delta * vp.value[k + 1];
    if (k < vp.t - 1) {
      // One-step promise-keeping holds exactly on interior steps.
      CHECK(vp.value[k] == doctest::Approx(promised).epsilon(1e-10));
      // Values rise by at least the discounted incentive gap.
      CHECK(vp.value[k + 1] - vp.value[k] >=
            (1.0 - delta) * gap / delta - 1e-12);
    } else {
      // The capped step delivers weakly less than the interior recursion
      // would demand, never more.
      CHECK(vp.value[k] >= promised - 1e-10);
      CHECK(vp.value[k + 1] >= vp.value[k] - 1e-12);
    }
    CHECK(vp.beta[k + 1].position() >= vp.beta[k].position() - 1e-12);
  }
}

TEST_CASE("horizon bounds") {
  const StageGame g = flagship_game();
  const BestReplyChain chain = build_best_reply_chain(g);

  CHECK(t_upper_bound(g, chain, kFlagshipDisc) ==
        doctest::Approx(22.9357798165).epsilon(1e-9));
  // 2 / ((1 - 0.5) * 0.8) with the effective discount at one half.
  CHECK(t_upper_bound(g, chain, Discounting{0.625, 0.8}) ==
        doctest::Approx(5.0).epsilon(1e-12));

  CHECK(t_lower_bound(0.310345, 0.9) == doctest::Approx(3.10345));
  CHECK(t_lower_bound(0.310345, 0.99) == doctest::Approx(31.0345));
  CHECK(t_lower_bound(0.0, 0.9) == doctest::Approx(0.0));

  CHECK(theorem1_payoff_bound(0.2, 0.891) ==
        doctest::Approx(0.0244668911336).epsilon(1e-9));
  CHECK(theorem1_payoff_bound(0.2, 0.5) == doctest::Approx(0.2));
}

TEST_CASE("flagship solve: anchored branch") {
  const StageGame g = flagship_game();
  const BestReplyChain chain = build_best_reply_chain(g);
  const SolveResult sr = solve(g, chain, kFlagshipDisc, 0.6);
  const EquilibriumProfile& pr = sr.profile;
  const BeliefPath& path = sr.path;

  CHECK(pr.branch == SolveBranch::anchored);
  CHECK(pr.t == 19);
  CHECK(pr.t0 == 0);
  CHECK(pr.payoff == doctest::Approx(0.0244668911336).epsilon(1e-9));
  CHECK(pr.payoff ==
        doctest::Approx(theorem1_payoff_bound(g.erase_cost,
                                              kFlagshipDisc.delta()))
            .epsilon(1e-9));
  CHECK(pr.beta[0].weight == doctest::Approx(0.112233445567).epsilon(1e-9));
  CHECK(pr.erase_mix == doctest::Approx(0.612765464325).epsilon(1e-7));
  CHECK(pr.erase_mix > 0.0);
  CHECK(pr.erase_mix < 1.0);
  CHECK(pr.beta[pr.t].position() == doctest::Approx(1.0));

  REQUIRE(static_cast<int>(path.x.size()) == pr.t);
  CHECK(path.x[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(path.p_star[0] == doctest::Approx(0.140880691619).epsilon(1e-7));
  CHECK(path.mu_star[0] == doctest::Approx(0.0208844242706).epsilon(1e-7));
  // Soft landing: the last pooling probability is driven to zero.
  CHECK(std::abs(path.p_star[pr.t - 1]) <= 1e-8);
  CHECK(path.reputation[pr.t] == doctest::Approx(1.0));

  // The horizon respects both analytic bounds.
  CHECK(pr.t >= t_lower_bound(path.p_star[0], 0.99) - 1e-9);
  CHECK(pr.t <= t_upper_bound(g, chain, kFlagshipDisc) + 1e-9);

  // Along the equilibrium path (certain erasure from step one on), pooling
  // decays, by at most the birth inflow per step, and the mass of observed
  // commitment play stays under that inflow.
  for (int k = 1; k < pr.t; ++k) {
    const double drop = path.p_star[k - 1] - path.p_star[k];
    CHECK(drop >= -1e-12);
    CHECK(drop <= (1.0 - 0.99) + 1e-12);
    const double bound = (1.0 - 0.99) * (path.x[k] - path.p_star[k - 1]) *
                         (1.0 - path.p_star[k]) / path.x[k];
    CHECK(drop <= bound + 1e-12);
  }
  for (int k = 0; k < pr.t; ++k)
    CHECK(path.mu_star[k] * path.p_star[k] <= (1.0 - 0.99) + 1e-12);
}

TEST_CASE("degenerate prior yields the static profile") {
  const StageGame g = flagship_game();
  const BestReplyChain chain = build_best_reply_chain(g);
  const SolveResult sr = solve(g, chain, kFlagshipDisc, 0.0);
  CHECK(sr.profile.branch == SolveBranch::minmax);
  CHECK(sr.profile.t == 0);
  CHECK(sr.profile.payoff == 0.0);
  REQUIRE(sr.profile.beta.size() == 1);
  CHECK(sr.profile.beta[0].position() == doctest::Approx(0.0));
  CHECK(sr.path.p_star.empty());
  CHECK(sr.path.mu_star.empty());
  CHECK(sr.path.x.empty());
  REQUIRE(sr.path.reputation.size() == 1);
  CHECK(sr.path.reputation[0] == doctest::Approx(0.0));
}

TEST_CASE("patient limit pins the payoff at the erasure bound") {
  const StageGame g = flagship_game();
  const BestReplyChain chain = build_best_reply_chain(g);
  const Discounting disc{0.9, 0.9999};
  const SolveResult sr = solve(g, chain, disc, 0.6);
  const double bound = 0.2 * (1.0 - 0.9 * 0.9999) / (0.9 * 0.9999);
  CHECK(sr.profile.payoff == doctest::Approx(bound).epsilon(1e-9));
  CHECK(sr.profile.payoff ==
        doctest::Approx(theorem1_payoff_bound(g.erase_cost, disc.delta()))
            .epsilon(1e-9));
}

TEST_CASE("boundary-hit branch at moderate survival") {
  const StageGame g = flagship_game();
  const BestReplyChain chain = build_best_reply_chain(g);
  const SolveResult sr = solve(g, chain, Discounting{0.9, 0.5}, 0.6);
  const EquilibriumProfile& pr = sr.profile;

  CHECK(pr.branch == SolveBranch::boundary_hit);
  CHECK(pr.t == 2);
  CHECK(pr.t0 == -1);
  CHECK(pr.erase_mix == doctest::Approx(1.0));
  CHECK(pr.payoff == doctest::Approx(37.0 / 45.0).epsilon(1e-9));
  CHECK(pr.beta[0].position() == doctest::Approx(23.0 / 45.0).epsilon(1e-9));
  CHECK(pr.beta[1].position() == doctest::Approx(1.0));
  CHECK(pr.beta[2].position() == doctest::Approx(1.0));
  REQUIRE(sr.path.x.size() == 2);
  CHECK(sr.path.x[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(sr.path.x[1] == doctest::Approx(9.0 / 11.0).epsilon(1e-9));
}

TEST_CASE("boundary-hit branch with an immediate top anchor") {
  const StageGame g = flagship_game();
  const BestReplyChain chain = build_best_reply_chain(g);
  const SolveResult sr = solve(g, chain, Discounting{0.9, 0.3}, 0.6);
  const EquilibriumProfile& pr = sr.profile;

  CHECK(pr.branch == SolveBranch::boundary_hit);
  CHECK(pr.t == 1);
  CHECK(pr.t0 == -1);
  CHECK(pr.payoff == doctest::Approx(1.8).epsilon(1e-9));
  CHECK(pr.beta[0].position() == doctest::Approx(1.0));
  REQUIRE(sr.path.x.size() == 1);
  CHECK(sr.path.x[0] == doctest::Approx(0.512195121951).epsilon(1e-9));
  CHECK(sr.path.reputation[1] == doctest::Approx(1.0));
}

TEST_CASE("pure-anchored branch below the trust threshold prior") {
  const StageGame g = flagship_game();
  const BestReplyChain chain = build_best_reply_chain(g);
  const SolveResult sr = solve(g, chain, kFlagshipDisc, 0.3);
  const EquilibriumProfile& pr = sr.profile;

  CHECK(pr.branch == SolveBranch::pure_anchor);
  CHECK(pr.t == 19);
  CHECK(pr.t0 == 0);
  CHECK(pr.payoff == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(pr.beta[0].position() == doctest::Approx(0.0));
  CHECK(pr.regime[0] == EraseRegime::keep);
  REQUIRE(!sr.path.x.empty());
  CHECK(sr.path.x[0] == doctest::Approx(0.358844242706).epsilon(1e-7));
  // The anchor's posterior stays inside the admissible interval of the
  // bottom action.
  CHECK(sr.path.x[0] > 0.3);
  CHECK(sr.path.x[0] < 0.5);
  // Same continuation ladder as the anchored flagship from step one on.
  CHECK(pr.value[1] == doctest::Approx(0.122334455668).epsilon(1e-9));
  CHECK(pr.beta[1].weight == doctest::Approx(0.161167227834).epsilon(1e-9));
}

TEST_CASE("solver rejects out-of-range inputs") {
  const StageGame g = flagship_game();
  const BestReplyChain chain = build_best_reply_chain(g);
  CHECK_THROWS_AS(solve(g, chain, kFlagshipDisc, -0.1), InvalidPrior);
  CHECK_THROWS_AS(solve(g, chain, kFlagshipDisc, 1.0), InvalidPrior);
  CHECK_THROWS_AS(solve(g, chain, Discounting{0.0, 0.99}, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve(g, chain, Discounting{1.2, 0.99}, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve(g, chain, Discounting{0.9, 0.0}, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve(g, chain, Discounting{0.9, 1.0}, 0.5),
                  std::invalid_argument);
  // Full patience is admissible; survival alone discounts the future.
  CHECK_NOTHROW(solve(g, chain, Discounting{1.0, 0.9}, 0.5));
}

TEST_CASE("survival cutoff where learning outpaces the horizon cap") {
  const StageGame g = flagship_game();
  const BestReplyChain chain = build_best_reply_chain(g);

  const double cut = reputation_failure_cutoff(g, chain, 0.9, 0.5);
  CHECK(cut == doctest::Approx(0.9851).epsilon(1e-9));

  // Analytic crossing of p0/(1-db) against the horizon cap solves
  // 0.8 db^2 + 1.75 db - 2.5 = 0; the grid answer is the first multiple of
  // 1e-4 strictly past that root.
  const double root = (-1.75 + std::sqrt(1.75 * 1.75 + 4.0 * 0.8 * 2.5)) /
                      (2.0 * 0.8);
  CHECK(cut >= root);
  CHECK(cut - root <= 1e-4 + 1e-9);

  // The defining property holds at the cutoff and fails one grid step below,
  // for priors on both sides of the trust threshold.
  for (const double pi : {0.3, 0.7}) {
    const double c2 = reputation_failure_cutoff(g, chain, 0.9, pi);
    REQUIRE(c2 < 1.0);
    const double l = pi / (1.0 - pi);
    const auto crossed = [&](double db) {
      const double p0 = p0_closed_form(0.5, l, db);
      return t_lower_bound(p0, db) >
             t_upper_bound(g, chain, Discounting{0.9, db});
    };
    CHECK(crossed(c2));
    CHECK(!crossed(c2 - 1e-4));
  }

  // Fully patient firms never hit the cap: learning speed and horizon scale
  // together.
  CHECK(reputation_failure_cutoff(g, chain, 1.0, 0.5) == doctest::Approx(1.0));

  CHECK_THROWS_AS(reputation_failure_cutoff(g, chain, 0.9, 1.0), InvalidPrior);
}

TEST_CASE("honest type never wants to freeze its record") {
  const StageGame g = flagship_game();
  const BestReplyChain chain = build_best_reply_chain(g);
  const SolveResult sr = solve(g, chain, kFlagshipDisc, 0.6);
  const HonestEraseReport rep =
      check_honest_no_erase(g, chain, sr.profile, kFlagshipDisc);
  CHECK(rep.ok);
  REQUIRE(!rep.rows.empty());
  for (const auto& row : rep.rows) {
    CHECK(!row.violation);
    CHECK(row.keep_value >= row.deviation_value - 1e-9);
  }

  // A profile whose consumer path collapses after the first record makes
  // freezing at the start strictly better.
  EquilibriumProfile fake;
  fake.t = 1;
  fake.beta = {chain.top(), chain.bottom()};
  fake.value = {0.0, 0.0};
  fake.regime = {EraseRegime::erase, EraseRegime::erase};
  const HonestEraseReport bad =
      check_honest_no_erase(g, chain, fake, kFlagshipDisc);
  CHECK(!bad.ok);
  CHECK(bad.rows[0].violation);

  // With a free eraser and a flat path the comparison ties exactly.
  const StageGame free_erase = StageGame::product_choice(1.0, 0.5, 0.0);
  EquilibriumProfile flat;
  flat.t = 1;
  flat.beta = {chain.top(), chain.top()};
  flat.value = {0.0, 0.0};
  flat.regime = {EraseRegime::erase, EraseRegime::erase};
  const HonestEraseReport tied =
      check_honest_no_erase(free_erase, chain, flat, kFlagshipDisc);
  CHECK(tied.ok);
  CHECK(tied.rows[0].tie);
}

TEST_CASE("value recursion identities on random instances") {
  std::mt19937_64 rng(424242);
  for (int trial = 0; trial < 12; ++trial) {
    const testing::PatientInstance inst = testing::draw_patient_instance(rng);
    const EquilibriumProfile& pr = inst.solved.profile;
    const double delta = inst.disc.delta();
    const double gap = incentive_gap(inst.g, inst.chain);
    REQUIRE(pr.t >= 1);
    for (int k = 0; k < pr.t; ++k) {
      const double promised =
          (1.0 - delta) *
              u1_on_chain(inst.g, inst.chain, inst.g.a1_star, pr.beta[k]) +
          delta * pr.value[k + 1];
      if (k < pr.t - 1) {
        CHECK(pr.value[k] == doctest::Approx(promised).epsilon(1e-8));
        CHECK(pr.value[k + 1] >=
              pr.value[k] + (1.0 - delta) * gap / delta - 1e-10);
      } else {
        CHECK(pr.value[k] >= promised - 1e-8);
        CHECK(pr.value[k + 1] >= pr.value[k] - 1e-10);
      }
      CHECK(pr.beta[k + 1].position() >= pr.beta[k].position() - 1e-10);
    }
    CHECK(pr.beta[pr.t].position() ==
          doctest::Approx(inst.chain.top().position()));
  }
}
