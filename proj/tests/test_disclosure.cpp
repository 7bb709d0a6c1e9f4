#include <doctest.h>

#include <cmath>
#include <vector>

#include "repgame/disclosure.hpp"
#include "repgame/solver.hpp"
#include "repgame/stage_game.hpp"
#include "support/oracles.hpp"

using namespace repgame;

namespace {

StageGame flagship_game() { return StageGame::product_choice(1.0, 0.5, 0.2); }

const Discounting kFlagshipDisc{0.9, 0.99};

}  // namespace

TEST_CASE("policy constructors and validation") {
  const DisclosurePolicy full = DisclosurePolicy::full(5);
  CHECK(full.m_max() == 5);
  CHECK(full.n_max() == 5);
  full.validate();
  for (int m = 0; m <= 5; ++m) {
    for (int n = 0; n < static_cast<int>(full.rows[m].size()); ++n)
      CHECK(full.rows[m][n] == doctest::Approx(n == m ? 1.0 : 0.0));
  }

  const DisclosurePolicy none = DisclosurePolicy::none(5);
  none.validate();
  for (int m = 0; m <= 5; ++m) CHECK(none.rows[m][0] == doctest::Approx(1.0));

  const DisclosurePolicy halve = DisclosurePolicy::halve_round_up(6);
  halve.validate();
  CHECK(halve.rows[0][0] == doctest::Approx(1.0));
  CHECK(halve.rows[1][1] == doctest::Approx(1.0));
  CHECK(halve.rows[2][1] == doctest::Approx(1.0));
  CHECK(halve.rows[5][3] == doctest::Approx(1.0));
  CHECK(halve.rows[6][3] == doctest::Approx(1.0));

  DisclosurePolicy bad_sum;
  bad_sum.rows = {{1.0}, {0.4, 0.4}};
  CHECK_THROWS_AS(bad_sum.validate(), ShapeMismatch);

  DisclosurePolicy negative;
  negative.rows = {{1.0}, {1.2, -0.2}};
  CHECK_THROWS_AS(negative.validate(), ShapeMismatch);

  DisclosurePolicy overshoot;
  overshoot.rows = {{1.0}, {0.0, 0.0, 1.0}};
  CHECK_THROWS_AS(overshoot.validate(), ShapeMismatch);
  overshoot.restrict_n_le_m = false;
  overshoot.validate();
  CHECK(overshoot.n_max() == 2);

  DisclosurePolicy empty;
  CHECK_THROWS_AS(empty.validate(), ShapeMismatch);
}

TEST_CASE("unconditional disclosed distribution") {
  // Full disclosure reproduces the geometric age prior.
  const double db = 0.9;
  const UnconditionalDisclosed full =
      unconditional_distribution(DisclosurePolicy::full(220), db);
  const std::vector<double> prefix = testing::geometric_prefix(db, 221);
  REQUIRE(full.q_tilde.size() >= prefix.size());
  for (std::size_t n = 0; n < prefix.size(); ++n)
    CHECK(full.q_tilde[n] == doctest::Approx(prefix[n]).epsilon(1e-12));
  CHECK(full.truncation_mass == doctest::Approx(std::pow(db, 221)));

  // No disclosure collapses to a point mass at zero.
  const UnconditionalDisclosed none =
      unconditional_distribution(DisclosurePolicy::none(220), db);
  CHECK(none.q_tilde[0] == doctest::Approx(1.0 - full.truncation_mass));
  for (std::size_t n = 1; n < none.q_tilde.size(); ++n)
    CHECK(none.q_tilde[n] == doctest::Approx(0.0));

  // A policy too short for the survival rate is rejected.
  CHECK_THROWS_AS(unconditional_distribution(DisclosurePolicy::full(10), 0.99),
                  TruncationTooCoarse);
}

TEST_CASE("halving policy: frozen head and Monte Carlo agreement") {
  const double db = 0.99;
  const int m_max = 2062;
  const DisclosurePolicy halve = DisclosurePolicy::halve_round_up(m_max);
  const UnconditionalDisclosed got = unconditional_distribution(halve, db);

  CHECK(got.q_tilde[0] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(got.q_tilde[1] == doctest::Approx(0.019701).epsilon(1e-12));
  CHECK(got.q_tilde[2] == doctest::Approx(0.0193089501).epsilon(1e-12));
  CHECK(got.q_tilde[3] == doctest::Approx(0.018924701993).epsilon(1e-12));
  CHECK(got.truncation_mass ==
        doctest::Approx(std::pow(db, m_max + 1)).epsilon(1e-6));

  // Sampling noise across ~1000 disclosed counts puts the expected total
  // variation near 0.006 at a million draws; 0.01 leaves no room for any
  // systematic mixing error.
  const std::vector<double> mc = testing::mc_disclosed(halve, db, 1000000, 99);
  CHECK(testing::tv_distance(got.q_tilde, mc) < 0.01);
  for (int n = 0; n < 5; ++n)
    CHECK(std::abs(got.q_tilde[n] - mc[n]) < 5e-4);

  // Halving discloses weakly fewer periods than full disclosure.
  const UnconditionalDisclosed full =
      unconditional_distribution(DisclosurePolicy::full(m_max), db);
  CHECK(testing::fosd_at_least(full.q_tilde, got.q_tilde));
}

TEST_CASE("boundary best replies and policy-free payoff bounds") {
  const StageGame g = flagship_game();
  const BestReplyChain chain = build_best_reply_chain(g);

  CHECK(boundary_best_replies(g, 0.6) == std::pair<int, int>{1, 1});
  CHECK(boundary_best_replies(g, 0.3) == std::pair<int, int>{0, 0});
  CHECK(boundary_best_replies(g, 0.5) == std::pair<int, int>{0, 1});

  const PayoffBounds high = no_disclosure_bounds(g, chain, 0.6, kFlagshipDisc);
  CHECK(high.lower == doctest::Approx(1.8).epsilon(1e-12));
  CHECK(high.upper == doctest::Approx(1.8).epsilon(1e-12));

  const PayoffBounds low = no_disclosure_bounds(g, chain, 0.3, kFlagshipDisc);
  CHECK(low.lower == doctest::Approx(0.0));
  CHECK(low.upper == doctest::Approx(0.0244668911336).epsilon(1e-9));

  const PayoffBounds knife = no_disclosure_bounds(g, chain, 0.5, kFlagshipDisc);
  CHECK(knife.lower == doctest::Approx(0.0));
  CHECK(knife.upper == doctest::Approx(1.8).epsilon(1e-12));

  CHECK(theorem2_cap(g, chain, 0.6, kFlagshipDisc) == doctest::Approx(high.upper));
  CHECK(theorem2_cap(g, chain, 0.3, kFlagshipDisc) == doctest::Approx(low.upper));
  CHECK(theorem2_cap(g, chain, 0.5, kFlagshipDisc) == doctest::Approx(knife.upper));
}

TEST_CASE("audit passes the solved path and flags impossible demands") {
  const StageGame g = flagship_game();
  const BestReplyChain chain = build_best_reply_chain(g);
  const SolveResult sr = solve(g, chain, kFlagshipDisc, 0.6);

  const UnconditionalDisclosed disclosed =
      unconditional_distribution(DisclosurePolicy::full(2100), 0.99);

  const DisclosureAudit ok = audit_constraints(
      sr.profile, sr.path, disclosed, 0.6, 0.99, chain.top_threshold());
  CHECK(ok.all_ok);
  CHECK(ok.aggregate_ok);
  REQUIRE(static_cast<int>(ok.rows.size()) == sr.profile.t);
  double mass = 0.0;
  for (std::size_t k = 0; k < sr.path.p_star.size(); ++k)
    mass += sr.path.mu_star[k] * sr.path.p_star[k];
  CHECK(ok.aggregate_mass == doctest::Approx(mass).epsilon(1e-12));
  CHECK(ok.aggregate_cap ==
        doctest::Approx(sr.profile.t * (1.0 - 0.99)).epsilon(1e-12));
  CHECK(ok.aggregate_mass < ok.aggregate_cap);
  for (const auto& row : ok.rows) {
    CHECK(row.mass_ok);
    CHECK(row.ic_ok);
  }

  // Demanding near-certain trust at every length cannot be met.
  const DisclosureAudit bad = audit_constraints(sr.profile, sr.path, disclosed,
                                                0.6, 0.99, 0.999);
  CHECK(!bad.all_ok);
  bool some_ic_failed = false;
  for (const auto& row : bad.rows) some_ic_failed |= !row.ic_ok;
  CHECK(some_ic_failed);
}
