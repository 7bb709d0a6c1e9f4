#pragma once

// Partial-disclosure analysis: age-conditional disclosure policies, the
// unconditional disclosed-length distribution they induce, and the payoff
// bounds and incentive audits that survive any such policy.

#include <stdexcept>
#include <string>
#include <vector>

#include "repgame/profile.hpp"
#include "repgame/stage_game.hpp"

namespace repgame {

struct TruncationTooCoarse : std::runtime_error {
  explicit TruncationTooCoarse(const std::string& what)
      : std::runtime_error(what) {}
};
struct ShapeMismatch : std::runtime_error {
  explicit ShapeMismatch(const std::string& what) : std::runtime_error(what) {}
};

// Row m gives the distribution of the disclosed count n for true age m.
// Rows must each sum to 1 within 1e-12; by default disclosed counts may not
// exceed the true age.
struct DisclosurePolicy {
  std::vector<std::vector<double>> rows;  // rows[m][n]
  bool restrict_n_le_m = true;

  int m_max() const { return static_cast<int>(rows.size()) - 1; }
  int n_max() const;

  static DisclosurePolicy full(int m_max);           // n = m surely
  static DisclosurePolicy none(int m_max);           // n = 0 surely
  static DisclosurePolicy halve_round_up(int m_max); // n = ceil(m / 2)

  void validate() const;  // throws ShapeMismatch on any violation
};

struct UnconditionalDisclosed {
  std::vector<double> q_tilde;   // disclosed-count distribution
  double truncation_mass = 0.0;  // age mass beyond the policy's last row
};

// Mixes the policy rows with the geometric age prior. The policy must cover
// enough ages that the truncated mass is below 1e-8 (throws
// TruncationTooCoarse otherwise).
UnconditionalDisclosed unconditional_distribution(const DisclosurePolicy& p,
                                                  double delta_bar);

// Lowest and highest best replies to the mixture pi * a1_star +
// (1 - pi) * lowest.
std::pair<int, int> boundary_best_replies(const StageGame& g, double pi);

struct PayoffBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Opportunistic-payoff bounds that hold regardless of the disclosure policy,
// from the boundary best replies to the prior itself.
PayoffBounds no_disclosure_bounds(const StageGame& g,
                                  const BestReplyChain& chain, double pi,
                                  const Discounting& disc);

// The upper bound alone (the cap no policy can beat).
double theorem2_cap(const StageGame& g, const BestReplyChain& chain, double pi,
                    const Discounting& disc);

struct AuditRow {
  int k = 0;
  double q_tilde_k = 0.0;
  double mass = 0.0;        // mu_k * p_k
  bool mass_ok = false;     // mass <= 1 - delta_bar
  double ic_lhs = 0.0;      // posterior odds of the commitment action
  double ic_rhs = 0.0;      // required odds x / (1 - x)
  bool ic_ok = false;
};

struct DisclosureAudit {
  std::vector<AuditRow> rows;
  double aggregate_mass = 0.0;   // sum of mu_k * p_k
  double aggregate_cap = 0.0;    // t * (1 - delta_bar)
  bool aggregate_ok = false;
  bool all_ok = false;
};

// Checks, length by length, whether a candidate profile's commitment play
// could survive under the disclosed-count distribution: the posterior-odds
// incentive condition against the required belief x_required, the per-length
// mass bound, and the aggregate mass cap.
DisclosureAudit audit_constraints(const EquilibriumProfile& profile,
                                  const BeliefPath& path,
                                  const UnconditionalDisclosed& disclosed,
                                  double pi, double delta_bar,
                                  double x_required);

}  // namespace repgame
