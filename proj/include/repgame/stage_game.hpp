#pragma once

// Finite two-player stage game between a long-run player (rows, ordered low to
// high) and a short-run player (columns, ordered per the monotonicity
// assumptions), together with the short-run player's best-reply chain: the set
// of best replies to mixtures of the commitment action and the lowest action,
// swept by the mixing weight. Everything downstream (recursions, solver,
// verifier, simulator) works on these two objects.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace repgame {

// Absolute tolerance used for payoff comparisons throughout the library.
inline constexpr double kPayoffTol = 1e-9;

struct NonAdjacentIndifference : std::runtime_error {
  explicit NonAdjacentIndifference(const std::string& what)
      : std::runtime_error(what) {}
};
struct NoSuchAction : std::runtime_error {
  explicit NoSuchAction(const std::string& what) : std::runtime_error(what) {}
};
struct NonPositiveGap : std::runtime_error {
  explicit NonPositiveGap(const std::string& what) : std::runtime_error(what) {}
};

// A single validation finding. Fatal issues reject the game; warnings are
// informational (near-degenerate geometry that does not break the solver).
struct ValidationIssue {
  std::string condition;
  bool fatal = true;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  std::vector<std::string> notes;

  bool ok() const {
    for (const auto& i : issues)
      if (i.fatal) return false;
    return true;
  }
  std::size_t warning_count() const {
    std::size_t n = 0;
    for (const auto& i : issues)
      if (!i.fatal) ++n;
    return n;
  }
};

// Immutable after construction via make(); payoffs of the long-run player are
// normalized so u1(lowest action, best reply to it) == 0. The subtracted
// constant is recorded so reports can undo it.
struct StageGame {
  std::vector<std::string> a1_labels;  // index 0 = lowest action
  std::vector<std::string> a2_labels;  // ascending per the payoff assumptions
  std::vector<std::vector<double>> u1; // [a1][a2], normalized
  std::vector<std::vector<double>> u2; // [a1][a2]
  int a1_star = 1;                     // commitment action (index into a1)
  double erase_cost = 0.0;             // c > 0
  double normalization_shift = 0.0;    // amount subtracted from every u1 entry

  static StageGame make(std::vector<std::string> a1_labels,
                        std::vector<std::string> a2_labels,
                        std::vector<std::vector<double>> u1,
                        std::vector<std::vector<double>> u2, int a1_star,
                        double erase_cost);

  // The two-action trust game: rows {low, high}, columns {reject, trust},
  // u1 = [[0, 1+b], [-b, 1]], u2 = [[0, -x], [x, 1]], commitment = high.
  static StageGame product_choice(double b, double x, double erase_cost);

  int n1() const { return static_cast<int>(u1.size()); }
  int n2() const { return n1() ? static_cast<int>(u1.front().size()) : 0; }

  // Unique pure best replies (validation rejects ties).
  int best_reply_2(int a1) const;
  int best_reply_1(int a2) const;
  int a2_bottom() const { return best_reply_2(0); }
  int a2_star() const { return best_reply_2(a1_star); }
};

// Checks, in order: shape and ordering sanity, unique pure best replies in
// both directions, the no-knife-edge condition on mixtures of action pairs,
// strict monotonicity of u1 (decreasing in own action, increasing in the
// opponent's), strictly increasing differences of u2, a strictly valuable
// commitment action, and 0 < c < c_bar.
ValidationReport validate_assumptions(const StageGame& g);

// A point on the best-reply chain: mixture placing `weight` on
// pure_actions[segment + 1] and the rest on pure_actions[segment]. Pure
// points are stored canonically as (segment, 0); the chain top is
// (#pure - 1, 0).
struct ChainPoint {
  int segment = 0;
  double weight = 0.0;

  double position() const { return segment + weight; }
};

inline bool operator==(const ChainPoint& a, const ChainPoint& b) {
  return a.position() == b.position();
}
inline bool operator<(const ChainPoint& a, const ChainPoint& b) {
  return a.position() < b.position();
}
inline bool operator<=(const ChainPoint& a, const ChainPoint& b) {
  return a.position() <= b.position();
}

struct BestReplyChain {
  std::vector<int> pure_actions;   // ascending column indices; front = bottom
  std::vector<double> thresholds;  // thresholds[j] splits pure j from j+1

  int pure_count() const { return static_cast<int>(pure_actions.size()); }
  int segment_count() const { return pure_count() - 1; }

  ChainPoint bottom() const { return {0, 0.0}; }
  ChainPoint top() const { return {pure_count() - 1, 0.0}; }

  ChainPoint canonical(int segment, double weight) const;
  bool is_pure(const ChainPoint& p, double tol = kPayoffTol) const;

  // Pure index of a (canonically pure) point.
  int pure_index(const ChainPoint& p) const { return p.segment; }

  // Belief about the commitment action that rationalizes the point: the
  // segment threshold for interior mixtures; for pure points, the midpoint of
  // the admissible interval (callers wanting the interval use x_interval).
  double pinned_x(const ChainPoint& p) const;
  std::pair<double, double> x_interval_of_pure(int pure_idx) const;

  // Lowest belief at which the chain top is a best reply.
  double top_threshold() const { return thresholds.back(); }
};

// Builds the chain by sweeping the weight on the commitment action from 0 to
// 1 and collecting the short-run player's best replies; thresholds solve the
// adjacent-pair indifference conditions in closed form. Throws
// NonAdjacentIndifference if the best-reply regions do not tile the weight
// interval in ascending column order.
BestReplyChain build_best_reply_chain(const StageGame& g);

// Long-run player's payoff from a1 against a chain point.
double u1_on_chain(const StageGame& g, const BestReplyChain& chain, int a1,
                   const ChainPoint& p);

// Monotone inverse of u1_on_chain in the chain coordinate for fixed a1.
// Throws std::domain_error if v lies outside the attainable range.
ChainPoint chain_point_at_value(const StageGame& g, const BestReplyChain& chain,
                                int a1, double v);

// All best replies (with ties) to the belief mixture x * a1_star +
// (1-x) * lowest.
std::vector<int> u2_posterior_best_reply(const StageGame& g, double x,
                                         double tol = kPayoffTol);

// Largest erase cost consistent with a reputation problem: the minimum over
// pure columns of the payoff gain from dropping to the lowest action relative
// to the lowest action whose best reply differs from the bottom column.
struct CostBound {
  double c_bar = 0.0;
  int witness_a1 = 0;  // the comparison action used in the minimization
};
CostBound erasure_cost_bound(const StageGame& g);

// Per-period gain, net of the erase cost, from playing the lowest action
// instead of the commitment action, minimized over chain vertices. Throws
// NonPositiveGap if not strictly positive.
double incentive_gap(const StageGame& g, const BestReplyChain& chain);

}  // namespace repgame
