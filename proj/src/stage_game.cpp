#include "repgame/stage_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace repgame {

namespace {

// Argmax of a row/column with the index of the runner-up gap, used both for
// best replies and for tie detection.
struct ArgMax {
  int index = 0;
  double best = -std::numeric_limits<double>::infinity();
  double second = -std::numeric_limits<double>::infinity();
};

ArgMax argmax(const std::vector<double>& v) {
  ArgMax r;
  for (int i = 0; i < static_cast<int>(v.size()); ++i) {
    if (v[i] > r.best) {
      r.second = r.best;
      r.best = v[i];
      r.index = i;
    } else if (v[i] > r.second) {
      r.second = v[i];
    }
  }
  return r;
}

std::vector<double> u2_row_for_a1(const StageGame& g, int a1) {
  std::vector<double> row(g.n2());
  for (int j = 0; j < g.n2(); ++j) row[j] = g.u2[a1][j];
  return row;
}

std::vector<double> u1_col_for_a2(const StageGame& g, int a2) {
  std::vector<double> col(g.n1());
  for (int i = 0; i < g.n1(); ++i) col[i] = g.u1[i][a2];
  return col;
}

}  // namespace

StageGame StageGame::make(std::vector<std::string> a1_labels,
                          std::vector<std::string> a2_labels,
                          std::vector<std::vector<double>> u1,
                          std::vector<std::vector<double>> u2, int a1_star,
                          double erase_cost) {
  const int n1 = static_cast<int>(u1.size());
  if (n1 < 2 || static_cast<int>(u2.size()) != n1)
    throw std::invalid_argument("need at least 2 row actions and equal-shape payoff matrices");
  const int n2 = static_cast<int>(u1.front().size());
  if (n2 < 2) throw std::invalid_argument("need at least 2 column actions");
  for (const auto& r : u1)
    if (static_cast<int>(r.size()) != n2)
      throw std::invalid_argument("ragged payoff matrix");
  for (const auto& r : u2)
    if (static_cast<int>(r.size()) != n2)
      throw std::invalid_argument("ragged payoff matrix");
  if (static_cast<int>(a1_labels.size()) != n1 ||
      static_cast<int>(a2_labels.size()) != n2)
    throw std::invalid_argument("label count does not match matrix shape");
  if (a1_star <= 0 || a1_star >= n1)
    throw std::invalid_argument("commitment action must be a non-lowest row index");
  if (erase_cost < 0.0)
    throw std::invalid_argument("erase cost must be nonnegative");
  for (const auto& r : u1)
    for (double v : r)
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite payoff");
  for (const auto& r : u2)
    for (double v : r)
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite payoff");

  StageGame g;
  g.a1_labels = std::move(a1_labels);
  g.a2_labels = std::move(a2_labels);
  g.u1 = std::move(u1);
  g.u2 = std::move(u2);
  g.a1_star = a1_star;
  g.erase_cost = erase_cost;

  const double shift = g.u1[0][g.best_reply_2(0)];
  if (shift != 0.0) {
    for (auto& r : g.u1)
      for (double& v : r) v -= shift;
  }
  g.normalization_shift = shift;
  return g;
}

StageGame StageGame::product_choice(double b, double x, double erase_cost) {
  return make({"L", "H"}, {"N", "T"},
              {{0.0, 1.0 + b}, {-b, 1.0}},
              {{0.0, -x}, {x, 1.0}}, 1, erase_cost);
}

int StageGame::best_reply_2(int a1) const {
  return argmax(u2_row_for_a1(*this, a1)).index;
}

int StageGame::best_reply_1(int a2) const {
  return argmax(u1_col_for_a2(*this, a2)).index;
}

namespace {

// Interval of mixture weights (on the higher-indexed row of the pair) where
// column a2 attains the best-reply maximum. Empty when hi < lo.
struct WeightInterval {
  double lo = 0.0;
  double hi = 1.0;
  bool empty = false;
};

WeightInterval best_reply_interval(const StageGame& g, int row_lo, int row_hi,
                                   int a2) {
  WeightInterval w;
  const double i0 = g.u2[row_lo][a2];
  const double s0 = g.u2[row_hi][a2] - g.u2[row_lo][a2];
  for (int b = 0; b < g.n2(); ++b) {
    if (b == a2) continue;
    // Constraint: i0 + w*s0 >= i_b + w*s_b.
    const double alpha = i0 - g.u2[row_lo][b];
    const double beta = s0 - (g.u2[row_hi][b] - g.u2[row_lo][b]);
    if (std::abs(beta) <= 1e-15) {
      if (alpha < -1e-15) {
        w.empty = true;
        return w;
      }
      continue;
    }
    const double bound = -alpha / beta;
    if (beta > 0.0)
      w.lo = std::max(w.lo, bound);
    else
      w.hi = std::min(w.hi, bound);
  }
  if (w.lo > w.hi + 1e-15) w.empty = true;
  return w;
}

}  // namespace

ValidationReport validate_assumptions(const StageGame& g) {
  ValidationReport rep;
  auto fatal = [&](const std::string& s) { rep.issues.push_back({s, true}); };
  auto warn = [&](const std::string& s) { rep.issues.push_back({s, false}); };

  // Unique pure best replies in both directions.
  for (int i = 0; i < g.n1(); ++i) {
    const auto m = argmax(u2_row_for_a1(g, i));
    if (m.best - m.second <= kPayoffTol)
      fatal("player 2 best reply not unique against row action " +
            g.a1_labels[i]);
  }
  for (int j = 0; j < g.n2(); ++j) {
    const auto m = argmax(u1_col_for_a2(g, j));
    if (m.best - m.second <= kPayoffTol)
      fatal("player 1 best reply not unique against column action " +
            g.a2_labels[j]);
  }

  // No column may best-reply only to a knife-edge mixture of two rows. The
  // pair (lowest, commitment) is the one the chain is built on, so a
  // knife-edge there is fatal; other pairs are flagged as warnings.
  for (int lo = 0; lo < g.n1(); ++lo) {
    for (int hi = lo + 1; hi < g.n1(); ++hi) {
      for (int j = 0; j < g.n2(); ++j) {
        const auto w = best_reply_interval(g, lo, hi, j);
        if (w.empty) continue;
        if (w.hi - w.lo <= kPayoffTol) {
          std::ostringstream os;
          os << "column action " << g.a2_labels[j]
             << " best replies only to a knife-edge mixture of "
             << g.a1_labels[lo] << " and " << g.a1_labels[hi];
          const bool critical_pair = (lo == 0 && hi == g.a1_star);
          if (critical_pair)
            fatal(os.str());
          else
            warn(os.str());
        }
      }
    }
  }

  // Monotonicity of the long-run player's payoff.
  for (int j = 0; j < g.n2(); ++j)
    for (int i = 0; i + 1 < g.n1(); ++i)
      if (g.u1[i + 1][j] >= g.u1[i][j] - kPayoffTol)
        fatal("u1 not strictly decreasing in the row action at column " +
              g.a2_labels[j]);
  for (int i = 0; i < g.n1(); ++i)
    for (int j = 0; j + 1 < g.n2(); ++j)
      if (g.u1[i][j + 1] <= g.u1[i][j] + kPayoffTol)
        fatal("u1 not strictly increasing in the column action at row " +
              g.a1_labels[i]);

  // Strictly increasing differences of the short-run player's payoff
  // (adjacent pairs suffice by telescoping).
  for (int i = 0; i + 1 < g.n1(); ++i)
    for (int j = 0; j + 1 < g.n2(); ++j) {
      const double d_hi = g.u2[i + 1][j + 1] - g.u2[i + 1][j];
      const double d_lo = g.u2[i][j + 1] - g.u2[i][j];
      if (d_hi <= d_lo + kPayoffTol)
        fatal("u2 does not have strictly increasing differences at rows " +
              g.a1_labels[i] + "," + g.a1_labels[i + 1] + " columns " +
              g.a2_labels[j] + "," + g.a2_labels[j + 1]);
    }

  // Commitment must be strictly valuable relative to the normalized minmax.
  if (rep.ok()) {
    const double commit = g.u1[g.a1_star][g.a2_star()];
    if (commit <= kPayoffTol)
      fatal("commitment payoff is not strictly above the minmax value");
  }

  // Erase cost must sit strictly inside (0, c_bar).
  if (g.erase_cost <= 0.0) fatal("erase cost must be strictly positive");
  if (rep.ok()) {
    try {
      const CostBound cb = erasure_cost_bound(g);
      if (g.erase_cost >= cb.c_bar - kPayoffTol)
        fatal("erase cost is not below the high-action cost threshold");
    } catch (const NoSuchAction&) {
      fatal("the bottom column best replies to every row action");
    }
  }

  if (g.normalization_shift != 0.0) {
    std::ostringstream os;
    os << "payoffs normalized: subtracted " << g.normalization_shift
       << " from every u1 entry";
    rep.notes.push_back(os.str());
  }
  return rep;
}

BestReplyChain build_best_reply_chain(const StageGame& g) {
  BestReplyChain chain;
  const int bottom = g.a2_bottom();
  const int top = g.a2_star();

  // Upper envelope of the per-column payoff lines in the mixing weight on
  // the commitment action.
  auto intercept = [&](int j) { return g.u2[0][j]; };
  auto slope = [&](int j) { return g.u2[g.a1_star][j] - g.u2[0][j]; };

  int cur = bottom;
  double lambda_cur = 0.0;
  chain.pure_actions.push_back(cur);

  while (cur != top) {
    int next = -1;
    double lambda_next = 2.0;
    for (int j = 0; j < g.n2(); ++j) {
      if (j == cur) continue;
      const double ds = slope(j) - slope(cur);
      if (ds <= 1e-15) continue;  // can never overtake
      const double lx = (intercept(cur) - intercept(j)) / ds;
      if (lx <= lambda_cur + 1e-15 || lx > 1.0 + 1e-12) continue;
      if (lx < lambda_next - 1e-12) {
        lambda_next = lx;
        next = j;
      } else if (lx < lambda_next + 1e-12 && next >= 0 &&
                 slope(j) > slope(next)) {
        // A multi-line meeting point: continue with the steepest line.
        next = j;
      }
    }
    if (next < 0)
      throw NonAdjacentIndifference(
          "best-reply sweep never reached the commitment best reply");
    if (next <= cur)
      throw NonAdjacentIndifference(
          "best-reply sweep moved down the column order at weight " +
          std::to_string(lambda_next));
    chain.pure_actions.push_back(next);
    chain.thresholds.push_back(lambda_next);
    cur = next;
    lambda_cur = lambda_next;
  }
  return chain;
}

ChainPoint BestReplyChain::canonical(int segment, double weight) const {
  if (weight < 0.0) {
    if (weight < -1e-12) throw std::domain_error("negative chain weight");
    weight = 0.0;
  }
  if (weight > 1.0) {
    if (weight > 1.0 + 1e-12) throw std::domain_error("chain weight above 1");
    weight = 1.0;
  }
  if (weight >= 1.0 - 1e-12) {
    ++segment;
    weight = 0.0;
  }
  if (segment < 0 || segment >= pure_count())
    throw std::domain_error("chain segment out of range");
  if (segment == pure_count() - 1 && weight != 0.0)
    throw std::domain_error("weight beyond the chain top");
  return {segment, weight};
}

bool BestReplyChain::is_pure(const ChainPoint& p, double tol) const {
  return p.weight <= tol || p.weight >= 1.0 - tol;
}

double BestReplyChain::pinned_x(const ChainPoint& p) const {
  if (!is_pure(p)) return thresholds[p.segment];
  int idx = p.segment + (p.weight >= 0.5 ? 1 : 0);
  const auto iv = x_interval_of_pure(idx);
  return 0.5 * (iv.first + iv.second);
}

std::pair<double, double> BestReplyChain::x_interval_of_pure(
    int pure_idx) const {
  const double lo = pure_idx == 0 ? 0.0 : thresholds[pure_idx - 1];
  const double hi =
      pure_idx == pure_count() - 1 ? 1.0 : thresholds[pure_idx];
  return {lo, hi};
}

double u1_on_chain(const StageGame& g, const BestReplyChain& chain, int a1,
                   const ChainPoint& p) {
  const int lo = chain.pure_actions[p.segment];
  if (p.weight == 0.0) return g.u1[a1][lo];
  const int hi = chain.pure_actions[p.segment + 1];
  return (1.0 - p.weight) * g.u1[a1][lo] + p.weight * g.u1[a1][hi];
}

ChainPoint chain_point_at_value(const StageGame& g,
                                const BestReplyChain& chain, int a1,
                                double v) {
  const double v_bottom = g.u1[a1][chain.pure_actions.front()];
  const double v_top = g.u1[a1][chain.pure_actions.back()];
  if (v < v_bottom - kPayoffTol || v > v_top + kPayoffTol)
    throw std::domain_error("value not attainable on the chain");
  for (int s = 0; s < chain.segment_count(); ++s) {
    const double lo = g.u1[a1][chain.pure_actions[s]];
    const double hi = g.u1[a1][chain.pure_actions[s + 1]];
    if (v <= hi + kPayoffTol) {
      const double w = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
      return chain.canonical(s, w);
    }
  }
  return chain.top();
}

std::vector<int> u2_posterior_best_reply(const StageGame& g, double x,
                                         double tol) {
  std::vector<double> val(g.n2());
  for (int j = 0; j < g.n2(); ++j)
    val[j] = (1.0 - x) * g.u2[0][j] + x * g.u2[g.a1_star][j];
  const double best = *std::max_element(val.begin(), val.end());
  std::vector<int> out;
  for (int j = 0; j < g.n2(); ++j)
    if (val[j] >= best - tol) out.push_back(j);
  return out;
}

CostBound erasure_cost_bound(const StageGame& g) {
  const int bottom = g.a2_bottom();
  int a1p = -1;
  for (int i = 1; i < g.n1(); ++i) {
    if (g.best_reply_2(i) != bottom) {
      a1p = i;
      break;
    }
  }
  if (a1p < 0)
    throw NoSuchAction(
        "every row action keeps the bottom column a best reply");
  CostBound cb;
  cb.witness_a1 = a1p;
  cb.c_bar = std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.n2(); ++j)
    cb.c_bar = std::min(cb.c_bar, g.u1[0][j] - g.u1[a1p][j]);
  return cb;
}

double incentive_gap(const StageGame& g, const BestReplyChain& chain) {
  double gap = std::numeric_limits<double>::infinity();
  for (int j : chain.pure_actions)
    gap = std::min(gap, g.u1[0][j] - g.u1[g.a1_star][j] - g.erase_cost);
  if (gap <= kPayoffTol)
    throw NonPositiveGap("per-period gain from the low action is not strictly positive");
  return gap;
}

}  // namespace repgame
