#include "repgame/verify.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

// Everything here re-derives the equilibrium conditions from raw payoff
// arithmetic. The only shared code is the stage-game layer (payoff evaluation
// and chain geometry); nothing is taken from the solver or belief modules, so
// agreement between the two routes is meaningful evidence.

namespace repgame {

namespace {

double u2_mixed(const StageGame& g, int a2, double x) {
  return (1.0 - x) * g.u2[0][a2] + x * g.u2[g.a1_star][a2];
}

double u2_best(const StageGame& g, double x) {
  double best = u2_mixed(g, 0, x);
  for (int j = 1; j < g.n2(); ++j) best = std::max(best, u2_mixed(g, j, x));
  return best;
}

std::vector<int> support_of(const BestReplyChain& chain, const ChainPoint& b) {
  if (b.weight <= 1e-9) return {chain.pure_actions[b.segment]};
  if (b.weight >= 1.0 - 1e-9) return {chain.pure_actions[b.segment + 1]};
  return {chain.pure_actions[b.segment], chain.pure_actions[b.segment + 1]};
}

struct RowSink {
  std::vector<ConstraintRow>& rows;
  double tol;

  void equality(int k, std::string id, std::string detail, double lhs,
                double rhs) {
    const double slack = -std::abs(lhs - rhs);
    rows.push_back(
        {k, std::move(id), std::move(detail), lhs, rhs, slack, slack >= -tol});
  }
  void at_least(int k, std::string id, std::string detail, double lhs,
                double rhs) {
    const double slack = lhs - rhs;
    rows.push_back(
        {k, std::move(id), std::move(detail), lhs, rhs, slack, slack >= -tol});
  }
};

}  // namespace

ConstraintReport verify_equilibrium(const StageGame& g,
                                    const BestReplyChain& chain,
                                    const Discounting& disc, double pi,
                                    const EquilibriumProfile& profile,
                                    const BeliefPath& path, double tol) {
  ConstraintReport rep;
  rep.tol = tol;
  RowSink sink{rep.rows, tol};

  const int t = profile.t;
  const double delta = disc.delta();
  const double db = disc.delta_bar;
  const double c = g.erase_cost;

  const bool shape_ok =
      t >= 0 && static_cast<int>(profile.beta.size()) == t + 1 &&
      static_cast<int>(profile.value.size()) == t + 1 &&
      static_cast<int>(profile.regime.size()) == t + 1 &&
      static_cast<int>(path.p_star.size()) == t &&
      static_cast<int>(path.mu_star.size()) == t &&
      static_cast<int>(path.x.size()) == t &&
      static_cast<int>(path.reputation.size()) == t + 1;
  if (!shape_ok) {
    rep.rows.push_back({-1, "boundary", "shape", 0.0, 0.0, -1.0, false});
    return rep;
  }

  // Long-run player: value identities and one-shot deviations.
  for (int k = 0; k <= t; ++k) {
    const ChainPoint& b = profile.beta[k];
    const double vk = profile.value[k];
    const double v_next = profile.value[std::min(k + 1, t)];
    const double u_low = u1_on_chain(g, chain, 0, b);
    const double u_com = u1_on_chain(g, chain, g.a1_star, b);
    const double pk = path.p_at(k);

    // Mixing at k forces indifference, but a pooling probability within
    // tolerance of zero is a numerical landing, not genuine mixing.
    const double commit_branch = (1.0 - delta) * u_com + delta * v_next;
    if (pk > tol)
      sink.equality(k, "P1-optimality", "step", vk, commit_branch);
    else
      sink.at_least(k, "P1-optimality", "step", vk, commit_branch);

    sink.equality(k, "P1-optimality", "value", vk,
                  std::max(u_low - c, (1.0 - delta) * u_low));

    // Position of the point implied by the stored value and regime.
    {
      double u_implied;
      switch (profile.regime[k]) {
        case EraseRegime::keep:
          u_implied = vk / (1.0 - delta);
          break;
        case EraseRegime::erase:
          u_implied = vk + c;
          break;
        default:
          u_implied = c / delta;
          break;
      }
      bool anchored_ok = true;
      double implied_pos = 0.0;
      try {
        implied_pos = chain_point_at_value(g, chain, 0, u_implied).position();
      } catch (const std::domain_error&) {
        anchored_ok = false;
      }
      if (anchored_ok)
        sink.equality(k, "P1-optimality", "anchor", b.position(), implied_pos);
      else
        rep.rows.push_back({k, "P1-optimality", "anchor", b.position(),
                            u_implied, -1.0, false});
    }

    // Enumerated one-shot deviations, each against the profile value.
    sink.at_least(k, "P1-optimality", "dev:" + g.a1_labels[g.a1_star] + ":keep",
                  vk, commit_branch);
    sink.at_least(k, "P1-optimality",
                  "dev:" + g.a1_labels[g.a1_star] + ":erase", vk,
                  (1.0 - delta) * (u_com - c) + delta * vk);
    sink.at_least(k, "P1-optimality", "dev:" + g.a1_labels[0] + ":keep", vk,
                  (1.0 - delta) * u_low);
    sink.at_least(k, "P1-optimality", "dev:" + g.a1_labels[0] + ":erase", vk,
                  (1.0 - delta) * (u_low - c) + delta * vk);
    for (int a1 = 1; a1 < g.n1(); ++a1) {
      if (a1 == g.a1_star) continue;
      const double u_dev = u1_on_chain(g, chain, a1, b);
      const double dev = std::max((1.0 - delta) * u_dev,
                                  (1.0 - delta) * (u_dev - c) + delta * vk);
      sink.at_least(k, "P1-optimality", "dev:" + g.a1_labels[a1], vk, dev);
    }

    if (profile.regime[k] == EraseRegime::indifferent)
      sink.equality(k, "P1-optimality", "erase-tie",
                    (1.0 - delta) * (u_low - c) + delta * vk,
                    (1.0 - delta) * u_low);
  }

  // Short-run player: every supported action best-replies to the posterior.
  for (int k = 0; k < t; ++k) {
    const double xk = path.x[k];
    const double best = u2_best(g, xk);
    for (int a2 : support_of(chain, profile.beta[k]))
      sink.at_least(k, "P2-best-reply", "support:" + g.a2_labels[a2],
                    u2_mixed(g, a2, xk), best);
  }

  // Bayes consistency of the posterior, reputation, and stationary mass.
  for (int k = 0; k < t; ++k) {
    const double honest = pi * (1.0 - db) * std::pow(db, k);
    const double opp = (1.0 - pi) * path.mu_star[k];
    const double pk = path.p_star[k];
    const double total = honest + opp;
    if (total > 0.0) {
      sink.equality(k, "Bayes", "posterior", path.x[k],
                    (honest + opp * pk) / total);
      sink.equality(k, "Bayes", "reputation", path.reputation[k],
                    honest / total);
    } else {
      rep.rows.push_back({k, "Bayes", "posterior", path.x[k], 0.0, -1.0, false});
    }
    const double ek = profile.erase_prob_at(k);
    const double inflow =
        k == 0 ? 1.0 - db : db * path.mu_star[k - 1] * path.p_star[k - 1];
    const double expected =
        inflow + db * path.mu_star[k] * (1.0 - pk) * ek;
    sink.equality(k, "Bayes", "stationarity", path.mu_star[k], expected);
  }

  // Boundary conditions at the end of the chain phase.
  if (t >= 1)
    sink.at_least(t - 1, "boundary", "p-terminal", 0.0, path.p_star[t - 1]);
  {
    const double x_term = pi > 0.0 ? 1.0 : 0.0;
    const double best = u2_best(g, x_term);
    for (int a2 : support_of(chain, profile.beta[t]))
      sink.at_least(t, "boundary", "terminal-belief", u2_mixed(g, a2, x_term),
                    best);
    sink.equality(t, "boundary", "reputation-terminal", path.reputation[t],
                  x_term);
  }

  // Per-length mass bound: retained commitment mass cannot beat the inflow.
  for (int k = 0; k < t; ++k)
    sink.at_least(k, "mass", "inflow-cap", 1.0 - db,
                  path.mu_star[k] * path.p_star[k]);

  std::sort(rep.rows.begin(), rep.rows.end(),
            [](const ConstraintRow& a, const ConstraintRow& b) {
              return std::tie(a.k, a.id, a.detail) <
                     std::tie(b.k, b.id, b.detail);
            });
  return rep;
}

// ---------------------------------------------------------------------------
// Grid search. All expansion steps below use direct comparisons and bisection
// rather than closed forms.

namespace {

struct NaiveCtx {
  const StageGame& g;
  const BestReplyChain& chain;
  double delta;
  double db;
  double l;
  double c;
  double v_top;
  double u_top;
  double top_pos;
  double lambda_top;
};

ChainPoint point_at(const NaiveCtx& cx, double pos) {
  pos = std::clamp(pos, 0.0, cx.top_pos);
  int seg = std::min(static_cast<int>(pos), cx.chain.pure_count() - 1);
  return cx.chain.canonical(seg, pos - seg);
}

double naive_value_at(const NaiveCtx& cx, double pos) {
  const double u = u1_on_chain(cx.g, cx.chain, 0, point_at(cx, pos));
  return std::max(u - cx.c, (1.0 - cx.delta) * u);
}

// Position whose stationary value equals v, by bisection.
double invert_position(const NaiveCtx& cx, double v) {
  double lo = 0.0, hi = cx.top_pos;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (naive_value_at(cx, mid) < v)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct NaivePath {
  std::vector<ChainPoint> beta;
  std::vector<double> value;
  std::vector<bool> keeps;  // keep branch strictly better at this point
  std::vector<bool> ties;   // branches tie within tolerance
  int t = 0;
};

NaivePath expand_naive(const NaiveCtx& cx, const ChainPoint& beta0,
                       int step_cap) {
  NaivePath np;
  ChainPoint b = beta0;
  auto classify = [&](const ChainPoint& p, double& v) {
    const double u = u1_on_chain(cx.g, cx.chain, 0, p);
    const double erase_v = u - cx.c;
    const double keep_v = (1.0 - cx.delta) * u;
    v = std::max(erase_v, keep_v);
    np.beta.push_back(p);
    np.value.push_back(v);
    np.ties.push_back(std::abs(erase_v - keep_v) <= kPayoffTol);
    np.keeps.push_back(keep_v > erase_v + kPayoffTol);
  };
  double v;
  classify(b, v);
  for (int k = 0; k < step_cap; ++k) {
    const double u_com = u1_on_chain(cx.g, cx.chain, cx.g.a1_star, b);
    const double v_req = (v - (1.0 - cx.delta) * u_com) / cx.delta;
    if (v_req > cx.v_top + kPayoffTol) {
      np.beta.push_back(cx.chain.top());
      np.value.push_back(cx.v_top);
      np.ties.push_back(false);
      np.keeps.push_back(false);
      np.t = static_cast<int>(np.beta.size()) - 1;
      return np;
    }
    b = point_at(cx, invert_position(cx, v_req));
    classify(b, v);
  }
  np.t = -1;  // never capped within the step budget
  return np;
}

// One balance step of the likelihood equation, solved for p by bisection on
// [-1, x). The equation is decreasing in p; a root below -1 reports -1.
double balance_step(const NaiveCtx& cx, double inflow, double e, double x,
                    double ck, bool& ok) {
  auto f = [&](double p) {
    const double denom = 1.0 - cx.db * (1.0 - p) * e;
    if (denom <= 0.0) return 1e9;  // stay term explodes; far-left region
    const double mu = inflow / denom;
    return mu * (x - p) / (1.0 - x) - ck;
  };
  if (f(-1.0) <= 0.0) {
    ok = false;
    return -1.0;
  }
  double lo = -1.0, hi = x;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  ok = true;
  return 0.5 * (lo + hi);
}

struct BeliefOutcome {
  double terminal_p = 1.0;  // signed residual at the final record
  double penalty = 0.0;     // sentinel for interior failures
  std::vector<double> mu;
  std::vector<double> p;
  bool broke = false;
};

// Forward pass over pinned posteriors x[0..n-1] with per-record erase flags,
// p0 either supplied (knob >= 0) or solved from the record-0 balance.
BeliefOutcome naive_forward(const NaiveCtx& cx, const std::vector<double>& x,
                            const std::vector<double>& e, double p0_knob) {
  BeliefOutcome out;
  const int n = static_cast<int>(x.size());
  for (int k = 0; k < n; ++k) {
    const double ck = cx.l * (1.0 - cx.db) * std::pow(cx.db, k);
    const double inflow =
        k == 0 ? 1.0 - cx.db : cx.db * out.p[k - 1] * out.mu[k - 1];
    double pk;
    if (k == 0 && p0_knob >= 0.0) {
      pk = p0_knob;
    } else {
      bool ok = true;
      pk = balance_step(cx, inflow, e[k], x[k], ck, ok);
      if (!ok) {
        out.broke = true;
        out.penalty += 1.0;
        out.terminal_p = -1.0;
        return out;
      }
    }
    const double denom = 1.0 - cx.db * (1.0 - pk) * e[k];
    if (denom <= 0.0 || x[k] - pk <= 0.0) {
      out.broke = true;
      out.penalty += 1.0;
      out.terminal_p = pk <= 0.0 ? -1.0 : 1.0;
      return out;
    }
    // Record the mass that matches the likelihood equation at this record.
    const double mu =
        (k == 0 && p0_knob >= 0.0) ? ck * (1.0 - x[k]) / (x[k] - pk)
                                   : inflow / denom;
    out.p.push_back(pk);
    out.mu.push_back(mu);
    if (pk <= 0.0 && k < n - 1) {
      out.broke = true;
      out.penalty += 1.0;
      out.terminal_p = -1.0;
      return out;
    }
  }
  out.terminal_p = out.p.back();
  return out;
}

std::vector<double> pinned_list(const NaiveCtx& cx,
                                const std::vector<ChainPoint>& beta, int n) {
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) x[k] = cx.chain.pinned_x(beta[k]);
  return x;
}

std::vector<double> erase_list(const NaivePath& np, int n) {
  std::vector<double> e(n, 1.0);
  for (int k = 0; k < n; ++k) e[k] = np.keeps[k] ? 0.0 : 1.0;
  return e;
}

// Residual of the soft landing: terminal record probability driven to zero,
// minimized over the start knob where the structure has one.
double soft_residual(const NaiveCtx& cx, const NaivePath& np,
                     const ChainPoint& beta0) {
  if (np.t < 1) return 1e9;
  const int t = np.t;
  std::vector<double> x = pinned_list(cx, np.beta, t);
  std::vector<double> e = erase_list(np, t);

  auto signed_terminal = [&](double x0, double p0_knob) -> double {
    x[0] = x0;
    const BeliefOutcome bo = naive_forward(cx, x, e, p0_knob);
    if (bo.broke || static_cast<int>(bo.p.size()) != t)
      return bo.terminal_p > 0.0 ? 1.0 : -1.0;
    return bo.terminal_p;
  };

  if (np.ties[0]) {
    // Indifferent start: the record-0 erase mix frees p0 between the pure
    // keep and pure erase balance roots.
    const double x0 = x[0];
    bool ok_keep = true, ok_erase = true;
    const double ck0 = cx.l * (1.0 - cx.db);
    double p_keep = balance_step(cx, 1.0 - cx.db, 0.0, x0, ck0, ok_keep);
    double p_erase = balance_step(cx, 1.0 - cx.db, 1.0, x0, ck0, ok_erase);
    if (!ok_erase) return 1e9;
    p_keep = std::max(0.0, ok_keep ? p_keep : 0.0);
    if (p_erase < p_keep) return 1e9;
    double rlo = signed_terminal(x0, p_keep);
    double rhi = signed_terminal(x0, p_erase);
    if (rlo > 0.0) return std::abs(rlo);
    if (rhi < 0.0) return std::abs(rhi);
    double lo = p_keep, hi = p_erase;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (signed_terminal(x0, mid) > 0.0)
        hi = mid;
      else
        lo = mid;
    }
    return std::abs(signed_terminal(x0, 0.5 * (lo + hi)));
  }

  if (cx.chain.is_pure(beta0)) {
    // Pure start: the admissible-posterior interval at record 0 is the knob.
    const int idx = beta0.segment + (beta0.weight >= 0.5 ? 1 : 0);
    const auto iv = cx.chain.x_interval_of_pure(idx);
    double rlo = signed_terminal(iv.first, -1.0);
    double rhi = signed_terminal(iv.second, -1.0);
    if (rlo > 0.0) return std::abs(rlo);
    if (rhi < 0.0) return std::abs(rhi);
    double lo = iv.first, hi = iv.second;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (signed_terminal(mid, -1.0) > 0.0)
        hi = mid;
      else
        lo = mid;
    }
    return std::abs(signed_terminal(0.5 * (lo + hi), -1.0));
  }

  return std::abs(signed_terminal(x[0], -1.0));
}

// Residual of an exact hit: the value path must land on the chain top at its
// last interior step, with the one-past-the-end balance solution nonpositive
// at the top threshold.
double exact_residual(const NaiveCtx& cx, const NaivePath& np) {
  if (np.t < 1) return 1e9;
  const int bigT = np.t - 1;
  double res = std::abs(cx.v_top - np.value[bigT]);  // landing shortfall

  std::vector<double> x = pinned_list(cx, np.beta, bigT);
  std::vector<double> e = erase_list(np, bigT);
  for (int k = 0; k < bigT; ++k)
    if (np.keeps[k]) return 1e9;  // keeping before the boundary breaks it
  x.push_back(cx.lambda_top);
  e.push_back(1.0);
  const BeliefOutcome bo = naive_forward(cx, x, e, -1.0);
  if (bo.broke || static_cast<int>(bo.p.size()) != bigT + 1)
    return res + 1.0 + bo.penalty;
  for (int k = 0; k < bigT; ++k)
    if (bo.p[k] <= 1e-12) return res + 1.0;
  return res + std::max(0.0, bo.terminal_p);
}

}  // namespace

BruteForceResult brute_force_profiles(const StageGame& g,
                                      const BestReplyChain& chain,
                                      const Discounting& disc, double pi,
                                      int grid_resolution, double tol) {
  NaiveCtx cx{g,
              chain,
              disc.delta(),
              disc.delta_bar,
              pi / (1.0 - pi),
              g.erase_cost,
              0.0,
              u1_on_chain(g, chain, 0, chain.top()),
              static_cast<double>(chain.pure_count() - 1),
              chain.top_threshold()};
  cx.v_top = std::max(cx.u_top - cx.c, (1.0 - cx.delta) * cx.u_top);

  BruteForceResult out;
  out.cell_width = cx.top_pos / grid_resolution;

  // Candidate start positions: the uniform grid, every pure vertex, the
  // erase-indifference point, and every exact-hit root.
  std::vector<double> candidates;
  for (int j = 0; j <= grid_resolution; ++j)
    candidates.push_back(j * out.cell_width);
  for (int i = 0; i < chain.pure_count(); ++i)
    candidates.push_back(static_cast<double>(i));
  const double tie_u = cx.c / cx.delta;
  if (tie_u <= cx.u_top + kPayoffTol) {
    // Position of the erase-indifference point, by bisection on the payoff.
    double lo = 0.0, hi = cx.top_pos;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (u1_on_chain(g, chain, 0, point_at(cx, mid)) < tie_u)
        lo = mid;
      else
        hi = mid;
    }
    candidates.push_back(0.5 * (lo + hi));
  }

  const int step_cap =
      static_cast<int>(std::ceil(10.0 * cx.u_top /
                                 ((1.0 - cx.delta) * incentive_gap(g, chain)))) +
      10;

  // Exact-hit roots: for each horizon, bisect the start so the value path
  // meets the top exactly there.
  {
    auto value_after = [&](double pos0, int steps) -> double {
      ChainPoint b = point_at(cx, pos0);
      double v = naive_value_at(cx, pos0);
      for (int k = 0; k < steps; ++k) {
        const double u_com = u1_on_chain(g, chain, g.a1_star, b);
        const double v_req = (v - (1.0 - cx.delta) * u_com) / cx.delta;
        if (k + 1 == steps) return v_req;
        if (v_req > cx.v_top + kPayoffTol) return 1e9;
        const double pos = invert_position(cx, v_req);
        b = point_at(cx, pos);
        v = v_req;
      }
      return v;
    };
    double low_pos = 0.0;
    if (tie_u <= cx.u_top + kPayoffTol) low_pos = invert_position(cx, std::max(tie_u - cx.c, (1.0 - cx.delta) * tie_u));
    const NaivePath base = expand_naive(cx, point_at(cx, low_pos), step_cap);
    for (int T = base.t - 1; T >= 1; --T) {
      if (value_after(low_pos, T) - cx.v_top > 0.0) continue;
      if (value_after(cx.top_pos, T) - cx.v_top < 0.0) continue;
      double lo = low_pos, hi = cx.top_pos;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (value_after(mid, T) - cx.v_top > 0.0)
          hi = mid;
        else
          lo = mid;
      }
      candidates.push_back(0.5 * (lo + hi));
    }
  }

  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end(),
                               [](double a, double b) {
                                 return std::abs(a - b) < 1e-12;
                               }),
                   candidates.end());

  std::vector<BruteForcePoint> passing;
  for (double pos : candidates) {
    const ChainPoint b0 = point_at(cx, pos);
    const NaivePath np = expand_naive(cx, b0, step_cap);
    if (np.t < 0) continue;
    const double res =
        std::min(soft_residual(cx, np, b0), exact_residual(cx, np));
    if (res < 10.0 * tol)
      passing.push_back({b0, res, np.value[0], np.t});
  }

  // Cluster passing candidates by grid adjacency.
  for (const BruteForcePoint& pt : passing) {
    const double pos = pt.beta0.position();
    if (!out.clusters.empty() &&
        pos - out.clusters.back().hi_position <= 1.5 * out.cell_width) {
      out.clusters.back().points.push_back(pt);
      out.clusters.back().hi_position = pos;
    } else {
      out.clusters.push_back({{pt}, pos, pos});
    }
  }
  return out;
}

}  // namespace repgame
