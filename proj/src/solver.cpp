#include "repgame/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace repgame {

namespace {

constexpr int kBisectIters = 200;
constexpr double kLargeValue = 1e6;

// Inverse of the stationary value function on the chain; the branch is chosen
// by comparing against the indifference value (1 - delta) c / delta.
ChainPoint invert_value(const StageGame& g, const BestReplyChain& chain,
                        const Discounting& disc, double v) {
  const double delta = disc.delta();
  const double c = g.erase_cost;
  const double v_tie = (1.0 - delta) * c / delta;
  double u_target;
  if (v < v_tie - kPayoffTol)
    u_target = v / (1.0 - delta);
  else if (v > v_tie + kPayoffTol)
    u_target = v + c;
  else
    u_target = c / delta;
  return chain_point_at_value(g, chain, 0, u_target);
}

double step_value(const StageGame& g, const BestReplyChain& chain,
                  const Discounting& disc, double v, const ChainPoint& b) {
  const double delta = disc.delta();
  return (v - (1.0 - delta) * u1_on_chain(g, chain, g.a1_star, b)) / delta;
}

}  // namespace

std::optional<ChainPoint> beta_dagger(const StageGame& g,
                                      const BestReplyChain& chain,
                                      double delta) {
  if (delta <= 0.0) return std::nullopt;
  const double target = g.erase_cost / delta;
  const double u_top = u1_on_chain(g, chain, 0, chain.top());
  if (target > u_top + kPayoffTol) return std::nullopt;
  if (target >= u_top) return chain.top();
  return chain_point_at_value(g, chain, 0, target);
}

double delta_floor(const StageGame& g, const BestReplyChain& chain) {
  return g.erase_cost / u1_on_chain(g, chain, 0, chain.top());
}

double pi_star(const BestReplyChain& chain) { return chain.top_threshold(); }

PointValue value_of(const StageGame& g, const BestReplyChain& chain,
                    const ChainPoint& beta, const Discounting& disc) {
  const double delta = disc.delta();
  const double u = u1_on_chain(g, chain, 0, beta);
  const double diff = delta * u - g.erase_cost;
  PointValue pv;
  if (diff > kPayoffTol) {
    pv.value = u - g.erase_cost;
    pv.regime = EraseRegime::erase;
  } else if (diff < -kPayoffTol) {
    pv.value = (1.0 - delta) * u;
    pv.regime = EraseRegime::keep;
  } else {
    pv.value = std::max(u - g.erase_cost, (1.0 - delta) * u);
    pv.regime = EraseRegime::indifferent;
  }
  return pv;
}

ValuePath forward_beta_recursion(const StageGame& g,
                                 const BestReplyChain& chain,
                                 const ChainPoint& beta0,
                                 const Discounting& disc) {
  ValuePath vp;
  const PointValue pv0 = value_of(g, chain, beta0, disc);
  vp.beta.push_back(beta0);
  vp.value.push_back(pv0.value);
  vp.regime.push_back(pv0.regime);

  const PointValue top_pv = value_of(g, chain, chain.top(), disc);
  const double v_top = top_pv.value;
  const int k_max =
      static_cast<int>(std::ceil(10.0 * t_upper_bound(g, chain, disc))) + 10;

  for (int k = 0;; ++k) {
    if (k > k_max)
      throw NoTermination("value recursion exceeded the step cap");
    const double v_req = step_value(g, chain, disc, vp.value.back(), vp.beta.back());
    if (v_req < vp.value.back() - kPayoffTol)
      throw NonMonotone("value recursion decreased");
    if (v_req > v_top + kPayoffTol) {
      vp.beta.push_back(chain.top());
      vp.value.push_back(v_top);
      vp.regime.push_back(top_pv.regime);
      vp.t = static_cast<int>(vp.beta.size()) - 1;
      return vp;
    }
    const ChainPoint next = invert_value(g, chain, disc, v_req);
    vp.beta.push_back(next);
    vp.value.push_back(v_req);
    vp.regime.push_back(value_of(g, chain, next, disc).regime);
  }
}

double t_upper_bound(const StageGame& g, const BestReplyChain& chain,
                     const Discounting& disc) {
  const double u_top = u1_on_chain(g, chain, 0, chain.top());
  return u_top / ((1.0 - disc.delta()) * incentive_gap(g, chain));
}

double t_lower_bound(double p0, double delta_bar) {
  return p0 / (1.0 - delta_bar);
}

double theorem1_payoff_bound(double erase_cost, double delta) {
  return (1.0 - delta) * erase_cost / delta;
}

namespace {

struct SearchCtx {
  const StageGame& g;
  const BestReplyChain& chain;
  const Discounting& disc;
  double pi;
  double l;
  double residual_tol;
};

// Residual sign convention for the terminal-belief bisection: +1 when the
// posterior arithmetic broke (p reached x), the actual terminal p when the
// pass produced all requested entries, and -1 when an interior p failed
// first.
double residual_from(const GeneralRecursion& r, std::size_t want) {
  if (r.p_exceeds_x) return 1.0;
  if (r.p_star.size() == want) return r.p_star.back();
  return -1.0;
}

std::vector<double> pinned_inputs(const BestReplyChain& chain,
                                  const std::vector<ChainPoint>& beta, int t) {
  std::vector<double> x(t);
  for (int k = 0; k < t; ++k) x[k] = chain.pinned_x(beta[k]);
  return x;
}

void finish_profile(const SearchCtx& cx, EquilibriumProfile& prof,
                    BeliefPath& path) {
  path.likelihood_ratio = cx.l;
  path.reputation.clear();
  for (int k = 0; k < prof.t; ++k)
    path.reputation.push_back(
        reputation_at(cx.pi, cx.disc.delta_bar, k, path.mu_star[k]));
  path.reputation.push_back(cx.pi > 0.0 ? 1.0 : 0.0);

  for (int k = 0; k < prof.t; ++k) {
    const ChainPoint& b = prof.beta[k];
    if (!cx.chain.is_pure(b)) continue;
    const int idx = b.segment + (b.weight >= 0.5 ? 1 : 0);
    const auto iv = cx.chain.x_interval_of_pure(idx);
    prof.multiplicity.push_back(
        {k, cx.chain.pure_actions[idx], iv.first, iv.second});
  }
  prof.notes.push_back(
      "convention: consumer actions are ordered so that the best-reply chain "
      "position is nondecreasing in the clean-record length");

  // The pooling decline is a constant-belief property. When the consumer
  // response crosses a chain vertex, the rationalizing belief jumps to the
  // next threshold and Bayes consistency forces the pooling probability up
  // with it, so flag the jump rather than leave readers to suspect a defect.
  for (std::size_t k = 1; k < path.x.size(); ++k) {
    if (path.x[k] > path.x[k - 1] + 1e-12 &&
        path.p_star[k] > path.p_star[k - 1]) {
      prof.notes.push_back(
          "pooling probability rises where the rationalizing belief crosses "
          "a chain threshold; the per-step decline applies within "
          "constant-belief runs");
      break;
    }
  }
}

int last_keep_index(const std::vector<EraseRegime>& regime) {
  int t0 = -1;
  for (int k = 0; k < static_cast<int>(regime.size()); ++k)
    if (regime[k] == EraseRegime::keep) t0 = k;
  return t0;
}

bool try_anchored(const SearchCtx& cx, SolveResult& out,
                  std::vector<std::string>& diag) {
  const double delta = cx.disc.delta();
  const double db = cx.disc.delta_bar;
  const double c = cx.g.erase_cost;
  const auto bd = beta_dagger(cx.g, cx.chain, delta);
  const double u_top = u1_on_chain(cx.g, cx.chain, 0, cx.chain.top());
  if (!bd || u_top <= c / delta + kPayoffTol) {
    diag.push_back("anchored: no interior erase-indifference point");
    return false;
  }

  const ValuePath vp = forward_beta_recursion(cx.g, cx.chain, *bd, cx.disc);
  const int t = vp.t;
  const std::vector<double> x_in = pinned_inputs(cx.chain, vp.beta, t);
  const std::vector<double> e(t, 1.0);
  const double x0 = x_in[0];

  double p_hi;
  try {
    p_hi = p0_closed_form(x0, cx.l, db);
  } catch (const NoInteriorSolution&) {
    diag.push_back(
        "anchored: stationarity at the empty record requires more than "
        "certain erasure");
    return false;
  }
  const double p_lo = std::max(0.0, x0 - cx.l * (1.0 - x0));

  auto resid = [&](double p0) {
    return residual_from(forward_general(x_in, e, cx.l, db, p0),
                         static_cast<std::size_t>(t));
  };
  if (resid(p_lo) > 0.0) {
    diag.push_back("anchored: terminal belief positive across the whole start bracket");
    return false;
  }
  if (resid(p_hi) < 0.0) {
    diag.push_back("anchored: terminal belief negative across the whole start bracket");
    return false;
  }
  double lo = p_lo, hi = p_hi;
  for (int it = 0; it < kBisectIters && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (resid(mid) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  const double p0 = 0.5 * (lo + hi);
  const GeneralRecursion rec = forward_general(x_in, e, cx.l, db, p0);
  const double res = residual_from(rec, static_cast<std::size_t>(t));
  if (static_cast<int>(rec.p_star.size()) != t ||
      std::abs(res) > cx.residual_tol) {
    diag.push_back("anchored: bisection did not close the terminal belief");
    return false;
  }

  double mix = erase_mix_from_mass(db, p0, rec.mu_star[0]);
  if (mix < -1e-9 || mix > 1.0 + 1e-9) {
    diag.push_back("anchored: erase mix left the unit interval");
    return false;
  }
  mix = std::clamp(mix, 0.0, 1.0);

  EquilibriumProfile prof;
  prof.t = t;
  prof.t0 = 0;
  prof.payoff = vp.value[0];
  prof.beta = vp.beta;
  prof.value = vp.value;
  prof.regime = vp.regime;
  prof.erase_mix = mix;
  prof.branch = SolveBranch::anchored;

  BeliefPath path;
  path.p_star = rec.p_star;
  path.mu_star = rec.mu_star;
  path.x = x_in;
  finish_profile(cx, prof, path);
  out = {std::move(prof), std::move(path)};
  return true;
}

bool try_boundary_hit(const SearchCtx& cx, SolveResult& out,
                      std::vector<std::string>& diag) {
  const double delta = cx.disc.delta();
  const double db = cx.disc.delta_bar;
  const ChainPoint top = cx.chain.top();
  const PointValue top_pv = value_of(cx.g, cx.chain, top, cx.disc);
  const double v_top = top_pv.value;
  const double u_top = u1_on_chain(cx.g, cx.chain, 0, top);
  const double lambda_top = cx.chain.top_threshold();

  const auto bd = beta_dagger(cx.g, cx.chain, delta);
  const ChainPoint beta_lo = (bd && *bd < top) ? *bd : cx.chain.bottom();
  const double u_lo = u1_on_chain(cx.g, cx.chain, 0, beta_lo);
  const ValuePath base = forward_beta_recursion(cx.g, cx.chain, beta_lo, cx.disc);

  // Required continuation value after exactly T steps from the start value
  // u0; a start that would pass the top strictly earlier returns a large
  // positive sentinel.
  auto value_after = [&](double u0, int T) -> double {
    ChainPoint b = chain_point_at_value(cx.g, cx.chain, 0, u0);
    double v = value_of(cx.g, cx.chain, b, cx.disc).value;
    for (int k = 0; k < T; ++k) {
      const double v_req = step_value(cx.g, cx.chain, cx.disc, v, b);
      if (k + 1 == T) return v_req;
      if (v_req > v_top + kPayoffTol) return kLargeValue;
      b = invert_value(cx.g, cx.chain, cx.disc, v_req);
      v = v_req;
    }
    return v;
  };

  for (int T = base.t - 1; T >= 1; --T) {
    const std::string tag = "boundary_hit: T=" + std::to_string(T);
    if (value_after(u_lo, T) - v_top > 0.0) continue;
    if (value_after(u_top, T) - v_top < 0.0) continue;
    double lo = u_lo, hi = u_top;
    for (int it = 0; it < kBisectIters && hi - lo > 1e-16 * std::max(1.0, hi);
         ++it) {
      const double mid = 0.5 * (lo + hi);
      if (value_after(mid, T) - v_top > 0.0)
        hi = mid;
      else
        lo = mid;
    }
    const double u0 = 0.5 * (lo + hi);
    if (std::abs(value_after(u0, T) - v_top) > cx.residual_tol) {
      diag.push_back(tag + ": cap gap did not close");
      continue;
    }

    // Rebuild the path from the located start.
    std::vector<ChainPoint> betas{chain_point_at_value(cx.g, cx.chain, 0, u0)};
    std::vector<double> vals{value_of(cx.g, cx.chain, betas[0], cx.disc).value};
    std::vector<EraseRegime> regs{value_of(cx.g, cx.chain, betas[0], cx.disc).regime};
    bool keep_seen = regs[0] == EraseRegime::keep;
    for (int k = 1; k < T; ++k) {
      const double v_req =
          step_value(cx.g, cx.chain, cx.disc, vals.back(), betas.back());
      betas.push_back(invert_value(cx.g, cx.chain, cx.disc, v_req));
      vals.push_back(v_req);
      regs.push_back(value_of(cx.g, cx.chain, betas.back(), cx.disc).regime);
      keep_seen = keep_seen || regs.back() == EraseRegime::keep;
    }
    if (keep_seen) {
      diag.push_back(tag + ": path requires keeping before the boundary");
      continue;
    }
    betas.push_back(top);
    vals.push_back(v_top);
    regs.push_back(top_pv.regime);
    betas.push_back(top);
    vals.push_back(v_top);
    regs.push_back(top_pv.regime);

    const std::vector<double> x_in = pinned_inputs(cx.chain, betas, T);
    double p0;
    try {
      p0 = p0_closed_form(x_in[0], cx.l, db);
    } catch (const NoInteriorSolution&) {
      diag.push_back(tag + ": no interior start probability");
      continue;
    }
    const std::vector<double> e(T, 1.0);
    const GeneralRecursion rec = forward_general(x_in, e, cx.l, db, p0);
    if (static_cast<int>(rec.p_star.size()) != T || rec.first_bad_k >= 0 ||
        *std::min_element(rec.p_star.begin(), rec.p_star.end()) <= 1e-12) {
      diag.push_back(tag + ": interior record mass failed");
      continue;
    }
    const double mu_t =
        db * rec.p_star.back() * rec.mu_star.back() / (1.0 - db);
    const Posterior post = posterior_x(cx.pi, db, T, mu_t, 0.0);
    if (post.x < lambda_top - 1e-12) {
      diag.push_back(tag + ": terminal posterior below the top threshold");
      continue;
    }

    EquilibriumProfile prof;
    prof.t = T + 1;
    prof.t0 = -1;
    prof.payoff = vals[0];
    prof.beta = betas;
    prof.value = vals;
    prof.regime = regs;
    prof.branch = SolveBranch::boundary_hit;

    BeliefPath path;
    path.p_star = rec.p_star;
    path.p_star.push_back(0.0);
    path.mu_star = rec.mu_star;
    path.mu_star.push_back(mu_t);
    path.x = x_in;
    path.x.push_back(post.x);
    finish_profile(cx, prof, path);
    out = {std::move(prof), std::move(path)};
    return true;
  }

  // Zero interior steps: the chain top from birth onward.
  {
    const double e0 = top_pv.regime == EraseRegime::keep ? 0.0 : 1.0;
    const double mu0 = (1.0 - db) / (1.0 - db * e0);
    const Posterior post = posterior_x(cx.pi, db, 0, mu0, 0.0);
    if (post.x >= lambda_top - 1e-12) {
      EquilibriumProfile prof;
      prof.t = 1;
      prof.payoff = v_top;
      prof.beta = {top, top};
      prof.value = {v_top, v_top};
      prof.regime = {top_pv.regime, top_pv.regime};
      prof.t0 = top_pv.regime == EraseRegime::keep ? 1 : -1;
      prof.branch = SolveBranch::boundary_hit;

      BeliefPath path;
      path.p_star = {0.0};
      path.mu_star = {mu0};
      path.x = {post.x};
      finish_profile(cx, prof, path);
      out = {std::move(prof), std::move(path)};
      return true;
    }
    diag.push_back("boundary_hit: T=0 prior too low for trust at birth");
  }
  return false;
}

bool try_pure_anchor(const SearchCtx& cx, SolveResult& out,
                     std::vector<std::string>& diag) {
  const double db = cx.disc.delta_bar;
  for (int i = cx.chain.pure_count() - 2; i >= 0; --i) {
    const std::string tag =
        "pure_anchor: vertex " + cx.g.a2_labels[cx.chain.pure_actions[i]];
    const ChainPoint b0{i, 0.0};
    const ValuePath vp = forward_beta_recursion(cx.g, cx.chain, b0, cx.disc);
    const int t = vp.t;
    std::vector<double> e(t, 1.0);
    for (int k = 0; k < t; ++k)
      e[k] = vp.regime[k] == EraseRegime::keep ? 0.0 : 1.0;
    std::vector<double> x_in = pinned_inputs(cx.chain, vp.beta, t);
    const auto iv = cx.chain.x_interval_of_pure(i);

    auto resid = [&](double x0) -> double {
      double p0;
      if (vp.regime[0] == EraseRegime::keep) {
        p0 = x0 - cx.l * (1.0 - x0);
        if (p0 < 0.0) return -1.0;
      } else {
        try {
          p0 = p0_closed_form(x0, cx.l, db);
        } catch (const NoInteriorSolution&) {
          return -1.0;
        }
      }
      x_in[0] = x0;
      return residual_from(forward_general(x_in, e, cx.l, db, p0),
                           static_cast<std::size_t>(t));
    };

    if (resid(iv.first) > 0.0 || resid(iv.second) < 0.0) {
      diag.push_back(tag + ": start interval does not bracket the terminal belief");
      continue;
    }
    double lo = iv.first, hi = iv.second;
    for (int it = 0; it < kBisectIters && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (resid(mid) > 0.0)
        hi = mid;
      else
        lo = mid;
    }
    const double x0 = 0.5 * (lo + hi);
    double p0;
    if (vp.regime[0] == EraseRegime::keep) {
      p0 = x0 - cx.l * (1.0 - x0);
    } else {
      try {
        p0 = p0_closed_form(x0, cx.l, db);
      } catch (const NoInteriorSolution&) {
        diag.push_back(tag + ": bisection left the interior");
        continue;
      }
    }
    if (p0 < 0.0) {
      diag.push_back(tag + ": bisection left the interior");
      continue;
    }
    x_in[0] = x0;
    const GeneralRecursion rec = forward_general(x_in, e, cx.l, db, p0);
    const double res = residual_from(rec, static_cast<std::size_t>(t));
    if (static_cast<int>(rec.p_star.size()) != t ||
        std::abs(res) > cx.residual_tol) {
      diag.push_back(tag + ": bisection did not close the terminal belief");
      continue;
    }

    EquilibriumProfile prof;
    prof.t = t;
    prof.t0 = last_keep_index(vp.regime);
    prof.payoff = vp.value[0];
    prof.beta = vp.beta;
    prof.value = vp.value;
    prof.regime = vp.regime;
    prof.branch = SolveBranch::pure_anchor;

    BeliefPath path;
    path.p_star = rec.p_star;
    path.mu_star = rec.mu_star;
    path.x = x_in;
    finish_profile(cx, prof, path);
    out = {std::move(prof), std::move(path)};
    return true;
  }
  return false;
}

}  // namespace

SolveResult solve(const StageGame& g, const BestReplyChain& chain,
                  const Discounting& disc, double pi, double residual_tol) {
  if (!(pi >= 0.0) || pi >= 1.0)
    throw InvalidPrior("prior on the honest type must lie in [0, 1)");
  if (!(disc.delta_hat > 0.0) || disc.delta_hat > 1.0 ||
      !(disc.delta_bar > 0.0) || disc.delta_bar >= 1.0)
    throw std::invalid_argument(
        "patience must lie in (0, 1] and survival in (0, 1)");

  if (pi == 0.0) {
    SolveResult sr;
    EquilibriumProfile& prof = sr.profile;
    const PointValue pv = value_of(g, chain, chain.bottom(), disc);
    prof.t = 0;
    prof.t0 = -1;
    prof.payoff = 0.0;
    prof.beta = {chain.bottom()};
    prof.value = {pv.value};
    prof.regime = {pv.regime};
    prof.branch = SolveBranch::minmax;
    prof.notes.push_back(
        "convention: consumer actions are ordered so that the best-reply "
        "chain position is nondecreasing in the clean-record length");
    sr.path.reputation = {0.0};
    sr.path.likelihood_ratio = 0.0;
    return sr;
  }

  const SearchCtx cx{g, chain, disc, pi, pi / (1.0 - pi), residual_tol};
  std::vector<std::string> diag;
  SolveResult out;
  if (try_anchored(cx, out, diag)) return out;
  if (try_boundary_hit(cx, out, diag)) return out;
  if (try_pure_anchor(cx, out, diag)) return out;
  throw NoEquilibriumFound("no construction closed the belief system",
                           std::move(diag));
}

double reputation_failure_cutoff(const StageGame& g,
                                 const BestReplyChain& chain, double delta_hat,
                                 double pi) {
  if (!(pi >= 0.0) || pi >= 1.0)
    throw InvalidPrior("prior on the honest type must lie in [0, 1)");
  const double l = pi / (1.0 - pi);
  for (int k = 1;; ++k) {
    const double db = k * 1e-4;
    if (db > 1.0 - 1e-6) break;
    const Discounting disc{delta_hat, db};
    if (disc.delta() >= 1.0) break;
    const auto bd = beta_dagger(g, chain, disc.delta());
    if (!bd) continue;
    double p0 = 0.0;
    try {
      p0 = p0_closed_form(chain.pinned_x(*bd), l, db);
    } catch (const NoInteriorSolution&) {
      continue;
    }
    if (t_lower_bound(p0, db) > t_upper_bound(g, chain, disc)) return db;
  }
  return 1.0;
}

HonestEraseReport check_honest_no_erase(const StageGame& g,
                                        const BestReplyChain& chain,
                                        const EquilibriumProfile& profile,
                                        const Discounting& disc, double tol) {
  const double delta = disc.delta();
  const double c = g.erase_cost;
  const int t = profile.t;

  std::vector<double> u(t + 1);
  for (int s = 0; s <= t; ++s)
    u[s] = u1_on_chain(g, chain, g.a1_star, profile.beta[s]);

  std::vector<double> prefix(t + 1, 0.0);
  double dpow = 1.0;
  for (int s = 0; s < t; ++s) {
    prefix[s + 1] = prefix[s] + (1.0 - delta) * dpow * u[s];
    dpow *= delta;
  }
  const double keep = prefix[t] + dpow * u[t];

  HonestEraseReport rep;
  double dp = 1.0;
  for (int tau = 0; tau <= t; ++tau) {
    HonestEraseRow row;
    row.tau = tau;
    row.keep_value = keep;
    row.deviation_value = prefix[tau] + dp * (u[tau] - c);
    const double diff = row.deviation_value - keep;
    row.violation = diff > tol;
    row.tie = std::abs(diff) <= tol;
    if (row.violation) rep.ok = false;
    rep.rows.push_back(row);
    dp *= delta;
  }
  return rep;
}

}  // namespace repgame
