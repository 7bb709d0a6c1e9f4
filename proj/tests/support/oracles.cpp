#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace repgame::testing {

namespace {

ChainPoint point_at_position(const BestReplyChain& chain, double pos) {
  const double top = static_cast<double>(chain.pure_count() - 1);
  pos = std::clamp(pos, 0.0, top);
  const int seg = std::min(static_cast<int>(pos), chain.pure_count() - 1);
  return chain.canonical(seg, pos - seg);
}

}  // namespace

double grid_incentive_gap(const StageGame& g, const BestReplyChain& chain,
                          int grid) {
  const double top = static_cast<double>(chain.pure_count() - 1);
  double best = 1e300;
  for (int i = 0; i <= grid; ++i) {
    const ChainPoint b = point_at_position(chain, top * i / grid);
    const double gap = u1_on_chain(g, chain, 0, b) -
                       u1_on_chain(g, chain, g.a1_star, b) - g.erase_cost;
    best = std::min(best, gap);
  }
  return best;
}

std::optional<CbarScan> cbar_by_scan(const StageGame& g) {
  int a1p = -1;
  for (int i = 1; i < g.n1() && a1p < 0; ++i) {
    int arg = 0;
    for (int j = 1; j < g.n2(); ++j)
      if (g.u2[i][j] > g.u2[i][arg]) arg = j;
    if (arg != 0) a1p = i;
  }
  if (a1p < 0) return std::nullopt;
  double cbar = 1e300;
  for (int j = 0; j < g.n2(); ++j)
    cbar = std::min(cbar, g.u1[0][j] - g.u1[a1p][j]);
  return CbarScan{a1p, cbar};
}

std::optional<double> position_at_low_payoff(const StageGame& g,
                                             const BestReplyChain& chain,
                                             double value) {
  const double top = static_cast<double>(chain.pure_count() - 1);
  auto low = [&](double pos) {
    return u1_on_chain(g, chain, 0, point_at_position(chain, pos));
  };
  if (low(top) < value) return std::nullopt;
  if (low(0.0) >= value) return 0.0;
  double lo = 0.0, hi = top;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (low(mid) < value)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double stationary_value(const StageGame& g, const BestReplyChain& chain,
                        double position, const Discounting& disc) {
  const double u =
      u1_on_chain(g, chain, 0, point_at_position(chain, position));
  const double erase = u - g.erase_cost;
  const double keep = (1.0 - disc.delta()) * u;
  return std::max(erase, keep);
}

std::vector<double> value_path_positions(const StageGame& g,
                                         const BestReplyChain& chain,
                                         double position0,
                                         const Discounting& disc,
                                         int max_steps) {
  const double top = static_cast<double>(chain.pure_count() - 1);
  const double delta = disc.delta();
  const double v_top = stationary_value(g, chain, top, disc);
  std::vector<double> pos{position0};
  double v = stationary_value(g, chain, position0, disc);
  for (int k = 0; k < max_steps; ++k) {
    const double u_com =
        u1_on_chain(g, chain, g.a1_star, point_at_position(chain, pos.back()));
    const double v_req = (v - (1.0 - delta) * u_com) / delta;
    if (v_req > v_top + kPayoffTol) {
      pos.push_back(top);
      return pos;
    }
    // Position whose stationary value reaches v_req, by bisection.
    double lo = 0.0, hi = top;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (stationary_value(g, chain, mid, disc) < v_req)
        lo = mid;
      else
        hi = mid;
    }
    pos.push_back(0.5 * (lo + hi));
    v = v_req;
  }
  return {};
}

std::vector<double> geometric_prefix(double delta_bar, int n) {
  std::vector<double> out(n);
  double mass = 1.0 - delta_bar;
  for (int k = 0; k < n; ++k) {
    out[k] = mass;
    mass *= delta_bar;
  }
  return out;
}

std::vector<double> mc_disclosed(const DisclosurePolicy& policy,
                                 double delta_bar, int n_samples,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::geometric_distribution<int> age(1.0 - delta_bar);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> hist;
  const int m_max = policy.m_max();
  for (int s = 0; s < n_samples; ++s) {
    int m = age(rng);
    if (m > m_max) m = m_max;  // policy tail covers the truncated mass
    const double u = unit(rng);
    double acc = 0.0;
    int n = 0;
    for (std::size_t j = 0; j < policy.rows[m].size(); ++j) {
      acc += policy.rows[m][j];
      if (u <= acc) {
        n = static_cast<int>(j);
        break;
      }
    }
    if (n >= static_cast<int>(hist.size())) hist.resize(n + 1, 0.0);
    hist[n] += 1.0;
  }
  for (double& v : hist) v /= n_samples;
  return hist;
}

double tv_distance(const std::vector<double>& a,
                   const std::vector<double>& b) {
  double s = 0.0;
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i)
    s += std::abs((i < a.size() ? a[i] : 0.0) - (i < b.size() ? b[i] : 0.0));
  return 0.5 * s;
}

bool fosd_at_least(const std::vector<double>& a, const std::vector<double>& b,
                   double tol) {
  double ca = 0.0, cb = 0.0;
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    ca += i < a.size() ? a[i] : 0.0;
    cb += i < b.size() ? b[i] : 0.0;
    if (ca > cb + tol) return false;
  }
  return true;
}

}  // namespace repgame::testing
