#include "repgame/belief.hpp"

#include <cmath>
#include <cstddef>

namespace repgame {

namespace {
constexpr std::size_t kMaxEntries = 5u * 1000u * 1000u;
}

double AgePrior::mass(int t) const {
  if (t < 0) return 0.0;
  return (1.0 - delta_bar) * std::pow(delta_bar, t);
}

double p0_closed_form(double x0, double l, double delta_bar) {
  const double num = x0 - (1.0 - delta_bar) * l * (1.0 - x0);
  const double den = 1.0 + delta_bar * l * (1.0 - x0);
  if (num < 0.0)
    throw NoInteriorSolution(
        "posterior at the empty record requires a negative play probability");
  return num / den;
}

BeliefRecursion forward_belief_recursion(const std::vector<double>& x, double l,
                                         double delta_bar, double p_tol) {
  BeliefRecursion out;
  if (x.empty()) return out;

  const double p0 = p0_closed_form(x[0], l, delta_bar);
  const double mu0 = (1.0 - delta_bar) / (1.0 - delta_bar * (1.0 - p0));
  out.p_star.push_back(p0);
  out.mu_star.push_back(mu0);
  if (p0 <= p_tol) {
    out.hit_zero = true;
    return out;
  }

  for (std::size_t k = 1; k < x.size(); ++k) {
    const double ck =
        l * (1.0 - delta_bar) * std::pow(delta_bar, static_cast<double>(k));
    const double a = delta_bar * out.p_star.back() * out.mu_star.back();
    const double d = ck * (1.0 - x[k]);
    const double pk = (a * x[k] - d * (1.0 - delta_bar)) / (a + d * delta_bar);
    if (pk <= p_tol) {
      out.hit_zero = true;
      break;
    }
    const double muk = a / (1.0 - delta_bar * (1.0 - pk));
    out.p_star.push_back(pk);
    out.mu_star.push_back(muk);
  }
  return out;
}

Posterior posterior_x(double pi, double delta_bar, int k, double mu_k,
                      double p_k) {
  Posterior out;
  if (pi <= 0.0) {
    out.x = p_k;
    return out;
  }
  const double honest = pi * (1.0 - delta_bar) * std::pow(delta_bar, k);
  const double opp = (1.0 - pi) * mu_k;
  if (opp <= 0.0) {
    out.x = 1.0;
    out.degenerate = true;
    return out;
  }
  const double rep = honest / (honest + opp);
  out.x = rep + (1.0 - rep) * p_k;
  return out;
}

double reputation_at(double pi, double delta_bar, int k, double mu_k) {
  if (pi <= 0.0) return 0.0;
  const double honest = pi * (1.0 - delta_bar) * std::pow(delta_bar, k);
  const double opp = (1.0 - pi) * mu_k;
  if (opp <= 0.0) return 1.0;
  return honest / (honest + opp);
}

GeneralRecursion forward_general(const std::vector<double>& x,
                                 const std::vector<double>& e, double l,
                                 double delta_bar, double p0) {
  GeneralRecursion out;
  if (x.empty()) return out;

  if (p0 >= x[0]) {
    out.valid = false;
    out.p_exceeds_x = true;
    out.first_bad_k = 0;
    return out;
  }
  const double c0 = l * (1.0 - delta_bar);
  const double mu0 = c0 * (1.0 - x[0]) / (x[0] - p0);
  out.p_star.push_back(p0);
  out.mu_star.push_back(mu0);
  if (p0 <= 0.0) {
    out.valid = false;
    out.first_bad_k = 0;
    return out;
  }

  for (std::size_t k = 1; k < x.size(); ++k) {
    if (x[k] <= 0.0 || x[k] >= 1.0 - 1e-15) {
      out.valid = false;
      out.first_bad_k = static_cast<int>(k);
      return out;
    }
    const double ck =
        l * (1.0 - delta_bar) * std::pow(delta_bar, static_cast<double>(k));
    const double a = delta_bar * out.p_star.back() * out.mu_star.back();
    const double d = ck * (1.0 - x[k]);
    const double ek = e[k];
    const double denom = a + d * delta_bar * ek;
    if (denom <= 0.0) {
      out.valid = false;
      out.first_bad_k = static_cast<int>(k);
      return out;
    }
    const double pk = (a * x[k] - d * (1.0 - delta_bar * ek)) / denom;
    if (pk >= x[k]) {
      out.p_star.push_back(pk);
      out.mu_star.push_back(0.0);
      out.valid = false;
      out.p_exceeds_x = true;
      out.first_bad_k = static_cast<int>(k);
      return out;
    }
    const double mu_den = 1.0 - delta_bar * (1.0 - pk) * ek;
    out.p_star.push_back(pk);
    out.mu_star.push_back(mu_den > 0.0 ? a / mu_den : 0.0);
    if (pk <= 0.0) {
      out.valid = false;
      out.first_bad_k = static_cast<int>(k);
      return out;
    }
  }
  return out;
}

double erase_mix_from_mass(double delta_bar, double p0, double mu0) {
  return (1.0 - (1.0 - delta_bar) / mu0) / (delta_bar * (1.0 - p0));
}

RecordDistribution record_distribution(const EquilibriumProfile& profile,
                                       const BeliefPath& path, double pi,
                                       double delta_bar, double tail_tol) {
  RecordDistribution out;
  (void)pi;

  double geo = 1.0;  // delta_bar^k
  while (out.honest_chain.size() < kMaxEntries) {
    out.honest_chain.push_back((1.0 - delta_bar) * geo);
    geo *= delta_bar;
    if (geo < tail_tol) break;
  }

  if (path.mu_star.empty())
    out.opp_chain.assign(1, 1.0 - delta_bar);
  else
    out.opp_chain = path.mu_star;
  for (double m : out.opp_chain)
    if (m < 0.0) throw NegativeMass("negative stationary record mass");

  double leak = 0.0;
  for (std::size_t k = 0; k < out.opp_chain.size(); ++k) {
    const double pk = path.p_at(static_cast<int>(k));
    const double ek = profile.erase_prob_at(static_cast<int>(k));
    leak += out.opp_chain[k] * (1.0 - pk) * (1.0 - ek);
  }
  double sep = delta_bar * leak;
  if (sep > 0.0) {
    while (out.opp_separated.size() < kMaxEntries) {
      out.opp_separated.push_back(sep);
      sep *= delta_bar;
      if (sep / (1.0 - delta_bar) < tail_tol) break;
    }
  }

  for (double m : out.honest_chain) out.honest_total += m;
  for (double m : out.opp_chain) out.opp_total += m;
  for (double m : out.opp_separated) out.opp_total += m;
  return out;
}

}  // namespace repgame
