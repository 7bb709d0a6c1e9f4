#pragma once

// Bayesian machinery over clean-record lengths: the geometric age prior, the
// closed-form start of the posterior/population recursion, its forward steps,
// posterior and reputation maps, and the stationary distribution over record
// states implied by a solved profile.

#include <stdexcept>
#include <vector>

#include "repgame/profile.hpp"

namespace repgame {

struct NoInteriorSolution : std::runtime_error {
  explicit NoInteriorSolution(const std::string& what)
      : std::runtime_error(what) {}
};
struct NegativeMass : std::runtime_error {
  explicit NegativeMass(const std::string& what) : std::runtime_error(what) {}
};

// Geometric age distribution induced by the survival probability.
struct AgePrior {
  double delta_bar = 0.0;
  double mass(int t) const;
};

// Interior starting probability of the commitment action given the posterior
// x0 required at the empty record, the honest/opportunistic likelihood ratio
// l, and survival delta_bar. Throws NoInteriorSolution when the required
// probability would be negative (the trust-at-birth regime).
double p0_closed_form(double x0, double l, double delta_bar);

struct BeliefRecursion {
  std::vector<double> p_star;
  std::vector<double> mu_star;
  bool hit_zero = false;  // stopped because p reached the tolerance floor
};

// Forward recursion under certain erasure of the low action at every length:
// p0 from the closed form, mass from the stationarity balance, then each step
// substitutes the balance into the likelihood equation. Stops when p falls to
// p_tol or the x list is exhausted.
BeliefRecursion forward_belief_recursion(const std::vector<double>& x, double l,
                                         double delta_bar,
                                         double p_tol = 1e-10);

struct Posterior {
  double x = 1.0;
  bool degenerate = false;  // no opportunistic mass plays anything but a1_star
};

// Posterior probability of the commitment action at record length k.
Posterior posterior_x(double pi, double delta_bar, int k, double mu_k,
                      double p_k);

// Posterior probability of the honest type at record length k.
double reputation_at(double pi, double delta_bar, int k, double mu_k);

// --- generalized forward machinery (drives the solver's consistency search)

// Status of a generalized forward pass. Failure positions help the search
// sign the residual monotonically.
struct GeneralRecursion {
  std::vector<double> p_star;
  std::vector<double> mu_star;
  bool valid = true;
  int first_bad_k = -1;
  bool p_exceeds_x = false;  // posterior arithmetic broke down (p >= x)
};

// Forward pass with a per-length erase probability e[k] in [0,1] and a given
// p0; mass at 0 comes from the likelihood equation when x0 is pinned.
// Negative p values are carried through (the search interprets them).
GeneralRecursion forward_general(const std::vector<double>& x,
                                 const std::vector<double>& e, double l,
                                 double delta_bar, double p0);

// Erase probability at the empty record implied by stationarity given p0 and
// the mass mu0 (the consistency knob at an indifferent start).
double erase_mix_from_mass(double delta_bar, double p0, double mu0);

// --- stationary record-state distribution

struct RecordDistribution {
  // Mass by clean-record length, one entry per length starting at 0.
  std::vector<double> honest_chain;
  std::vector<double> opp_chain;
  // Opportunistic mass by post-separation length (a kept low action followed
  // by that many further periods).
  std::vector<double> opp_separated;
  double honest_total = 0.0;
  double opp_total = 0.0;
};

// Stationary distribution over record states per type under the profile's
// play and erase behavior. Truncated where the geometric tail falls below
// tail_tol; the retained mass per type is reported in the totals.
RecordDistribution record_distribution(const EquilibriumProfile& profile,
                                       const BeliefPath& path, double pi,
                                       double delta_bar,
                                       double tail_tol = 1e-12);

}  // namespace repgame
