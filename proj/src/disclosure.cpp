#include "repgame/disclosure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace repgame {

namespace {
constexpr double kRowSumTol = 1e-12;
constexpr double kTruncationTol = 1e-8;
}  // namespace

int DisclosurePolicy::n_max() const {
  int n = 0;
  for (const auto& row : rows)
    n = std::max(n, static_cast<int>(row.size()) - 1);
  return n;
}

DisclosurePolicy DisclosurePolicy::full(int m_max) {
  DisclosurePolicy p;
  for (int m = 0; m <= m_max; ++m) {
    std::vector<double> row(m + 1, 0.0);
    row[m] = 1.0;
    p.rows.push_back(std::move(row));
  }
  return p;
}

DisclosurePolicy DisclosurePolicy::none(int m_max) {
  DisclosurePolicy p;
  for (int m = 0; m <= m_max; ++m) p.rows.push_back({1.0});
  return p;
}

DisclosurePolicy DisclosurePolicy::halve_round_up(int m_max) {
  DisclosurePolicy p;
  for (int m = 0; m <= m_max; ++m) {
    const int n = (m + 1) / 2;
    std::vector<double> row(n + 1, 0.0);
    row[n] = 1.0;
    p.rows.push_back(std::move(row));
  }
  return p;
}

void DisclosurePolicy::validate() const {
  if (rows.empty()) throw ShapeMismatch("policy has no rows");
  for (int m = 0; m < static_cast<int>(rows.size()); ++m) {
    const auto& row = rows[m];
    if (row.empty())
      throw ShapeMismatch("row " + std::to_string(m) + " is empty");
    double sum = 0.0;
    for (int n = 0; n < static_cast<int>(row.size()); ++n) {
      if (row[n] < 0.0)
        throw ShapeMismatch("row " + std::to_string(m) +
                            " has a negative entry");
      if (restrict_n_le_m && n > m && row[n] != 0.0)
        throw ShapeMismatch("row " + std::to_string(m) +
                            " discloses more than the true age");
      sum += row[n];
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
      throw ShapeMismatch("row " + std::to_string(m) + " does not sum to 1");
  }
}

UnconditionalDisclosed unconditional_distribution(const DisclosurePolicy& p,
                                                  double delta_bar) {
  p.validate();
  UnconditionalDisclosed out;
  const int m_max = p.m_max();
  out.truncation_mass = std::pow(delta_bar, m_max + 1);
  if (out.truncation_mass >= kTruncationTol)
    throw TruncationTooCoarse(
        "policy rows cover too little of the age distribution");
  out.q_tilde.assign(p.n_max() + 1, 0.0);
  double mass = 1.0 - delta_bar;  // age-prior mass at m
  for (int m = 0; m <= m_max; ++m) {
    const auto& row = p.rows[m];
    for (int n = 0; n < static_cast<int>(row.size()); ++n)
      out.q_tilde[n] += mass * row[n];
    mass *= delta_bar;
  }
  return out;
}

std::pair<int, int> boundary_best_replies(const StageGame& g, double pi) {
  const std::vector<int> br = u2_posterior_best_reply(g, pi);
  return {br.front(), br.back()};
}

PayoffBounds no_disclosure_bounds(const StageGame& g,
                                  const BestReplyChain& chain, double pi,
                                  const Discounting& disc) {
  (void)chain;
  const auto [a2l, a2h] = boundary_best_replies(g, pi);
  const double delta = disc.delta();
  const double c = g.erase_cost;
  PayoffBounds b;
  b.lower = std::max(0.0, g.u1[0][a2l] - c);
  b.upper = std::max((1.0 - delta) * c / delta, g.u1[0][a2h] - c);
  return b;
}

double theorem2_cap(const StageGame& g, const BestReplyChain& chain, double pi,
                    const Discounting& disc) {
  return no_disclosure_bounds(g, chain, pi, disc).upper;
}

DisclosureAudit audit_constraints(const EquilibriumProfile& profile,
                                  const BeliefPath& path,
                                  const UnconditionalDisclosed& disclosed,
                                  double pi, double delta_bar,
                                  double x_required) {
  DisclosureAudit audit;
  const int t = profile.t;
  const double inflow = 1.0 - delta_bar;
  const double rhs =
      x_required >= 1.0 ? std::numeric_limits<double>::infinity()
                        : x_required / (1.0 - x_required) - kPayoffTol;

  bool rows_ok = true;
  for (int k = 0; k < t; ++k) {
    AuditRow row;
    row.k = k;
    row.q_tilde_k = k < static_cast<int>(disclosed.q_tilde.size())
                        ? disclosed.q_tilde[k]
                        : 0.0;
    const double mu = path.mu_star[k];
    const double p = path.p_star[k];
    row.mass = mu * p;
    row.mass_ok = row.mass <= inflow + kPayoffTol;
    const double denom = (1.0 - pi) * mu * (1.0 - p);
    row.ic_lhs = denom <= 0.0
                     ? std::numeric_limits<double>::infinity()
                     : (pi * row.q_tilde_k + (1.0 - pi) * mu * p) / denom;
    row.ic_rhs = rhs;
    row.ic_ok = row.ic_lhs >= rhs;
    audit.aggregate_mass += row.mass;
    rows_ok = rows_ok && row.mass_ok && row.ic_ok;
    audit.rows.push_back(row);
  }
  audit.aggregate_cap = t * inflow;
  audit.aggregate_ok = audit.aggregate_mass <= audit.aggregate_cap + kPayoffTol;
  audit.all_ok = rows_ok && audit.aggregate_ok;
  return audit;
}

}  // namespace repgame
