#include "repgame/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace repgame {

namespace {

// Numeric JSON value at reporting precision; non-finite values become
// strings since JSON has no literal for them.
nlohmann::json num(double v) {
  if (!std::isfinite(v)) return format_sig(v);
  return std::stod(format_sig(v));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

EraseRegime regime_from_string(const std::string& s) {
  if (s == "keep") return EraseRegime::keep;
  if (s == "erase") return EraseRegime::erase;
  return EraseRegime::indifferent;
}

SolveBranch branch_from_string(const std::string& s) {
  if (s == "minmax") return SolveBranch::minmax;
  if (s == "boundary_hit") return SolveBranch::boundary_hit;
  if (s == "pure_anchor") return SolveBranch::pure_anchor;
  return SolveBranch::anchored;
}

}  // namespace

std::string format_sig(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("rename failed: " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return ss.str();
}

// ---- game ----

nlohmann::json game_to_json(const StageGame& g) {
  nlohmann::json j;
  j["a1_labels"] = g.a1_labels;
  j["a2_labels"] = g.a2_labels;
  nlohmann::json u1 = nlohmann::json::array();
  for (int i = 0; i < g.n1(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < g.n2(); ++k)
      row.push_back(num(g.u1[i][k] + g.normalization_shift));
    u1.push_back(row);
  }
  j["u1"] = u1;
  nlohmann::json u2 = nlohmann::json::array();
  for (int i = 0; i < g.n1(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < g.n2(); ++k) row.push_back(num(g.u2[i][k]));
    u2.push_back(row);
  }
  j["u2"] = u2;
  j["a1_star"] = g.a1_labels[g.a1_star];
  j["erase_cost"] = num(g.erase_cost);
  return j;
}

StageGame game_from_json(const nlohmann::json& j) {
  const auto a1_labels = j.at("a1_labels").get<std::vector<std::string>>();
  const auto a2_labels = j.at("a2_labels").get<std::vector<std::string>>();
  const auto u1 = j.at("u1").get<std::vector<std::vector<double>>>();
  const auto u2 = j.at("u2").get<std::vector<std::vector<double>>>();
  int a1_star = -1;
  const auto& star = j.at("a1_star");
  if (star.is_string()) {
    const std::string label = star.get<std::string>();
    for (std::size_t i = 0; i < a1_labels.size(); ++i)
      if (a1_labels[i] == label) a1_star = static_cast<int>(i);
    if (a1_star < 0)
      throw std::invalid_argument("a1_star label not found: " + label);
  } else {
    a1_star = star.get<int>();
  }
  return StageGame::make(a1_labels, a2_labels, u1, u2, a1_star,
                         j.at("erase_cost").get<double>());
}

StageGame parse_game(const nlohmann::json& j) {
  if (j.contains("product_choice")) {
    const auto& pc = j.at("product_choice");
    return StageGame::product_choice(pc.at("b").get<double>(),
                                     pc.at("x").get<double>(),
                                     pc.at("c").get<double>());
  }
  return game_from_json(j);
}

// ---- solve report ----

nlohmann::json solve_report_to_json(const SolveReport& r) {
  nlohmann::json j;
  j["game"] = game_to_json(r.game);
  j["delta_hat"] = num(r.delta_hat);
  j["delta_bar"] = num(r.delta_bar);
  j["pi"] = num(r.pi);
  j["t"] = r.profile.t;
  j["t0"] = r.profile.t0;
  j["payoff"] = num(r.profile.payoff);
  j["branch"] = to_string(r.profile.branch);
  j["erase_mix"] = num(r.profile.erase_mix);
  j["likelihood_ratio"] = num(r.path.likelihood_ratio);
  nlohmann::json mult = nlohmann::json::array();
  for (const MultiplicityNote& n : r.profile.multiplicity)
    mult.push_back({{"k", n.k},
                    {"pure_action", n.pure_action},
                    {"x_lo", num(n.x_lo)},
                    {"x_hi", num(n.x_hi)}});
  j["multiplicity"] = mult;
  j["notes"] = r.profile.notes;
  nlohmann::json rows = nlohmann::json::array();
  for (int k = 0; k <= r.profile.t; ++k) {
    nlohmann::json row;
    row["k"] = k;
    row["beta_segment"] = r.profile.beta[k].segment;
    row["beta_weight"] = num(r.profile.beta[k].weight);
    row["V"] = num(r.profile.value[k]);
    if (k < r.profile.t) {
      row["p_star"] = num(r.path.p_star[k]);
      row["mu_star"] = num(r.path.mu_star[k]);
      row["x"] = num(r.path.x[k]);
    } else {
      row["p_star"] = nullptr;
      row["mu_star"] = nullptr;
      row["x"] = nullptr;
    }
    row["reputation"] = num(r.path.reputation[k]);
    row["regime"] = to_string(r.profile.regime[k]);
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j;
}

SolveReport solve_report_from_json(const nlohmann::json& j) {
  SolveReport r{game_from_json(j.at("game")),
                j.at("delta_hat").get<double>(),
                j.at("delta_bar").get<double>(),
                j.at("pi").get<double>(),
                {},
                {}};
  r.profile.t = j.at("t").get<int>();
  r.profile.t0 = j.at("t0").get<int>();
  r.profile.payoff = j.at("payoff").get<double>();
  r.profile.branch = branch_from_string(j.at("branch").get<std::string>());
  r.profile.erase_mix = j.at("erase_mix").get<double>();
  r.path.likelihood_ratio = j.at("likelihood_ratio").get<double>();
  for (const auto& m : j.at("multiplicity"))
    r.profile.multiplicity.push_back({m.at("k").get<int>(),
                                      m.at("pure_action").get<int>(),
                                      m.at("x_lo").get<double>(),
                                      m.at("x_hi").get<double>()});
  if (j.contains("notes"))
    r.profile.notes = j.at("notes").get<std::vector<std::string>>();
  for (const auto& row : j.at("rows")) {
    r.profile.beta.push_back(ChainPoint{row.at("beta_segment").get<int>(),
                                        row.at("beta_weight").get<double>()});
    r.profile.value.push_back(row.at("V").get<double>());
    r.profile.regime.push_back(
        regime_from_string(row.at("regime").get<std::string>()));
    if (!row.at("p_star").is_null()) {
      r.path.p_star.push_back(row.at("p_star").get<double>());
      r.path.mu_star.push_back(row.at("mu_star").get<double>());
      r.path.x.push_back(row.at("x").get<double>());
    }
    r.path.reputation.push_back(row.at("reputation").get<double>());
  }
  return r;
}

std::string solve_report_to_csv(const SolveReport& r) {
  std::ostringstream out;
  out << "k,beta_segment,beta_weight,V,p_star,mu_star,x,reputation,regime\n";
  for (int k = 0; k <= r.profile.t; ++k) {
    out << k << ',' << r.profile.beta[k].segment << ','
        << format_sig(r.profile.beta[k].weight) << ','
        << format_sig(r.profile.value[k]) << ',';
    if (k < r.profile.t)
      out << format_sig(r.path.p_star[k]) << ','
          << format_sig(r.path.mu_star[k]) << ',' << format_sig(r.path.x[k]);
    else
      out << ",,";
    out << ',' << format_sig(r.path.reputation[k]) << ','
        << to_string(r.profile.regime[k]) << '\n';
  }
  return out.str();
}

// ---- sweep ----

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "axis,axis_value,solved,branch,t,t0,payoff,p0_star,t_upper,t_lower,"
         "at_erasure_bound,note\n";
  for (const SweepRow& r : rows) {
    out << r.axis << ',' << format_sig(r.axis_value) << ','
        << (r.solved ? 1 : 0) << ',' << r.branch << ',' << r.t << ',' << r.t0
        << ',' << format_sig(r.payoff) << ',' << format_sig(r.p0_star) << ','
        << format_sig(r.t_upper) << ',' << format_sig(r.t_lower) << ','
        << (r.at_erasure_bound ? 1 : 0) << ',' << csv_field(r.note) << '\n';
  }
  return out.str();
}

nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const SweepRow& r : rows)
    arr.push_back({{"axis", r.axis},
                   {"axis_value", num(r.axis_value)},
                   {"solved", r.solved},
                   {"branch", r.branch},
                   {"t", r.t},
                   {"t0", r.t0},
                   {"payoff", num(r.payoff)},
                   {"p0_star", num(r.p0_star)},
                   {"t_upper", num(r.t_upper)},
                   {"t_lower", num(r.t_lower)},
                   {"at_erasure_bound", r.at_erasure_bound},
                   {"note", r.note}});
  return arr;
}

// ---- verification ----

nlohmann::json constraint_report_to_json(const ConstraintReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ConstraintRow& row : r.rows)
    rows.push_back({{"k", row.k},
                    {"id", row.id},
                    {"detail", row.detail},
                    {"lhs", num(row.lhs)},
                    {"rhs", num(row.rhs)},
                    {"slack", num(row.slack)},
                    {"pass", row.pass}});
  return {{"tol", num(r.tol)},
          {"all_pass", r.all_pass()},
          {"fail_count", r.fail_count()},
          {"rows", rows}};
}

std::string constraint_report_to_csv(const ConstraintReport& r) {
  std::ostringstream out;
  out << "k,id,detail,lhs,rhs,slack,pass\n";
  for (const ConstraintRow& row : r.rows)
    out << row.k << ',' << row.id << ',' << csv_field(row.detail) << ','
        << format_sig(row.lhs) << ',' << format_sig(row.rhs) << ','
        << format_sig(row.slack) << ',' << (row.pass ? 1 : 0) << '\n';
  return out.str();
}

// ---- simulation ----

nlohmann::json sim_stats_to_json(const SimStats& s,
                                 const RecordDistribution& predicted) {
  auto vec = [](const std::vector<double>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (double x : v) arr.push_back(num(x));
    return arr;
  };
  nlohmann::json freq = nlohmann::json::array();
  for (const auto& row : s.consumer_freq) freq.push_back(vec(row));
  return {{"config",
           {{"n_agents", s.config.n_agents},
            {"n_periods", s.config.n_periods},
            {"burn_in", s.config.burn_in},
            {"seed", s.config.seed},
            {"pi", num(s.config.pi)},
            {"delta_hat", num(s.config.delta_hat)},
            {"delta_bar", num(s.config.delta_bar)}}},
          {"honest_chain", vec(s.honest_chain)},
          {"opp_chain", vec(s.opp_chain)},
          {"opp_separated", vec(s.opp_separated)},
          {"predicted_honest", vec(predicted.honest_chain)},
          {"predicted_opp", vec(predicted.opp_chain)},
          {"predicted_separated", vec(predicted.opp_separated)},
          {"consumer_freq", freq},
          {"v0_hat", num(s.v0_hat)},
          {"completed_lifetimes", s.completed_lifetimes},
          {"tv_honest", num(s.tv_honest)},
          {"tv_opportunistic", num(s.tv_opportunistic)},
          {"erase_mix_used", num(s.erase_mix_used)}};
}

std::string sim_census_to_csv(const SimStats& s,
                              const RecordDistribution& predicted) {
  std::ostringstream out;
  out << "population,record,simulated,predicted\n";
  auto emit = [&](const char* name, const std::vector<double>& sim,
                  const std::vector<double>& pred) {
    const std::size_t n = std::max(sim.size(), pred.size());
    for (std::size_t k = 0; k < n; ++k)
      out << name << ',' << k << ','
          << format_sig(k < sim.size() ? sim[k] : 0.0) << ','
          << format_sig(k < pred.size() ? pred[k] : 0.0) << '\n';
  };
  emit("honest", s.honest_chain, predicted.honest_chain);
  emit("opportunistic", s.opp_chain, predicted.opp_chain);
  emit("separated", s.opp_separated, predicted.opp_separated);
  return out.str();
}

// ---- disclosure ----

nlohmann::json disclosure_audit_to_json(const DisclosureAudit& a,
                                        const UnconditionalDisclosed& disclosed,
                                        const PayoffBounds& bounds,
                                        double cap) {
  nlohmann::json rows = nlohmann::json::array();
  for (const AuditRow& r : a.rows)
    rows.push_back({{"k", r.k},
                    {"q_tilde_k", num(r.q_tilde_k)},
                    {"mass", num(r.mass)},
                    {"mass_ok", r.mass_ok},
                    {"ic_lhs", num(r.ic_lhs)},
                    {"ic_rhs", num(r.ic_rhs)},
                    {"ic_ok", r.ic_ok}});
  nlohmann::json q = nlohmann::json::array();
  for (double v : disclosed.q_tilde) q.push_back(num(v));
  return {{"rows", rows},
          {"aggregate_mass", num(a.aggregate_mass)},
          {"aggregate_cap", num(a.aggregate_cap)},
          {"aggregate_ok", a.aggregate_ok},
          {"all_ok", a.all_ok},
          {"q_tilde", q},
          {"truncation_mass", num(disclosed.truncation_mass)},
          {"lower_bound", num(bounds.lower)},
          {"upper_bound", num(bounds.upper)},
          {"payoff_cap", num(cap)}};
}

std::string disclosure_audit_to_csv(const DisclosureAudit& a) {
  std::ostringstream out;
  out << "k,q_tilde_k,mass,mass_ok,ic_lhs,ic_rhs,ic_ok\n";
  for (const AuditRow& r : a.rows)
    out << r.k << ',' << format_sig(r.q_tilde_k) << ',' << format_sig(r.mass)
        << ',' << (r.mass_ok ? 1 : 0) << ',' << format_sig(r.ic_lhs) << ','
        << format_sig(r.ic_rhs) << ',' << (r.ic_ok ? 1 : 0) << '\n';
  return out.str();
}

nlohmann::json policy_to_json(const DisclosurePolicy& p) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : p.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (double v : row) r.push_back(num(v));
    rows.push_back(r);
  }
  return {{"rows", rows}, {"restrict_n_le_m", p.restrict_n_le_m}};
}

DisclosurePolicy policy_from_json(const nlohmann::json& j) {
  DisclosurePolicy p;
  p.rows = j.at("rows").get<std::vector<std::vector<double>>>();
  if (j.contains("restrict_n_le_m"))
    p.restrict_n_le_m = j.at("restrict_n_le_m").get<bool>();
  return p;
}

}  // namespace repgame
