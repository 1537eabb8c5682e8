#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "pool.hpp"
#include "via/analytics.hpp"
#include "via/optimizer.hpp"
#include "via/oracle.hpp"
#include "via/simulator.hpp"

namespace viamon {

namespace an = via::analytics;
namespace orc = via::oracle;

namespace {

using Opt = std::optional<double>;

template <typename F>
Opt attempt(F&& f) {
  try {
    return f();
  } catch (const via::InvalidParameter&) {
  } catch (const via::NonConvergence&) {
  } catch (const via::UnsupportedPolicy&) {
  } catch (const via::ReducibleChain&) {
  }
  return std::nullopt;
}

struct SimStats {
  double via, aoiv, aoii, pe, rate;
  double se_via, se_aoiv, se_aoii, se_pe, se_rate;
};

SimStats simulate(const via::PolicySpec& policy, const via::SourceParams& src,
                  const via::ChannelParams& ch, const SimulationSettings& s, std::uint64_t seed) {
  via::SimulationConfig cfg{src, ch, policy};
  cfg.horizon = s.slots;
  cfg.burn_in = s.burn_in;
  cfg.seed = seed;
  cfg.histogram_cap = s.histogram_cap;
  if (s.reps <= 1) {
    const auto r = via::run(cfg);
    const auto& e = r.standard_errors;
    return {r.avg_via, r.avg_aoiv, r.avg_aoii, r.empirical_pe, r.sampling_rate,
            e.via,     e.aoiv,     e.aoii,     e.pe,           e.sampling_rate};
  }
  const auto r = via::run_replicated(cfg, s.reps);
  const double n = std::sqrt(static_cast<double>(r.n_reps));
  return {r.via.mean,     r.aoiv.mean,     r.aoii.mean,     r.pe.mean,     r.sampling_rate.mean,
          r.via.sd / n,   r.aoiv.sd / n,   r.aoii.sd / n,   r.pe.sd / n,   r.sampling_rate.sd / n};
}

Opt rel_diff(Opt a, Opt b) {
  if (!a || !b) return std::nullopt;
  const double scale = std::max(std::abs(*a), std::abs(*b));
  return scale == 0.0 ? 0.0 : std::abs(*a - *b) / scale;
}

struct SolvedChain {
  orc::FiniteChain chain;
  std::vector<double> pi;
};

/// Builds and solves a level-truncated chain, doubling the truncation from
/// `levels` until the mass parked on the top level no longer moves a mean by
/// more than `budget` (capped at 64x the starting level).
template <typename Build>
SolvedChain solve_truncated(Build&& build, std::size_t levels, std::size_t field, double budget) {
  for (std::size_t l = levels;; l *= 2) {
    auto chain = build(l);
    auto pi = orc::stationary(chain);
    const int top = static_cast<int>(l);
    const double parked =
        orc::mass_where(chain, pi, [&](const orc::Label& s) { return s[field] == top; });
    if (parked * static_cast<double>(l) <= budget || l >= 64 * levels) {
      return {std::move(chain), std::move(pi)};
    }
  }
}

// -- validate --------------------------------------------------------------

struct Comparison {
  std::string metric;
  std::string kind;
  double expected;
  double observed;
  double tolerance;
  Opt stderr_value;

  double abs_diff() const { return std::abs(expected - observed); }
  bool pass() const { return abs_diff() <= tolerance; }
};

const std::vector<std::string> kValidateColumns = {
    "p", "q", "p_s", "policy", "metric", "comparison", "expected", "observed",
    "abs_diff", "rel_diff", "tolerance", "stderr", "status"};

/// Largest entrywise gap between two laws, reported at its index.
void worst_entry(std::vector<Comparison>& out, const std::string& name, const std::vector<double>& closed,
                 const std::vector<double>& oracle, double tol) {
  std::size_t worst = 0;
  double gap = -1.0;
  for (std::size_t i = 0; i < closed.size(); ++i) {
    const double o = i < oracle.size() ? oracle[i] : 0.0;
    if (std::abs(closed[i] - o) > gap) {
      gap = std::abs(closed[i] - o);
      worst = i;
    }
  }
  const double o = worst < oracle.size() ? oracle[worst] : 0.0;
  out.push_back({fmt::format("{}[{}]", name, worst), "closed_vs_oracle", closed[worst], o, tol, {}});
}

std::vector<Comparison> validate_policy(const ExperimentConfig& cfg, const PolicyEntry& entry,
                                        const GridCell& cell, std::uint64_t seed) {
  const auto& v = cfg.validation;
  const via::SourceParams src(cell.p, cell.q);
  const via::ChannelParams ch(cell.p_s);
  const auto& policy = entry.spec;
  const double k = 1.0 + v.perturb;
  const double small = v.small_chain_tolerance;
  auto big = [&](double x) { return v.oracle_tolerance * std::max(1.0, std::abs(x)); };
  std::vector<Comparison> out;

  // VIA law and mean against the truncated joint chain
  const bool rs = policy.kind() == via::PolicyKind::RandomizedStationary;
  const std::size_t via_field = rs ? 1 : 2;
  const double budget = 1e-3 * v.oracle_tolerance;
  const auto [via_chain, via_pi] = solve_truncated(
      [&](std::size_t l) {
        return rs ? orc::build_via_chain(src, ch, *policy.p_sample(), l)
                  : orc::build_joint_via_chain(policy, src, ch, l);
      },
      v.truncation, via_field, budget);
  const double oracle_via = orc::expectation(via_chain, via_pi, via_field);
  const bool closed_via = policy.kind() != via::PolicyKind::SemanticsAware;
  if (closed_via) {
    const auto law = an::via_stationary(policy, src, ch, v.pmf_levels);
    std::vector<double> closed(v.pmf_levels + 1);
    for (std::size_t i = 0; i <= v.pmf_levels; ++i) closed[i] = k * law.marginal(i);
    worst_entry(out, "via_pmf", closed, orc::marginal(via_chain, via_pi, via_field),
                v.oracle_tolerance);
    const double avg = k * an::avg_via(policy, src, ch);
    out.push_back({"avg_via", "closed_vs_oracle", avg, oracle_via, big(avg), {}});
  }

  // four-state chains
  const auto aoiv_chain = orc::build_aoiv_chain(policy, src, ch);
  const auto aoiv_pi = orc::stationary(aoiv_chain);
  const auto table = an::aoiv_stationary(policy, src, ch);
  std::vector<double> closed_aoiv, oracle_aoiv;
  for (std::size_t s = 0; s < aoiv_chain.size(); ++s) {
    const auto& l = aoiv_chain.states[s];
    closed_aoiv.push_back(k * table.at(l[0], l[1], l[2]));
    oracle_aoiv.push_back(aoiv_pi[s]);
  }
  worst_entry(out, "aoiv_table", closed_aoiv, oracle_aoiv, small);
  const double avg_aoiv = k * an::avg_aoiv(policy, src, ch);
  const double oracle_err =
      orc::mass_where(aoiv_chain, aoiv_pi, [](const orc::Label& l) { return l[2] == 1; });
  out.push_back({"avg_aoiv", "closed_vs_oracle", avg_aoiv, oracle_err, small, {}});

  const auto recon_chain = orc::build_recon_chain(policy, src, ch);
  const auto recon_pi = orc::stationary(recon_chain);
  const auto recon = an::joint_recon_stationary(policy, src, ch);
  std::vector<double> closed_recon, oracle_recon;
  for (std::size_t s = 0; s < recon_chain.size(); ++s) {
    const auto& l = recon_chain.states[s];
    closed_recon.push_back(k * recon.at(l[0], l[1]));
    oracle_recon.push_back(recon_pi[s]);
  }
  worst_entry(out, "recon_table", closed_recon, oracle_recon, small);
  const double pe = k * an::reconstruction_error(policy, src, ch);
  const double oracle_pe =
      orc::mass_where(recon_chain, recon_pi, [](const orc::Label& l) { return l[0] != l[1]; });
  out.push_back({"pe", "closed_vs_oracle", pe, oracle_pe, small, {}});
  const double rate = k * via::sampling_rate(policy, src, ch);
  out.push_back({"sampling_rate", "closed_vs_oracle", rate, orc::sampling_rate(policy, src, ch),
                 small, {}});

  // AoII law and mean
  const auto [aoii_chain, aoii_pi] = solve_truncated(
      [&](std::size_t l) { return orc::build_aoii_chain(policy, src, ch, l); }, v.truncation, 2, budget);
  const auto aoii_law = an::aoii_distribution(policy, src, ch, v.pmf_levels);
  std::vector<double> closed_aoii(aoii_law.pmf.size());
  for (std::size_t i = 0; i < closed_aoii.size(); ++i) closed_aoii[i] = k * aoii_law.pmf[i];
  worst_entry(out, "aoii_pmf", closed_aoii, orc::marginal(aoii_chain, aoii_pi, 2),
              v.oracle_tolerance);
  const double avg_aoii = k * an::avg_aoii(policy, src, ch);
  out.push_back({"avg_aoii", "closed_vs_oracle", avg_aoii,
                 orc::expectation(aoii_chain, aoii_pi, 2), big(avg_aoii), {}});

  // Monte Carlo
  if (cfg.simulation.enabled) {
    const auto sim = simulate(policy, src, ch, cfg.simulation, seed);
    auto mc = [&](const char* metric, const char* kind, double expected, double observed,
                  double se) {
      const double tol = std::max(v.mc_rel_tolerance * std::abs(expected), v.mc_stderr_factor * se);
      out.push_back({metric, kind, expected, observed, tol, se});
    };
    if (closed_via) {
      mc("avg_via", "closed_vs_mc", k * an::avg_via(policy, src, ch), sim.via, sim.se_via);
    } else {
      mc("avg_via", "oracle_vs_mc", oracle_via, sim.via, sim.se_via);
    }
    mc("avg_aoiv", "closed_vs_mc", avg_aoiv, sim.aoiv, sim.se_aoiv);
    mc("avg_aoii", "closed_vs_mc", avg_aoii, sim.aoii, sim.se_aoii);
    mc("pe", "closed_vs_mc", pe, sim.pe, sim.se_pe);
    mc("sampling_rate", "closed_vs_mc", rate, sim.rate, sim.se_rate);
  }
  return out;
}

// -- sweep -----------------------------------------------------------------

const char* const kMetrics[] = {"avg_via", "avg_aoiv", "avg_aoii", "pe", "sampling_rate"};

std::vector<std::string> sweep_columns(const ExperimentConfig& cfg) {
  std::vector<std::string> cols = {"p", "q", "p_s"};
  for (const auto& e : cfg.policies) {
    const auto& l = e.label;
    for (const char* m : kMetrics) cols.push_back(l + "_" + m);
    cols.push_back(l + "_sampling_cost");
    if (cfg.simulation.enabled) {
      for (const char* m : kMetrics) {
        cols.push_back(l + "_sim_" + m);
        cols.push_back(l + "_sim_" + m + "_se");
        cols.push_back(l + "_" + m + "_rel_diff");
      }
    }
    cols.push_back(l + "_oracle_delta_aoiv");
    cols.push_back(l + "_oracle_delta_aoii");
  }
  for (const char* m : {"via", "aoiv", "aoii", "cost"}) cols.push_back(std::string("best_") + m);
  for (const char* m : {"via", "aoiv", "aoii"}) cols.push_back(std::string("best_") + m + "_capped");
  for (const char* c : {"opt_status", "opt_p_star", "opt_lower_bound", "opt_avg_via", "opt_pe",
                        "opt_avg_aoii", "opt_cost"}) {
    cols.emplace_back(c);
  }
  return cols;
}

/// Labels attaining the minimum, joined with '+' on ties (relative 1e-12).
std::string argmin_label(const std::vector<std::pair<std::string, Opt>>& candidates) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [label, v] : candidates) {
    if (v && *v < best) best = *v;
  }
  if (!std::isfinite(best)) return "none";
  std::string out;
  for (const auto& [label, v] : candidates) {
    if (v && std::abs(*v - best) <= 1e-12 * std::max(1.0, std::abs(best))) {
      if (!out.empty()) out += '+';
      out += label;
    }
  }
  return out;
}

struct OptCell {
  std::string status;
  via::OptimizationOutcome outcome;
};

OptCell optimize_cell(const ExperimentConfig& cfg, const via::SourceParams& src,
                      const via::ChannelParams& ch) {
  const auto& o = cfg.optimization;
  if (!src.irreducible()) return {"undefined", {}};
  const via::OptimizationProblem prob(src, ch, o.delta, o.eta * o.delta, o.e_max);
  try {
    auto out = via::solve(prob);
    return {std::string(via::to_string(out.status)), out};
  } catch (const via::InvalidParameter&) {
    return {"infeasible", {}};
  }
}

Table::Row sweep_row(const ExperimentConfig& cfg, const Table& table, const GridCell& cell,
                     std::uint64_t seed) {
  const via::SourceParams src(cell.p, cell.q);
  const via::ChannelParams ch(cell.p_s);
  const auto& v = cfg.validation;
  const double eta = cfg.optimization.eta;
  auto row = table.row();
  row.set("p", cell.p).set("q", cell.q).set("p_s", cell.p_s);

  std::vector<std::pair<std::string, Opt>> by_via, by_aoiv, by_aoii, by_cost;
  std::vector<std::pair<std::string, Opt>> cap_via, cap_aoiv, cap_aoii;

  for (std::size_t k = 0; k < cfg.policies.size(); ++k) {
    const auto& e = cfg.policies[k];
    const auto& l = e.label;
    const auto& policy = e.spec;
    Opt via_v;
    if (policy.kind() == via::PolicyKind::SemanticsAware) {
      via_v = attempt([&] {
        const auto solved = solve_truncated(
            [&](std::size_t l) { return orc::build_joint_via_chain(policy, src, ch, l); },
            v.truncation, 2, 1e-12);
        return orc::expectation(solved.chain, solved.pi, 2);
      });
    } else {
      via_v = attempt([&] { return an::avg_via(policy, src, ch); });
    }
    const Opt aoiv = attempt([&] { return an::avg_aoiv(policy, src, ch); });
    const Opt aoii = attempt([&] { return an::avg_aoii(policy, src, ch); });
    const Opt pe = attempt([&] { return an::reconstruction_error(policy, src, ch); });
    const Opt rate = attempt([&] { return via::sampling_rate(policy, src, ch); });
    const Opt cost = rate ? Opt(cfg.optimization.delta * *rate) : std::nullopt;
    const Opt values[] = {via_v, aoiv, aoii, pe, rate};
    for (std::size_t m = 0; m < 5; ++m) row.set(l + "_" + kMetrics[m], values[m]);
    row.set(l + "_sampling_cost", cost);

    if (cfg.simulation.enabled) {
      const auto sim = simulate(policy, src, ch, cfg.simulation, cell_seed(seed, cell, k));
      const double means[] = {sim.via, sim.aoiv, sim.aoii, sim.pe, sim.rate};
      const double ses[] = {sim.se_via, sim.se_aoiv, sim.se_aoii, sim.se_pe, sim.se_rate};
      for (std::size_t m = 0; m < 5; ++m) {
        row.set(l + "_sim_" + kMetrics[m], means[m]);
        row.set(l + "_sim_" + kMetrics[m] + "_se", ses[m]);
        row.set(l + "_" + kMetrics[m] + "_rel_diff", rel_diff(values[m], means[m]));
      }
    }
    row.set(l + "_oracle_delta_aoiv", attempt([&] {
              const auto chain = orc::build_aoiv_chain(policy, src, ch);
              const auto pi = orc::stationary(chain);
              const double err = orc::mass_where(chain, pi, [](const orc::Label& s) { return s[2] == 1; });
              return std::abs(err - an::avg_aoiv(policy, src, ch));
            }));
    row.set(l + "_oracle_delta_aoii", attempt([&] {
              const auto solved = solve_truncated(
                  [&](std::size_t l) { return orc::build_aoii_chain(policy, src, ch, l); },
                  v.truncation, 2, 1e-12);
              return std::abs(orc::expectation(solved.chain, solved.pi, 2) -
                              an::avg_aoii(policy, src, ch));
            }));

    by_via.emplace_back(l, via_v);
    by_aoiv.emplace_back(l, aoiv);
    by_aoii.emplace_back(l, aoii);
    by_cost.emplace_back(l, cost);
    if (rate && *rate <= eta + 1e-12) {
      cap_via.emplace_back(l, via_v);
      cap_aoiv.emplace_back(l, aoiv);
      cap_aoii.emplace_back(l, aoii);
    }
  }

  const auto opt = optimize_cell(cfg, src, ch);
  row.set("opt_status", opt.status);
  Opt opt_aoii;
  if (opt.outcome.optimal()) {
    const auto& out = opt.outcome;
    const auto rsc = via::PolicySpec::randomized_stationary(*out.p_star);
    opt_aoii = attempt([&] { return an::avg_aoii(rsc, src, ch); });
    row.set("opt_p_star", *out.p_star)
        .set("opt_lower_bound", out.lower_bound)
        .set("opt_avg_via", out.achieved_via)
        .set("opt_pe", out.achieved_pe)
        .set("opt_avg_aoii", opt_aoii)
        .set("opt_cost", out.achieved_cost);
    cap_via.emplace_back("rsc", out.achieved_via);
    cap_aoiv.emplace_back("rsc", out.achieved_pe);
    cap_aoii.emplace_back("rsc", opt_aoii);
  } else if (opt.status != "undefined") {
    row.set("opt_lower_bound", opt.outcome.lower_bound);
  }

  row.set("best_via", argmin_label(by_via))
      .set("best_aoiv", argmin_label(by_aoiv))
      .set("best_aoii", argmin_label(by_aoii))
      .set("best_cost", argmin_label(by_cost))
      .set("best_via_capped", argmin_label(cap_via))
      .set("best_aoiv_capped", argmin_label(cap_aoiv))
      .set("best_aoii_capped", argmin_label(cap_aoii));
  return row;
}

// -- optimize --------------------------------------------------------------

std::vector<std::string> optimize_columns(const ExperimentConfig& cfg) {
  std::vector<std::string> cols = {
      "p", "q", "p_s", "eta", "e_max", "delta", "status", "p_star", "lower_bound",
      "rsc_avg_via", "rsc_pe", "rsc_cost", "ca_avg_via", "ca_pe", "ca_sampling_rate", "ca_cost",
      "ca_feasible", "threshold", "unconstrained_order", "winner"};
  if (cfg.optimization.grid_step > 0.0) cols.emplace_back("grid_check");
  return cols;
}

Table::Row optimize_row(const ExperimentConfig& cfg, const Table& table, const GridCell& cell) {
  const auto& o = cfg.optimization;
  const via::SourceParams src(cell.p, cell.q);
  const via::ChannelParams ch(cell.p_s);
  auto row = table.row();
  row.set("p", cell.p).set("q", cell.q).set("p_s", cell.p_s);
  row.set("eta", o.eta).set("e_max", o.e_max).set("delta", o.delta);

  const auto opt = optimize_cell(cfg, src, ch);
  row.set("status", opt.status);
  Opt rsc_via;
  if (opt.outcome.optimal()) {
    const auto& out = opt.outcome;
    rsc_via = out.achieved_via;
    row.set("p_star", *out.p_star)
        .set("lower_bound", out.lower_bound)
        .set("rsc_avg_via", out.achieved_via)
        .set("rsc_pe", out.achieved_pe)
        .set("rsc_cost", out.achieved_cost);
  } else if (opt.status != "undefined") {
    row.set("lower_bound", opt.outcome.lower_bound);
  }

  const auto ca = via::PolicySpec::change_aware();
  const Opt ca_via = attempt([&] { return an::avg_via(ca, src, ch); });
  const Opt ca_pe = attempt([&] { return an::reconstruction_error(ca, src, ch); });
  const Opt ca_rate = attempt([&] { return via::sampling_rate(ca, src, ch); });
  row.set("ca_avg_via", ca_via).set("ca_pe", ca_pe).set("ca_sampling_rate", ca_rate);
  row.set("ca_cost", ca_rate ? Opt(o.delta * *ca_rate) : std::nullopt);
  // The change-aware policy is held to the same budget and error cap.
  const bool ca_ok = ca_via && ca_pe && ca_rate && *ca_rate <= o.eta + 1e-12 &&
                     *ca_pe <= o.e_max + 1e-12;
  row.set("ca_feasible", std::string(ca_ok ? "yes" : "no"));
  if (src.irreducible()) {
    row.set("threshold", an::rs_ca_threshold(src, ch));
    row.set("unconstrained_order",
            std::string(an::to_string(an::compare_via_rs_ca(src, ch, o.eta))));
  }

  std::string winner = "none";
  if (rsc_via && ca_ok) {
    const double scale = 1e-12 * std::max({1.0, std::abs(*rsc_via), std::abs(*ca_via)});
    if (std::abs(*rsc_via - *ca_via) <= scale) winner = "tie";
    else winner = *rsc_via < *ca_via ? "rsc" : "ca";
  } else if (rsc_via) {
    winner = "rsc";
  } else if (ca_ok) {
    winner = "ca";
  }
  row.set("winner", winner);

  if (o.grid_step > 0.0 && src.irreducible()) {
    const via::OptimizationProblem prob(src, ch, o.delta, o.eta * o.delta, o.e_max);
    bool ok = false;
    try {
      ok = via::verify_by_grid(prob, o.grid_step);
    } catch (const via::InvalidParameter&) {
      ok = opt.status == "infeasible";
    }
    row.set("grid_check", std::string(ok ? "pass" : "fail"));
  }
  return row;
}

template <typename MakeRow>
Table fill_table(std::vector<std::string> columns, const std::vector<GridCell>& cells,
                 std::size_t jobs, MakeRow&& make_row) {
  Table table(std::move(columns));
  std::vector<std::optional<Table::Row>> rows(cells.size());
  parallel_for(cells.size(), jobs, [&](std::size_t i) { rows[i] = make_row(table, cells[i]); });
  for (auto& r : rows) table.push(std::move(*r));
  return table;
}

nlohmann::ordered_json validation_tolerances(const ValidationSettings& v) {
  return {{"oracle", v.oracle_tolerance},
          {"small_chain", v.small_chain_tolerance},
          {"mc_relative", v.mc_rel_tolerance},
          {"mc_stderr_factor", v.mc_stderr_factor},
          {"truncation", v.truncation},
          {"pmf_levels", v.pmf_levels},
          {"perturb", v.perturb}};
}

}  // namespace

std::vector<GridCell> grid_cells(const ExperimentConfig& cfg) {
  const auto ps = cfg.p.values();
  const auto qs = cfg.q.values();
  std::vector<GridCell> cells;
  for (std::size_t ip = 0; ip < ps.size(); ++ip) {
    for (std::size_t iq = 0; iq < qs.size(); ++iq) {
      for (std::size_t is = 0; is < cfg.p_s.size(); ++is) {
        cells.push_back({ps[ip], qs[iq], cfg.p_s[is], ip, iq, is});
      }
    }
  }
  std::stable_sort(cells.begin(), cells.end(), [](const GridCell& a, const GridCell& b) {
    return std::tie(a.p, a.q, a.p_s) < std::tie(b.p, b.q, b.p_s);
  });
  return cells;
}

std::uint64_t cell_seed(std::uint64_t seed, const GridCell& cell, std::size_t policy_index) {
  std::uint64_t s = via::mix_seed(seed, cell.ip);
  s = via::mix_seed(s, cell.iq);
  s = via::mix_seed(s, cell.is);
  return via::mix_seed(s, policy_index);
}

ValidationReport validate_grid(const ExperimentConfig& cfg, std::uint64_t seed, std::size_t jobs) {
  ValidationReport report{Table(kValidateColumns)};
  const auto cells = grid_cells(cfg);
  std::vector<std::vector<Comparison>> results(cells.size() * cfg.policies.size());
  std::vector<bool> skipped(cells.size(), false);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (cells[c].p * cells[c].q == 0.0) {
      skipped[c] = true;
      report.warnings.push_back(fmt::format(
          "warning: skipping cell p={} q={} p_s={}: the source is absorbing or frozen",
          format_number(cells[c].p), format_number(cells[c].q), format_number(cells[c].p_s)));
    }
  }
  const std::size_t np = cfg.policies.size();
  parallel_for(results.size(), jobs, [&](std::size_t i) {
    const std::size_t c = i / np;
    const std::size_t k = i % np;
    if (skipped[c]) return;
    results[i] = validate_policy(cfg, cfg.policies[k], cells[c], cell_seed(seed, cells[c], k));
  });

  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    if (skipped[c]) {
      ++report.skipped_cells;
      auto row = report.table.row();
      row.set("p", cell.p).set("q", cell.q).set("p_s", cell.p_s).set("policy", std::string("*"));
      row.set("status", std::string("skipped"));
      report.table.push(std::move(row));
      continue;
    }
    for (std::size_t k = 0; k < np; ++k) {
      for (const auto& cmp : results[c * np + k]) {
        ++report.comparisons;
        const bool ok = cmp.pass();
        auto row = report.table.row();
        row.set("p", cell.p).set("q", cell.q).set("p_s", cell.p_s);
        row.set("policy", cfg.policies[k].label).set("metric", cmp.metric).set("comparison", cmp.kind);
        row.set("expected", cmp.expected).set("observed", cmp.observed);
        row.set("abs_diff", cmp.abs_diff()).set("rel_diff", rel_diff(cmp.expected, cmp.observed));
        row.set("tolerance", cmp.tolerance).set("stderr", cmp.stderr_value);
        row.set("status", std::string(ok ? "pass" : "fail"));
        report.table.push(std::move(row));
        if (!ok) {
          ++report.failures;
          report.failed.push_back(fmt::format(
              "FAIL p={} q={} p_s={} policy={} {} {}: expected {} observed {} (|diff| {} > tol {})",
              format_number(cell.p), format_number(cell.q), format_number(cell.p_s),
              cfg.policies[k].label, cmp.metric, cmp.kind, format_number(cmp.expected),
              format_number(cmp.observed), format_number(cmp.abs_diff()),
              format_number(cmp.tolerance)));
        }
      }
    }
  }
  return report;
}

Table sweep_table(const ExperimentConfig& cfg, std::uint64_t seed, std::size_t jobs) {
  return fill_table(sweep_columns(cfg), grid_cells(cfg), jobs,
                    [&](const Table& t, const GridCell& c) { return sweep_row(cfg, t, c, seed); });
}

Table optimize_table(const ExperimentConfig& cfg, std::size_t jobs) {
  return fill_table(optimize_columns(cfg), grid_cells(cfg), jobs,
                    [&](const Table& t, const GridCell& c) { return optimize_row(cfg, t, c); });
}

int run_command(const std::string& command, const std::filesystem::path& config_path,
                const RunOptions& opts, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  const std::uint64_t seed = opts.seed.value_or(cfg.simulation.seed);
  const std::filesystem::path dir = opts.out_dir.value_or(std::filesystem::path(cfg.output.dir));
  const std::string stem = cfg.output.name.empty() ? command : cfg.output.name;

  try {
    RunMetadata meta;
    meta.command = command;
    meta.seed = seed;
    if (command == "validate") {
      const auto report = validate_grid(cfg, seed, opts.jobs);
      for (const auto& w : report.warnings) err << w << "\n";
      for (const auto& f : report.failed) err << f << "\n";
      meta.tolerances = validation_tolerances(cfg.validation);
      meta.extra["comparisons"] = report.comparisons;
      meta.extra["failures"] = report.failures;
      meta.extra["skipped_cells"] = report.skipped_cells;
      const auto files = write_outputs(report.table, meta, cfg, dir, stem);
      out << fmt::format("validate: {} comparisons, {} failed, {} cells skipped\n",
                         report.comparisons, report.failures, report.skipped_cells);
      for (const auto& f : files) out << "wrote " << f.string() << "\n";
      return report.failures == 0 ? kExitOk : kExitValidation;
    }
    if (command == "sweep") {
      const auto table = sweep_table(cfg, seed, opts.jobs);
      meta.tolerances = {{"best_label_tie", 1e-12}, {"cost_cap_slack", 1e-12}};
      const auto files = write_outputs(table, meta, cfg, dir, stem);
      out << fmt::format("sweep: {} rows\n", table.rows().size());
      for (const auto& f : files) out << "wrote " << f.string() << "\n";
      return kExitOk;
    }
    if (command == "optimize") {
      const auto table = optimize_table(cfg, opts.jobs);
      meta.tolerances = {{"constraint_slack", 1e-12}, {"grid_step", cfg.optimization.grid_step}};
      const auto files = write_outputs(table, meta, cfg, dir, stem);
      out << fmt::format("optimize: {} rows\n", table.rows().size());
      for (const auto& f : files) out << "wrote " << f.string() << "\n";
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const via::InvalidParameter& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  err << "unknown command " << command << "\n";
  return kExitConfig;
}

}  // namespace viamon
