#ifndef VIA_SIMULATOR_HPP
#define VIA_SIMULATOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "via/markov_core.hpp"
#include "via/policies.hpp"
#include "via/rng.hpp"
#include "via/types.hpp"

namespace via {

struct SimulationConfig {
  SourceParams src;
  ChannelParams ch;
  PolicySpec policy;
  std::uint64_t horizon = 10'000'000;  // total slots, burn-in included
  std::uint64_t burn_in = 10'000;
  std::uint64_t seed = 0;
  std::size_t histogram_cap = 64;
  std::uint64_t stream = 0;

  void validate() const {
    if (horizon < 1) throw InvalidParameter("horizon must be at least one slot");
    if (burn_in >= horizon) throw InvalidParameter("burn_in must be shorter than the horizon");
    if (histogram_cap < 1) throw InvalidParameter("histogram_cap must be at least 1");
  }
};

struct StandardErrors {
  double via = 0.0;
  double aoiv = 0.0;
  double aoii = 0.0;
  double pe = 0.0;
  double sampling_rate = 0.0;

  bool operator==(const StandardErrors&) const = default;
};

/// Time averages over the slots after burn-in. The averages come from exact
/// integer running sums; the histograms (bins 0..cap-1 plus one overflow
/// bin) are for distribution checks only.
struct SimulationReport {
  double avg_via = 0.0;
  double avg_aoiv = 0.0;
  double avg_aoii = 0.0;
  double empirical_pe = 0.0;
  double sampling_rate = 0.0;
  std::vector<std::uint64_t> via_hist;
  std::vector<std::uint64_t> aoii_hist;
  std::uint64_t slots_counted = 0;
  StandardErrors standard_errors;

  std::uint64_t via_sum = 0;
  std::uint64_t aoiv_sum = 0;
  std::uint64_t aoii_sum = 0;
  std::uint64_t error_slots = 0;
  std::uint64_t sampled_slots = 0;
  std::uint64_t delivered_slots = 0;

  bool operator==(const SimulationReport&) const = default;
};

inline std::vector<double> empirical_pmf(std::span<const std::uint64_t> hist) {
  std::uint64_t total = 0;
  for (auto c : hist) total += c;
  std::vector<double> out(hist.size(), 0.0);
  if (total == 0) return out;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    out[i] = static_cast<double>(hist[i]) / static_cast<double>(total);
  }
  return out;
}

/// Folds an analytic pmf into the histogram layout: bins 0..cap-1 and an
/// overflow bin holding the remaining mass.
inline std::vector<double> fold_pmf(std::span<const double> pmf, std::size_t cap) {
  std::vector<double> out(cap + 1, 0.0);
  double inside = 0.0;
  for (std::size_t i = 0; i < cap && i < pmf.size(); ++i) {
    out[i] = pmf[i];
    inside += pmf[i];
  }
  out[cap] = std::max(0.0, 1.0 - inside);
  return out;
}

inline double total_variation(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::max(a.size(), b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    sum += std::abs(x - y);
  }
  return 0.5 * sum;
}

namespace detail {

inline constexpr std::size_t kBatches = 100;

struct BatchAccumulator {
  std::vector<double> means[5];

  void push(const std::uint64_t (&sums)[5], std::uint64_t count) {
    for (int m = 0; m < 5; ++m) {
      means[m].push_back(static_cast<double>(sums[m]) / static_cast<double>(count));
    }
  }

  double standard_error(int m) const {
    const auto& v = means[m];
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(v.size() - 1);
    return std::sqrt(var / static_cast<double>(v.size()));
  }
};

template <typename Decide>
SimulationReport run_loop(const SimulationConfig& cfg, Decide&& decide, RngHandle& rng) {
  SimulationReport rep;
  rep.via_hist.assign(cfg.histogram_cap + 1, 0);
  rep.aoii_hist.assign(cfg.histogram_cap + 1, 0);

  SlotState state;
  for (std::uint64_t t = 0; t < cfg.burn_in; ++t) {
    state = advance_slot(cfg.src, cfg.ch, decide, state, rng);
  }

  const std::uint64_t counted = cfg.horizon - cfg.burn_in;
  const std::uint64_t batches = std::min<std::uint64_t>(kBatches, counted);
  BatchAccumulator acc;
  std::uint64_t batch_sums[5] = {0, 0, 0, 0, 0};
  std::uint64_t batch_index = 0;
  std::uint64_t batch_end = counted / batches;
  std::uint64_t batch_start = 0;
  const std::size_t cap = cfg.histogram_cap;

  for (std::uint64_t k = 0; k < counted; ++k) {
    state = advance_slot(cfg.src, cfg.ch, decide, state, rng);
    const std::uint64_t err = state.x != state.x_hat ? 1 : 0;
    const std::uint64_t smp = state.sampled ? 1 : 0;
    rep.via_sum += state.via;
    rep.aoiv_sum += state.aoiv;
    rep.aoii_sum += state.aoii;
    rep.error_slots += err;
    rep.sampled_slots += smp;
    rep.delivered_slots += state.delivered ? 1 : 0;
    ++rep.via_hist[std::min<std::uint64_t>(state.via, cap)];
    ++rep.aoii_hist[std::min<std::uint64_t>(state.aoii, cap)];

    batch_sums[0] += state.via;
    batch_sums[1] += state.aoiv;
    batch_sums[2] += state.aoii;
    batch_sums[3] += err;
    batch_sums[4] += smp;
    if (k + 1 == batch_end) {
      acc.push(batch_sums, batch_end - batch_start);
      std::fill(std::begin(batch_sums), std::end(batch_sums), 0);
      ++batch_index;
      batch_start = batch_end;
      batch_end = (batch_index + 1) * counted / batches;
    }
  }

  const double n = static_cast<double>(counted);
  rep.slots_counted = counted;
  rep.avg_via = static_cast<double>(rep.via_sum) / n;
  rep.avg_aoiv = static_cast<double>(rep.aoiv_sum) / n;
  rep.avg_aoii = static_cast<double>(rep.aoii_sum) / n;
  rep.empirical_pe = static_cast<double>(rep.error_slots) / n;
  rep.sampling_rate = static_cast<double>(rep.sampled_slots) / n;
  rep.standard_errors = {acc.standard_error(0), acc.standard_error(1), acc.standard_error(2),
                         acc.standard_error(3), acc.standard_error(4)};
  return rep;
}

}  // namespace detail

/// Runs one seeded trajectory from the synced origin (x = x_hat = 0, all
/// ages 0). Equal configs give equal reports.
inline SimulationReport run(const SimulationConfig& cfg) {
  cfg.validate();
  RngHandle rng(cfg.seed, cfg.stream);
  switch (cfg.policy.kind()) {
    case PolicyKind::RandomizedStationary: {
      const double ps = *cfg.policy.p_sample();
      return detail::run_loop(
          cfg, [&](SourceState, SourceState, SourceState) { return rng.bernoulli(ps); }, rng);
    }
    case PolicyKind::ChangeAware:
      return detail::run_loop(
          cfg, [](SourceState now, SourceState prev, SourceState) { return now != prev; }, rng);
    case PolicyKind::SemanticsAware:
      return detail::run_loop(
          cfg, [](SourceState now, SourceState, SourceState x_hat) { return now != x_hat; }, rng);
  }
  return {};
}

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;

  bool contains(double value) const { return ci_low <= value && value <= ci_high; }
};

struct ReplicatedReport {
  std::size_t n_reps = 0;
  MetricSummary via, aoiv, aoii, pe, sampling_rate;
  std::vector<SimulationReport> replications;
};

enum class SeedMode {
  PerReplication,  // seeds derived from the base seed and the replication index
  Identical,       // every replication reuses the base seed
};

inline std::uint64_t replication_seed(std::uint64_t base, std::size_t rep) {
  return mix_seed(base, 0x5eed0000ULL + rep);
}

namespace detail {

template <typename Get>
MetricSummary summarize(const std::vector<SimulationReport>& reps, Get&& get) {
  MetricSummary s;
  const double n = static_cast<double>(reps.size());
  for (const auto& r : reps) s.mean += get(r);
  s.mean /= n;
  double ss = 0.0;
  for (const auto& r : reps) ss += (get(r) - s.mean) * (get(r) - s.mean);
  s.sd = std::sqrt(ss / (n - 1.0));
  const boost::math::normal z;
  const double half = boost::math::quantile(boost::math::complement(z, 0.025)) * s.sd / std::sqrt(n);
  s.ci_low = s.mean - half;
  s.ci_high = s.mean + half;
  return s;
}

}  // namespace detail

/// Independent replications with 95% normal-approximation intervals.
inline ReplicatedReport run_replicated(const SimulationConfig& cfg, std::size_t n_reps,
                                       SeedMode mode = SeedMode::PerReplication) {
  if (n_reps < 2) throw InvalidParameter("need at least two replications");
  ReplicatedReport out;
  out.n_reps = n_reps;
  out.replications.reserve(n_reps);
  for (std::size_t r = 0; r < n_reps; ++r) {
    SimulationConfig one = cfg;
    if (mode == SeedMode::PerReplication) one.seed = replication_seed(cfg.seed, r);
    out.replications.push_back(run(one));
  }
  out.via = detail::summarize(out.replications, [](const auto& r) { return r.avg_via; });
  out.aoiv = detail::summarize(out.replications, [](const auto& r) { return r.avg_aoiv; });
  out.aoii = detail::summarize(out.replications, [](const auto& r) { return r.avg_aoii; });
  out.pe = detail::summarize(out.replications, [](const auto& r) { return r.empirical_pe; });
  out.sampling_rate =
      detail::summarize(out.replications, [](const auto& r) { return r.sampling_rate; });
  return out;
}

}  // namespace via

#endif  // VIA_SIMULATOR_HPP
