#include <gtest/gtest.h>

#include "support.hpp"
#include "via/analytics.hpp"
#include "via/simulator.hpp"

using namespace via;
namespace an = via::analytics;

namespace {

SimulationConfig make(PolicySpec policy, double p = 0.3, double q = 0.3, double ps = 0.8,
                      std::uint64_t horizon = 2'000'000, std::uint64_t seed = 1) {
  SimulationConfig cfg{SourceParams(p, q), ChannelParams(ps), policy};
  cfg.horizon = horizon;
  cfg.seed = seed;
  return cfg;
}

void expect_close(double sim, double se, double target, const char* what) {
  const double tol = std::max(0.01 * std::abs(target), 3.0 * se);
  EXPECT_NEAR(sim, target, tol) << what << " se=" << se;
}

}  // namespace

TEST(SimulationConfig, Validation) {
  auto cfg = make(PolicySpec::change_aware());
  cfg.burn_in = cfg.horizon;
  EXPECT_THROW(cfg.validate(), InvalidParameter);
  cfg.burn_in = 0;
  cfg.histogram_cap = 0;
  EXPECT_THROW(cfg.validate(), InvalidParameter);
  cfg.histogram_cap = 8;
  cfg.horizon = 0;
  EXPECT_THROW(cfg.validate(), InvalidParameter);
}

TEST(Run, RandomizedWorkedValues) {
  const auto rep = run(make(PolicySpec::randomized_stationary(0.5), 0.3, 0.3, 0.8, 10'000'000));
  const auto& se = rep.standard_errors;
  expect_close(rep.avg_via, se.via, 0.45, "via");
  expect_close(rep.avg_aoiv, se.aoiv, 0.108 / 0.456, "aoiv");
  expect_close(rep.avg_aoii, se.aoii, 0.06264 / 0.1533984, "aoii");
  EXPECT_NEAR(rep.sampling_rate, 0.5, 0.001);
}

TEST(Run, ChangeAwareWorkedValues) {
  const auto rep = run(make(PolicySpec::change_aware(), 0.3, 0.3, 0.8, 10'000'000));
  const auto& se = rep.standard_errors;
  expect_close(rep.avg_aoiv, se.aoiv, 1.0 / 6.0, "aoiv");
  expect_close(rep.avg_via, se.via, 0.25, "via");
  expect_close(rep.sampling_rate, se.sampling_rate, 0.3, "rate");
}

TEST(Run, FrozenSourceStaysSynced) {
  for (const auto& policy : {PolicySpec::randomized_stationary(0.5), PolicySpec::change_aware(),
                             PolicySpec::semantics_aware()}) {
    const auto rep = run(make(policy, 0.0, 0.0, 0.5, 50'000));
    EXPECT_EQ(rep.avg_via, 0.0);
    EXPECT_EQ(rep.avg_aoiv, 0.0);
    EXPECT_EQ(rep.avg_aoii, 0.0);
    EXPECT_EQ(rep.empirical_pe, 0.0);
  }
}

TEST(Run, AoivEqualsErrorIndicatorEverySlot) {
  const auto rep = run(make(PolicySpec::semantics_aware(), 0.6, 0.2, 0.4, 500'000));
  EXPECT_EQ(rep.aoiv_sum, rep.error_slots);
  EXPECT_EQ(rep.avg_aoiv, rep.empirical_pe);
  EXPECT_EQ(rep.aoii_hist[0], rep.slots_counted - rep.error_slots);
}

TEST(Run, Determinism) {
  const auto cfg = make(PolicySpec::randomized_stationary(0.4), 0.2, 0.5, 0.6, 300'000, 99);
  EXPECT_EQ(run(cfg), run(cfg));
  auto other = cfg;
  other.seed = 100;
  EXPECT_NE(run(cfg).via_sum, run(other).via_sum);
}

TEST(Run, HistogramsCoverCountedSlots) {
  auto cfg = make(PolicySpec::randomized_stationary(0.1), 0.5, 0.5, 0.3, 200'000);
  cfg.histogram_cap = 4;
  const auto rep = run(cfg);
  ASSERT_EQ(rep.via_hist.size(), 5u);
  std::uint64_t total = 0;
  for (auto c : rep.via_hist) total += c;
  EXPECT_EQ(total, rep.slots_counted);
  EXPECT_GT(rep.via_hist[4], 0u);
  EXPECT_EQ(rep.slots_counted, cfg.horizon - cfg.burn_in);
  EXPECT_LE(rep.delivered_slots, rep.sampled_slots);
}

TEST(Run, SemanticsAwareMatchesClosedForms) {
  const auto policy = PolicySpec::semantics_aware();
  const auto rep = run(make(policy, 0.3, 0.3, 0.8, 10'000'000, 4));
  const SourceParams src(0.3, 0.3);
  const ChannelParams ch(0.8);
  expect_close(rep.avg_aoiv, rep.standard_errors.aoiv, an::avg_aoiv(policy, src, ch), "aoiv");
  expect_close(rep.avg_aoii, rep.standard_errors.aoii, an::avg_aoii(policy, src, ch), "aoii");
}

TEST(Pmf, FoldAndTotalVariation) {
  const std::vector<double> pmf = {0.5, 0.25, 0.125, 0.0625};
  const auto folded = fold_pmf(pmf, 2);
  ASSERT_EQ(folded.size(), 3u);
  EXPECT_DOUBLE_EQ(folded[2], 0.25);
  const std::vector<std::uint64_t> hist = {50, 25, 25};
  const auto emp = empirical_pmf(hist);
  EXPECT_DOUBLE_EQ(total_variation(emp, folded), 0.0);
  const std::vector<double> other = {0.0, 0.0, 1.0};
  EXPECT_DOUBLE_EQ(total_variation(emp, other), 0.75);
}

TEST(Replicated, IdenticalSeedsHaveZeroSpread) {
  const auto rep = run_replicated(make(PolicySpec::change_aware(), 0.3, 0.3, 0.8, 100'000), 2,
                                  SeedMode::Identical);
  EXPECT_EQ(rep.via.sd, 0.0);
  EXPECT_EQ(rep.aoii.sd, 0.0);
  EXPECT_EQ(rep.replications[0], rep.replications[1]);
}

TEST(Replicated, IntervalCoverage) {
  // normal intervals from 10 replications cover about 92% of the time;
  // fewer than 33 hits out of 40 has probability about 0.014
  int hits = 0;
  for (std::uint64_t base = 0; base < 40; ++base) {
    const auto rs = run_replicated(
        make(PolicySpec::randomized_stationary(0.5), 0.3, 0.3, 0.8, 200'000, 1000 + base), 10);
    hits += rs.via.contains(0.45);
  }
  EXPECT_GE(hits, 33);
}

TEST(Replicated, SemanticsAwareInterval) {
  const auto sa = run_replicated(make(PolicySpec::semantics_aware(), 0.3, 0.3, 0.8, 1'000'000, 2025),
                                 10);
  EXPECT_TRUE(sa.aoiv.contains(0.036 / 0.552)) << sa.aoiv.ci_low << " " << sa.aoiv.ci_high;
  EXPECT_GT(sa.aoiv.sd, 0.0);
  EXPECT_THROW(run_replicated(make(PolicySpec::change_aware()), 1), InvalidParameter);
}
