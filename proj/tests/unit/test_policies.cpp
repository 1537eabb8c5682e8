#include <gtest/gtest.h>

#include "support.hpp"
#include "via/policies.hpp"
#include "via/simulator.hpp"

using namespace via;

TEST(PolicySpec, Factories) {
  const auto rs = PolicySpec::randomized_stationary(0.25);
  EXPECT_EQ(rs.kind(), PolicyKind::RandomizedStationary);
  EXPECT_DOUBLE_EQ(rs.sample_probability(), 0.25);
  EXPECT_FALSE(PolicySpec::change_aware().p_sample().has_value());
  EXPECT_THROW(PolicySpec::semantics_aware().sample_probability(), UnsupportedPolicy);
  EXPECT_THROW(PolicySpec::randomized_stationary(1.2), InvalidParameter);
}

TEST(PolicySpec, ParseNames) {
  EXPECT_EQ(parse_policy_kind("rs"), PolicyKind::RandomizedStationary);
  EXPECT_EQ(parse_policy_kind("change_aware"), PolicyKind::ChangeAware);
  EXPECT_EQ(parse_policy_kind("sa"), PolicyKind::SemanticsAware);
  EXPECT_FALSE(parse_policy_kind("greedy").has_value());
  for (auto k : {PolicyKind::RandomizedStationary, PolicyKind::ChangeAware,
                 PolicyKind::SemanticsAware}) {
    EXPECT_EQ(parse_policy_kind(to_string(k)), k);
  }
}

TEST(Decide, DeterministicPolicies) {
  via_test::ScriptedRng none;
  const auto ca = PolicySpec::change_aware();
  const auto sa = PolicySpec::semantics_aware();
  EXPECT_FALSE(decide(ca, 1, 1, 0, none));
  EXPECT_TRUE(decide(ca, 1, 0, 1, none));
  EXPECT_TRUE(decide(sa, 1, 1, 0, none));
  EXPECT_FALSE(decide(sa, 0, 1, 0, none));
  EXPECT_EQ(none.draws, 0u);
}

TEST(Decide, RandomizedRate) {
  RngHandle rng(9);
  const auto rs = PolicySpec::randomized_stationary(0.5);
  std::uint64_t hits = 0;
  const std::uint64_t n = 10'000'000;
  for (std::uint64_t i = 0; i < n; ++i) hits += decide(rs, 0, 0, 0, rng);
  EXPECT_NEAR(static_cast<double>(hits) / n, 0.5, 0.001);
}

TEST(SamplingRate, ClosedForms) {
  const SourceParams src(0.3, 0.3);
  const ChannelParams ch(0.8);
  EXPECT_DOUBLE_EQ(sampling_rate(PolicySpec::randomized_stationary(0.5), src, ch), 0.5);
  EXPECT_NEAR(sampling_rate(PolicySpec::change_aware(), src, ch), 0.3, 1e-15);
  // 0.18 / (0.6 * 0.92)
  EXPECT_NEAR(sampling_rate(PolicySpec::semantics_aware(), src, ch), 0.18 / 0.552, 1e-15);
}

TEST(SamplingRate, MatchesSimulatedCounts) {
  const SourceParams src(0.3, 0.3);
  const ChannelParams ch(0.8);
  for (const auto& policy : {PolicySpec::change_aware(), PolicySpec::semantics_aware()}) {
    SimulationConfig cfg{src, ch, policy};
    cfg.horizon = 10'000'000;
    cfg.seed = 77;
    const auto rep = run(cfg);
    const double expected = sampling_rate(policy, src, ch);
    EXPECT_LT(via_test::rel_diff(rep.sampling_rate, expected), 0.01) << to_string(policy.kind());
  }
}

TEST(AdvanceSlotPolicy, OverloadMatchesCallable) {
  const SourceParams src(0.4, 0.2);
  const ChannelParams ch(0.6);
  const auto rs = PolicySpec::randomized_stationary(0.3);
  RngHandle a(5), b(5);
  SlotState sa, sb;
  for (int t = 0; t < 10000; ++t) {
    sa = advance_slot(src, ch, rs, sa, a);
    sb = advance_slot(src, ch, [&](SourceState, SourceState, SourceState) { return b.bernoulli(0.3); },
                      sb, b);
    ASSERT_EQ(sa, sb);
  }
}
