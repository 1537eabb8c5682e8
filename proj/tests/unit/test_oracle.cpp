#include <gtest/gtest.h>

#include "support.hpp"
#include "via/analytics.hpp"
#include "via/oracle.hpp"

using namespace via;
namespace an = via::analytics;
namespace orc = via::oracle;

namespace {

const SourceParams kSym(0.3, 0.3);
const ChannelParams kCh(0.8);

}  // namespace

TEST(ViaChain, RowStochastic) {
  const auto chain = orc::build_via_chain(kSym, kCh, 0.5, 200);
  EXPECT_EQ(chain.size(), 402u);
  EXPECT_TRUE(chain.row_stochastic(1e-14));
  EXPECT_FALSE(chain.truncation_note.empty());
}

TEST(ViaChain, StationaryMatchesClosedForm) {
  const auto chain = orc::build_via_chain(kSym, kCh, 0.5, 200);
  const auto pi = orc::stationary(chain);
  const auto law = an::via_stationary_rs(kSym, kCh, 0.5, 50);
  for (int i = 0; i <= 50; ++i) {
    ASSERT_NEAR(pi[chain.index({0, i})], law.pi0[static_cast<std::size_t>(i)], 1e-9) << i;
    ASSERT_NEAR(pi[chain.index({1, i})], law.pi1[static_cast<std::size_t>(i)], 1e-9) << i;
  }
  EXPECT_NEAR(orc::expectation(chain, pi, 1), 0.45, 1e-9);
}

TEST(ViaChain, PerfectDeliveryPinsLevelZero) {
  const auto chain = orc::build_via_chain(SourceParams(0.2, 0.5), ChannelParams(1.0), 1.0, 10);
  const auto pi = orc::stationary(chain);
  const double at_zero = orc::mass_where(chain, pi, [](const orc::Label& l) { return l[1] == 0; });
  EXPECT_NEAR(at_zero, 1.0, 1e-13);
}

TEST(JointViaChain, MatchesTwoDimChainForRs) {
  const auto rs = PolicySpec::randomized_stationary(0.35);
  const SourceParams src(0.15, 0.4);
  const ChannelParams ch(0.7);
  const auto joint = orc::build_joint_via_chain(rs, src, ch, 150);
  const auto pi = orc::stationary(joint);
  const auto via_marg = orc::marginal(joint, pi, 2);
  const auto law = an::via_stationary_rs(src, ch, 0.35, 40);
  for (std::size_t i = 0; i <= 40; ++i) ASSERT_NEAR(via_marg[i], law.marginal(i), 1e-9);
}

TEST(JointViaChain, ChangeAwareMatchesClosedForm) {
  const SourceParams src(0.25, 0.45);
  const ChannelParams ch(0.6);
  const auto joint = orc::build_joint_via_chain(PolicySpec::change_aware(), src, ch, 120);
  const auto pi = orc::stationary(joint);
  const auto law = an::via_stationary_ca(src, ch, 40);
  for (int i = 0; i <= 40; ++i) {
    const double x0 = orc::mass_where(joint, pi, [&](const orc::Label& l) { return l[0] == 0 && l[2] == i; });
    const double x1 = orc::mass_where(joint, pi, [&](const orc::Label& l) { return l[0] == 1 && l[2] == i; });
    ASSERT_NEAR(x0, law.pi0[static_cast<std::size_t>(i)], 1e-9) << i;
    ASSERT_NEAR(x1, law.pi1[static_cast<std::size_t>(i)], 1e-9) << i;
  }
  EXPECT_NEAR(orc::expectation(joint, pi, 2), an::avg_via(PolicySpec::change_aware(), src, ch), 1e-9);
}

TEST(AoivChain, MatchesTables) {
  const std::pair<PolicySpec, ChannelParams> cases[] = {
      {PolicySpec::randomized_stationary(0.5), kCh},
      {PolicySpec::semantics_aware(), kCh},
      {PolicySpec::change_aware(), kCh},
      {PolicySpec::change_aware(), ChannelParams(0.3)},
  };
  for (const auto& [policy, ch] : cases) {
    const auto chain = orc::build_aoiv_chain(policy, kSym, ch);
    ASSERT_EQ(chain.size(), 4u);
    ASSERT_TRUE(chain.row_stochastic());
    const auto pi = orc::stationary(chain);
    const auto table = an::aoiv_stationary(policy, kSym, ch);
    for (std::size_t s = 0; s < chain.size(); ++s) {
      const auto& l = chain.states[s];
      EXPECT_NEAR(pi[s], table.at(l[0], l[1], l[2]), 1e-12) << to_string(policy.kind());
    }
  }
}

TEST(AoivChain, HandEdgesAgreeWithSlotRules) {
  via_test::Draws draws(8);
  for (int k = 0; k < 50; ++k) {
    const auto src = draws.source();
    const auto ch = draws.channel();
    for (const auto& policy : {PolicySpec::randomized_stationary(draws.open_unit()),
                               PolicySpec::change_aware(), PolicySpec::semantics_aware()}) {
      const auto hand = orc::build_aoiv_chain(policy, src, ch);
      const auto gen = orc::build_joint_via_chain(policy, src, ch, 2);
      const auto pi_h = orc::stationary(hand);
      const auto pi_g = orc::stationary(gen);
      for (std::size_t s = 0; s < hand.size(); ++s) {
        const auto& l = hand.states[s];
        const double m = orc::mass_where(gen, pi_g, [&](const orc::Label& g) {
          return g[0] == l[0] && g[1] == l[1];
        });
        ASSERT_NEAR(pi_h[s], m, 1e-12);
      }
    }
  }
}

TEST(ReconChain, MatchesClosedForm) {
  for (double ps : {0.5, 1.0}) {
    const auto chain = orc::build_recon_chain(kSym, kCh, ps);
    const auto pi = orc::stationary(chain);
    const auto table = an::joint_recon_stationary_rs(kSym, kCh, ps);
    for (std::size_t s = 0; s < 4; ++s) {
      const auto& l = chain.states[s];
      EXPECT_NEAR(pi[s], table.at(l[0], l[1]), 1e-12);
    }
  }
  const auto perfect = orc::build_recon_chain(kSym, ChannelParams(1.0), 1.0);
  const auto pi = orc::stationary(perfect);
  EXPECT_NEAR(pi[perfect.index({0, 1})], 0.0, 1e-15);
  EXPECT_NEAR(pi[perfect.index({1, 0})], 0.0, 1e-15);
  EXPECT_NEAR(pi[perfect.index({0, 0})], pi[perfect.index({1, 1})], 1e-15);
}

TEST(ReconChain, GeneratedEqualsHandWritten) {
  const SourceParams src(0.15, 0.65);
  const ChannelParams ch(0.45);
  const auto hand = orc::build_recon_chain(src, ch, 0.7);
  const auto gen = orc::build_recon_chain(PolicySpec::randomized_stationary(0.7), src, ch);
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t t = 0; t < 4; ++t) {
      const auto i = static_cast<int>(gen.index(hand.states[s]));
      const auto j = static_cast<int>(gen.index(hand.states[t]));
      EXPECT_NEAR(hand.matrix.coeff(static_cast<int>(s), static_cast<int>(t)), gen.matrix.coeff(i, j), 1e-15);
    }
  }
}

TEST(AoiiChain, MatchesClosedFormLaw) {
  for (const auto& policy : {PolicySpec::randomized_stationary(0.5), PolicySpec::change_aware(),
                             PolicySpec::semantics_aware()}) {
    const SourceParams src(0.2, 0.35);
    const ChannelParams ch(0.55);
    const auto chain = orc::build_aoii_chain(policy, src, ch, 300);
    const auto pi = orc::stationary(chain);
    const auto marg = orc::marginal(chain, pi, 2);
    const auto law = an::aoii_distribution(policy, src, ch, 60);
    for (std::size_t i = 0; i <= 60; ++i) ASSERT_NEAR(marg[i], law.pmf[i], 1e-9) << i;
    EXPECT_NEAR(orc::expectation(chain, pi, 2), an::avg_aoii(policy, src, ch), 1e-9);
  }
}

TEST(Stationary, IdentityIsReducible) {
  orc::ChainBuilder b;
  b.edge({0}, {0}, 1.0);
  b.edge({1}, {1}, 1.0);
  b.edge({2}, {2}, 1.0);
  const auto chain = std::move(b).build();
  EXPECT_EQ(orc::closed_class_count(chain), 3u);
  EXPECT_THROW(orc::stationary(chain), ReducibleChain);
}

TEST(Stationary, TransientStatesAllowed) {
  orc::ChainBuilder b;
  b.edge({0}, {1}, 1.0);
  b.edge({1}, {2}, 0.5);
  b.edge({1}, {1}, 0.5);
  b.edge({2}, {1}, 1.0);
  const auto chain = std::move(b).build();
  EXPECT_EQ(orc::closed_class_count(chain), 1u);
  const auto pi = orc::stationary(chain);
  EXPECT_NEAR(pi[0], 0.0, 1e-15);
  EXPECT_NEAR(pi[1], 2.0 / 3.0, 1e-15);
}

TEST(Stationary, TwoStateSource) {
  orc::ChainBuilder b;
  b.edge({0}, {0}, 0.9);
  b.edge({0}, {1}, 0.1);
  b.edge({1}, {0}, 0.4);
  b.edge({1}, {1}, 0.6);
  const auto chain = std::move(b).build();
  const auto pi = orc::stationary(chain);
  EXPECT_NEAR(pi[0], 0.8, 1e-15);
  EXPECT_NEAR(pi[1], 0.2, 1e-15);
}

TEST(Stationary, RejectsNonStochastic) {
  orc::ChainBuilder b;
  b.edge({0}, {0}, 0.5);
  b.edge({0}, {1}, 0.4);
  b.edge({1}, {0}, 1.0);
  EXPECT_THROW(orc::stationary(std::move(b).build()), InvalidParameter);
}

TEST(Stationary, ResidualBoundOnBuiltChains) {
  via_test::Draws draws(9);
  for (int k = 0; k < 10; ++k) {
    const auto src = draws.source();
    const auto ch = draws.channel();
    const auto chain = orc::build_aoii_chain(PolicySpec::semantics_aware(), src, ch, 100);
    const auto pi = orc::stationary(chain);
    const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(pi.data(), static_cast<Eigen::Index>(pi.size()));
    EXPECT_LT(orc::stationary_residual(chain, v), 1e-12);
  }
}

TEST(OracleSamplingRate, MatchesClosedForms) {
  via_test::Draws draws(10);
  for (int k = 0; k < 200; ++k) {
    const auto src = draws.source();
    const auto ch = draws.channel();
    for (const auto& policy : {PolicySpec::randomized_stationary(draws.open_unit()),
                               PolicySpec::change_aware(), PolicySpec::semantics_aware()}) {
      ASSERT_NEAR(orc::sampling_rate(policy, src, ch), sampling_rate(policy, src, ch), 1e-12);
    }
  }
}
