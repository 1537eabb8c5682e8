#include <gtest/gtest.h>

#include "support.hpp"
#include "via/analytics.hpp"
#include "via/optimizer.hpp"

using namespace via;

namespace {

OptimizationProblem problem(double p, double q, double ps, double eta, double e_max) {
  return OptimizationProblem(SourceParams(p, q), ChannelParams(ps), 1.0, eta, e_max);
}

}  // namespace

TEST(OptimizationProblem, Construction) {
  EXPECT_THROW(OptimizationProblem(SourceParams(0.3, 0.3), ChannelParams(0.5), 0.1, 0.2, 0.5),
               InvalidParameter);
  EXPECT_THROW(OptimizationProblem(SourceParams(0.3, 0.3), ChannelParams(0.5), 0.0, 0.0, 0.5),
               InvalidParameter);
  EXPECT_THROW(problem(0.3, 0.3, 0.5, 0.5, 0.0), InvalidParameter);
  EXPECT_NEAR(OptimizationProblem(SourceParams(0.3, 0.3), ChannelParams(0.5), 0.1, 0.05, 0.5).eta(),
              0.5, 1e-15);
}

TEST(FeasibleInterval, WorkedCases) {
  const auto a = feasible_interval(problem(0.3, 0.3, 0.8, 0.5, 0.5));
  ASSERT_TRUE(a.has_value());
  EXPECT_NEAR(a->lower, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(a->upper, 0.5);

  const auto b_prob = problem(0.45, 0.45, 0.5, 0.2, 0.1);
  EXPECT_NEAR(detail::error_lower_bound(b_prob), 0.324 / 0.207, 1e-12);
  EXPECT_FALSE(feasible_interval(b_prob).has_value());

  const auto c = feasible_interval(problem(0.7, 0.2, 0.4, 0.6, 1.0));
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->lower, 0.0);
  EXPECT_DOUBLE_EQ(c->upper, 0.6);
}

TEST(FeasibleInterval, LowerBoundIsTheErrorBoundary) {
  via_test::Draws draws(12);
  int checked = 0;
  while (checked < 200) {
    const auto src = draws.source();
    const auto ch = draws.channel();
    const auto prob = OptimizationProblem(src, ch, 1.0, 1.0, draws.open_unit(0.01, 1.0));
    const double lb = detail::error_lower_bound(prob);
    if (!(lb > 0.0 && lb < 1.0)) continue;
    const double pe = analytics::reconstruction_error(PolicySpec::randomized_stationary(lb), src, ch);
    ASSERT_NEAR(pe, prob.e_max, 1e-12);
    ++checked;
  }
}

TEST(FeasibleInterval, NoDeliveryChannel) {
  EXPECT_THROW(feasible_interval(problem(0.3, 0.3, 0.0, 0.5, 0.4)), InvalidParameter);
  EXPECT_TRUE(feasible_interval(problem(0.3, 0.3, 0.0, 0.5, 0.6)).has_value());
  EXPECT_FALSE(solve(problem(0.3, 0.3, 0.0, 0.5, 0.6)).optimal());
}

TEST(Solve, WorkedCases) {
  const auto a = solve(problem(0.3, 0.3, 0.8, 0.5, 0.5));
  ASSERT_TRUE(a.optimal());
  EXPECT_DOUBLE_EQ(*a.p_star, 0.5);
  EXPECT_NEAR(a.achieved_via, 0.45, 1e-15);
  EXPECT_NEAR(a.achieved_pe, 0.108 / 0.456, 1e-15);
  EXPECT_LE(a.achieved_pe, 0.5);
  EXPECT_LE(a.lower_bound, *a.p_star);

  EXPECT_FALSE(solve(problem(0.45, 0.45, 0.5, 0.2, 0.1)).optimal());

  const auto open = solve(problem(0.6, 0.25, 0.7, 1.0, 1.0));
  ASSERT_TRUE(open.optimal());
  EXPECT_DOUBLE_EQ(*open.p_star, 1.0);
}

TEST(Solve, ZeroBudget) {
  EXPECT_FALSE(solve(problem(0.3, 0.3, 0.8, 0.0, 1.0)).optimal());
}

TEST(Solve, AbsorbingSourcePicksCheapest) {
  const auto out = solve(problem(0.0, 0.4, 0.8, 0.5, 0.2));
  ASSERT_TRUE(out.optimal());
  EXPECT_EQ(*out.p_star, 0.0);
  EXPECT_EQ(out.achieved_via, 0.0);
  EXPECT_EQ(out.achieved_cost, 0.0);
}

TEST(Solve, CostScalesWithDelta) {
  const OptimizationProblem prob(SourceParams(0.3, 0.4), ChannelParams(0.9), 0.1, 0.03, 0.8);
  const auto out = solve(prob);
  ASSERT_TRUE(out.optimal());
  EXPECT_NEAR(*out.p_star, 0.3, 1e-15);
  EXPECT_NEAR(out.achieved_cost, 0.03, 1e-15);
}

TEST(VerifyByGrid, WorkedCases) {
  EXPECT_TRUE(verify_by_grid(problem(0.3, 0.3, 0.8, 0.5, 0.5), 1e-4));
  EXPECT_TRUE(verify_by_grid(problem(0.45, 0.45, 0.5, 0.2, 0.1), 1e-4));
  const auto scan = scan_grid(problem(0.5, 0.2, 0.6, 1.0, 1.0), 1e-3);
  EXPECT_DOUBLE_EQ(scan.argmin, 1.0);
  EXPECT_THROW(scan_grid(problem(0.3, 0.3, 0.8, 0.5, 0.5), 0.02), InvalidParameter);
}

TEST(VerifyByGrid, NarrowIntervalBelowResolution) {
  // error cap chosen so the feasible interval is [0.5001, 0.5009]: no point
  // of a 0.01 grid falls inside it
  const SourceParams src(0.4, 0.4);
  const ChannelParams ch(0.9);
  const double e_max =
      analytics::reconstruction_error(PolicySpec::randomized_stationary(0.5001), src, ch);
  const OptimizationProblem prob(src, ch, 1.0, 0.5009, e_max);
  const auto out = solve(prob);
  ASSERT_TRUE(out.optimal());
  EXPECT_NEAR(out.lower_bound, 0.5001, 1e-12);
  EXPECT_FALSE(scan_grid(prob, 1e-2).feasible);
  EXPECT_TRUE(verify_by_grid(prob, 1e-2));
  EXPECT_TRUE(verify_by_grid(prob, 1e-4));
}

TEST(Solve, ConstraintsHoldAtOptimum) {
  via_test::Draws draws(13);
  for (int k = 0; k < 500; ++k) {
    const auto src = draws.source();
    const auto ch = draws.channel();
    const double delta = draws.open_unit(0.01, 1.0);
    const auto prob = OptimizationProblem(src, ch, delta, delta * draws.open_unit(0.0, 1.0),
                                          draws.open_unit(0.01, 1.0));
    const auto out = solve(prob);
    if (!out.optimal()) continue;
    ASSERT_LE(out.achieved_pe, prob.e_max + 1e-12);
    ASSERT_LE(out.achieved_cost, prob.delta_max + 1e-12);
    ASSERT_LE(out.lower_bound, *out.p_star);
  }
}
