#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "crvr/errors.hpp"
#include "crvr/stackelberg.hpp"
#include "crvr/verification.hpp"

namespace crvr {
namespace {

FollowerInput worked_input() {
  FollowerInput in;
  in.ctx.view_pref = 0.4;
  in.ctx.popularity = 1.0;
  in.ctx.size = 0.5;
  in.ctx.requested_before = false;
  in.ctx.requested_by = 4;
  in.ctx.newcomers = 2;
  in.ctx.anchor = 21;
  in.ctx.ec_fraction = 0.0;
  in.ctx.params.gamma = 0.1;
  in.ctx.params.beta = 0.1;
  in.ctx.params.eps_u = 1.0;
  return in;
}

// Maximizer over y in [0,1] of c(d p (1-e) - beta eps) y + gamma ln(P - y N) by dense scan.
double relaxed_argmax_oracle(const UdContext& c) {
  const double n = c.anchor - c.requested_by;
  const double big_p = n - c.newcomers;
  const double big_n = n - c.requested_by - 2.0 * c.newcomers;
  const double slope =
      c.size * (c.view_pref * c.popularity * (1.0 - c.ec_fraction) - c.params.beta * c.params.eps_u);
  double best_y = 0.0;
  double best = -INFINITY;
  for (int k = 0; k <= 100000; ++k) {
    const double y = k / 100000.0;
    const double inner = big_p - y * big_n;
    if (inner <= 0) continue;
    const double f = slope * y + c.params.gamma * std::log(inner);
    if (f > best + 1e-15) {
      best = f;
      best_y = y;
    }
  }
  return best_y;
}

TEST(Omega, WorkedValueMatchesNumericMaximizer) {
  const auto in = worked_input();
  const auto w = omega(in);
  ASSERT_TRUE(w.has_value());
  EXPECT_NEAR(*w, -2.0 / 3.0 + 15.0 / 9.0, 1e-12);
  EXPECT_NEAR(*w, 1.0, 1e-12);
  EXPECT_NEAR(relaxed_argmax_oracle(in.ctx), 1.0, 1e-4);
  EXPECT_NEAR(relaxed_response(in), 1.0, 1e-12);
  EXPECT_EQ(follower_best_response(in), 1);
  EXPECT_EQ(follower_best_response(in, FollowerRule::kRoundedRelaxed), 1);
}

TEST(Omega, FreshVideoWithoutPrivacyWeight) {
  auto in = worked_input();
  in.ctx.params.gamma = 0.0;
  in.ctx.requested_by = 0;
  in.ctx.newcomers = 0;
  const auto w = omega(in);
  ASSERT_TRUE(w.has_value());
  EXPECT_DOUBLE_EQ(*w, 1.0);
}

TEST(Omega, SingularDenominator) {
  auto in = worked_input();
  in.ctx.view_pref = 0.1;  // d p (1-e) = beta eps_u
  EXPECT_FALSE(omega(in).has_value());
  // Endpoint comparison: no net benefit and a positive privacy cost, so no request.
  EXPECT_EQ(follower_best_response(in, FollowerRule::kRoundedRelaxed), 0);
}

TEST(Omega, AnchorViolation) {
  auto in = worked_input();
  in.ctx.anchor = 12;
  EXPECT_THROW(omega(in), DomainError);
}

TEST(RelaxedResponse, MatchesNumericMaximizerOnRandomContexts) {
  std::mt19937_64 rng(8);
  int interior = 0;
  for (int k = 0; k < 300; ++k) {
    FollowerInput in;
    in.ctx = random_admissible_context(rng);
    in.ctx.requested_before = false;
    const double oracle = relaxed_argmax_oracle(in.ctx);
    ASSERT_NEAR(relaxed_response(in), oracle, 2e-4) << "sample " << k;
    interior += oracle > 1e-3 && oracle < 1 - 1e-3;
  }
  EXPECT_GT(interior, 0);
}

TEST(FollowerBestResponse, GenuineAlwaysRequested) {
  auto in = worked_input();
  in.genuine = true;
  in.ctx.view_pref = 0.0;
  in.ctx.params.gamma = 50.0;
  EXPECT_EQ(follower_best_response(in), 1);
  EXPECT_EQ(follower_best_response(in, FollowerRule::kRoundedRelaxed), 1);
}

TEST(FollowerBestResponse, RepeatRequestComparesBenefitAndCost) {
  auto in = worked_input();
  in.ctx.requested_before = true;
  EXPECT_EQ(follower_best_response(in), 1);  // 0.4 > 0.1
  in.ctx.view_pref = 0.1;                   // tie
  EXPECT_EQ(follower_best_response(in), 0);
  EXPECT_EQ(follower_best_response(in, FollowerRule::kRoundedRelaxed), 0);
}

TEST(FollowerBestResponse, MatchesBinaryArgmax) {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 2000; ++k) {
    FollowerInput in;
    in.ctx = random_admissible_context(rng);
    const double u1 = ud_utility(in.ctx, true);
    const double u0 = ud_utility(in.ctx, false);
    ASSERT_EQ(follower_best_response(in), u1 > u0 ? 1 : 0) << "sample " << k;
  }
}

// Grid argmax of the EC's per-video utility.
double leader_grid_oracle(double s, double c, double beta_e, double eps_e) {
  GameParams p;
  p.beta_e = beta_e;
  p.eps_e = eps_e;
  double best_e = 0.0;
  double best = -INFINITY;
  for (int k = 0; k <= 10000; ++k) {
    const double e = k * 1e-4;
    const double u = s * std::log1p(e * c) - beta_e * e * c * eps_e;
    if (u > best) {
      best = u;
      best_e = e;
    }
  }
  return best_e;
}

TEST(LeaderBestResponse, WorkedValues) {
  EXPECT_EQ(leader_best_response(0.0, 0.5, 0.1, 1.0), 0.0);
  EXPECT_NEAR(leader_best_response(0.125, 0.5, 0.1, 1.0), 0.5, 1e-12);
  EXPECT_NEAR(leader_grid_oracle(0.125, 0.5, 0.1, 1.0), 0.5, 1e-3);
  EXPECT_EQ(leader_best_response(10.0, 0.5, 0.1, 1.0), 1.0);
  EXPECT_EQ(leader_grid_oracle(10.0, 0.5, 0.1, 1.0), 1.0);
}

TEST(LeaderBestResponse, GridOracleContinuityAndMonotonicity) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double c = 0.05 + 0.95 * unit(rng);
    const double be = 0.01 + unit(rng);
    const double ee = 0.1 + 2.0 * unit(rng);
    const double s = 3.0 * be * ee * (1 + c) * unit(rng);
    ASSERT_NEAR(leader_best_response(s, c, be, ee), leader_grid_oracle(s, c, be, ee), 1e-3);
    const double theta = be * ee;
    for (double kink : {theta, theta * (1 + c)}) {
      const double lo = leader_best_response(std::nextafter(kink, 0.0), c, be, ee);
      const double hi = leader_best_response(std::nextafter(kink, 1e9), c, be, ee);
      ASSERT_LE(std::abs(hi - lo), 1e-6);
    }
    ASSERT_LE(leader_best_response(s, c, be, ee), leader_best_response(s + 0.01, c, be, ee));
  }
}

GameInstance degenerate_instance() {
  GameInstance g;
  g.num_users = 3;
  g.num_videos = 2;
  g.sizes = {1.0, 0.5};
  g.popularity = {0.0, 0.0};
  g.genuine = {1, 0, 0, 1, 0, 0};
  g.requested_before = {0, 0, 0, 0, 0, 0};
  g.view_pref = {0, 0, 0, 0, 0, 0};
  g.params.gamma = 0.0;
  return g;
}

TEST(Equilibrium, DegenerateIncentivesGiveGenuineOnly) {
  const auto g = degenerate_instance();
  const auto solved = solve_equilibrium(g);
  ASSERT_TRUE(solved.strategy.has_value());
  EXPECT_EQ(solved.strategy->actions, g.genuine);
  EXPECT_DOUBLE_EQ(solved.strategy->ec[0], leader_best_response(1.0, 1.0, 0.1, 1.0));
  EXPECT_DOUBLE_EQ(solved.strategy->ec[1], leader_best_response(1.0, 0.5, 0.1, 1.0));
  const auto report = verify_equilibrium_bruteforce(g);
  EXPECT_TRUE(report.passed) << report.diagnostic;
  EXPECT_LE(report.leader_gap, 1e-6);
}

TEST(Equilibrium, RandomInstanceSeedThree) {
  const auto g = random_instance(3, 3, 4);
  ASSERT_LE(g.num_users, 3);
  ASSERT_LE(g.num_videos, 4);
  const auto report = verify_equilibrium_bruteforce(g);
  EXPECT_TRUE(report.passed) << report.diagnostic;
  EXPECT_LE(report.leader_gap, 1e-6);
}

TEST(Equilibrium, MutatedLeaderCostIsDetected) {
  GameInstance g = degenerate_instance();
  g.genuine = {1, 0, 1, 0, 0, 0};  // video 0 requested twice: e = 1/3 at beta_e = 1.5
  g.params.beta_e = 1.5;
  const auto solved = solve_equilibrium(g);
  ASSERT_TRUE(solved.strategy.has_value());
  ASSERT_NEAR(solved.strategy->ec[0], 1.0 / 3.0, 1e-12);
  ASSERT_TRUE(verify_equilibrium(g, *solved.strategy).passed);
  g.params.beta_e = 0.05;
  const auto report = verify_equilibrium(g, *solved.strategy);
  EXPECT_FALSE(report.passed);
  EXPECT_GT(report.leader_gap, 1e-6);
}

TEST(Equilibrium, PerturbedFollowerIsDetected) {
  GameInstance g = degenerate_instance();
  g.view_pref = {0.9, 0.9, 0.9, 0.9, 0.9, 0.9};
  g.popularity = {3.0, 3.0};
  g.genuine = {1, 1, 1, 1, 1, 1};
  auto solved = solve_equilibrium(g);
  ASSERT_TRUE(solved.strategy.has_value());
  auto strategy = *solved.strategy;
  g.genuine = {0, 1, 1, 1, 1, 1};
  g.params.beta = 10.0;  // requesting video 0 now costs user 0 more than it gains
  const auto report = verify_equilibrium(g, strategy);
  EXPECT_FALSE(report.passed);
  ASSERT_FALSE(report.follower_violations.empty());
  EXPECT_EQ(report.follower_violations.front().user, 0);
  std::ostringstream csv;
  write_report_csv(csv, report);
  EXPECT_NE(csv.str().find("kind,user,video,action,gain"), std::string::npos);
}

// Two users, one fresh video nobody watches: prefetching pays off only when the
// edge does not cache, and any positive demand makes the edge cache it fully.
TEST(Equilibrium, NoConsistentPairWhenEdgeCachingRemovesDemand) {
  GameInstance g;
  g.num_users = 2;
  g.num_videos = 1;
  g.sizes = {1.0};
  g.popularity = {1.0};
  g.genuine = {0, 0};
  g.requested_before = {0, 0};
  g.view_pref = {1.0, 1.0};
  // e = 0: gain 0.9 beats the disclosure cost 0.1 ln 5, so both request.
  const auto at_zero = follower_fixed_point(g, 0, 0.0, 0);
  ASSERT_TRUE(at_zero.has_value());
  EXPECT_EQ(*at_zero, (std::vector<std::uint8_t>{1, 1}));
  // Any demand of at least beta_e eps_e (1 + c) = 0.2 gives e = 1, where nobody requests.
  EXPECT_EQ(leader_best_response(1.0, 1.0, 0.1, 1.0), 1.0);
  const auto at_one = follower_fixed_point(g, 0, 1.0, 0);
  ASSERT_TRUE(at_one.has_value());
  EXPECT_EQ(*at_one, (std::vector<std::uint8_t>{0, 0}));

  const auto solved = solve_equilibrium(g);
  EXPECT_FALSE(solved.strategy.has_value());
  EXPECT_EQ(solved.unresolved_videos, std::vector<int>{0});
  const auto report = verify_equilibrium_bruteforce(g);
  EXPECT_FALSE(report.passed);
  EXPECT_FALSE(report.solved);
  EXPECT_NE(report.diagnostic.find("video 0"), std::string::npos);
}

TEST(FixedPoint, NewcomerConventionSensitivity) {
  GameInstance g;
  g.num_users = 4;
  g.num_videos = 1;
  g.sizes = {1.0};
  g.popularity = {1.0};
  g.genuine = {0, 0, 0, 0};
  g.requested_before = {0, 0, 0, 0};
  g.view_pref = {0.25, 0.25, 0.25, 0.25};
  g.params.gamma = 0.1;
  int differing = 0;
  for (double e : {0.0, 0.25, 0.5}) {
    const auto ex = follower_fixed_point(g, 0, e, 0, FollowerRule::kExactBinary, NewcomerConvention::kExcludeSelf);
    const auto in = follower_fixed_point(g, 0, e, 0, FollowerRule::kExactBinary, NewcomerConvention::kIncludeSelf);
    ASSERT_TRUE(ex.has_value());
    if (!in.has_value() || *in != *ex) ++differing;
  }
  // Recorded, not asserted in direction: the two readings of the newcomer count
  // agree whenever requesting is clearly dominated or clearly dominant.
  SUCCEED() << differing << " of 3 EC levels differ between newcomer conventions";
}

TEST(StandardFunction, SmallExamples) {
  auto in = worked_input();
  in.ctx.newcomers = 0;
  const double w0 = *omega(in);
  in.ctx.newcomers = 1;
  const double w1 = *omega(in);
  EXPECT_GE(w1, w0);
  const auto report = check_standard_function(1000, 11);
  EXPECT_EQ(report.samples, 1000);
  EXPECT_TRUE(report.passed()) << (report.failures.empty() ? "" : report.failures.front());
}

}  // namespace
}  // namespace crvr
