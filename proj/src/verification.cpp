#include "crvr/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crvr/constants.hpp"

namespace crvr {

UdContext random_admissible_context(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  UdContext c;
  c.params.gamma = unit(rng);
  c.params.beta = 0.01 + unit(rng);
  c.params.eps_u = 0.1 + 2.0 * unit(rng);
  const int users = uniform_int(2, 100);
  c.anchor = 2 * users + 1;
  c.requested_before = unit(rng) < 0.3;
  c.requested_by = uniform_int(c.requested_before ? 1 : 0, users - 1);
  // K > 2(m + dn + 1) keeps the UD's own first request admissible.
  const int room = users - 1 - static_cast<int>(c.requested_by);
  c.newcomers = uniform_int(0, std::max(0, room));
  c.size = 1.0 - unit(rng);
  c.ec_fraction = unit(rng) < 0.2 ? std::round(unit(rng)) : unit(rng);
  c.view_pref = unit(rng) < 0.2 ? 0.0 : unit(rng);
  c.popularity = 10.0 * unit(rng);
  return c;
}

EquilibriumSuite run_equilibrium_suite(int n, std::uint64_t seed, double tol) {
  EquilibriumSuite s;
  for (int k = 0; k < n; ++k) {
    const auto game = random_instance(seed + static_cast<std::uint64_t>(k));
    const auto report = verify_equilibrium_bruteforce(game, tol);
    ++s.instances;
    s.max_leader_gap = std::max(s.max_leader_gap, report.leader_gap);
    if (report.passed) {
      ++s.passed;
      continue;
    }
    s.failing_seeds.push_back(seed + static_cast<std::uint64_t>(k));
    if (!report.solved) ++s.unsolved;
    else ++s.with_violations;
  }
  return s;
}

MismatchSuite run_follower_argmax_suite(int n, std::uint64_t seed) {
  MismatchSuite s;
  std::mt19937_64 rng(seed);
  for (int k = 0; k < n; ++k) {
    const UdContext c = random_admissible_context(rng);
    const int expected = ud_utility(c, true) > ud_utility(c, false) ? 1 : 0;
    ++s.samples;
    if (follower_best_response({c, false}) != expected) ++s.mismatches;
  }
  return s;
}

MismatchSuite run_uniqueness_suite(int n, std::uint64_t seed) {
  MismatchSuite s;
  for (int k = 0; k < n; ++k) {
    const auto game = random_instance(seed + static_cast<std::uint64_t>(k));
    for (int i = 0; i < game.num_videos; ++i) {
      for (double e : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const auto low = follower_fixed_point(game, i, e, 0);
        const auto high = follower_fixed_point(game, i, e, 1);
        ++s.samples;
        if (!low || !high || *low != *high) ++s.mismatches;
      }
    }
  }
  return s;
}

LeaderSuite run_leader_suite(int n, std::uint64_t seed) {
  LeaderSuite s;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int steps = static_cast<int>(std::lround(1.0 / kLeaderGridStep));
  for (int k = 0; k < n; ++k) {
    GameParams p;
    p.beta_e = 0.01 + unit(rng);
    p.eps_e = 0.1 + 2.0 * unit(rng);
    const double c = 1.0 - unit(rng);
    const double theta = p.beta_e * p.eps_e;
    const double total = 3.0 * theta * (1.0 + c) * unit(rng);
    double best_e = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j <= steps; ++j) {
      const double e = static_cast<double>(j) / steps;
      const double v = ec_video_utility(e, total, c, p);
      if (v > best) {
        best = v;
        best_e = e;
      }
    }
    const double closed = leader_best_response(total, c, p.beta_e, p.eps_e);
    s.max_error = std::max(s.max_error, std::abs(closed - best_e));
    for (double kink : {theta, theta * (1.0 + c)}) {
      const double below = leader_best_response(std::nextafter(kink, 0.0), c, p.beta_e, p.eps_e);
      const double above = leader_best_response(std::nextafter(kink, 1e9), c, p.beta_e, p.eps_e);
      s.max_jump = std::max(s.max_jump, std::abs(above - below));
    }
    ++s.samples;
  }
  return s;
}

}  // namespace crvr
