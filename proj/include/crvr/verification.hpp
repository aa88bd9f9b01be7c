#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "crvr/stackelberg.hpp"

namespace crvr {

/// Random context inside the anchor condition for a UD's own first request.
UdContext random_admissible_context(std::mt19937_64& rng);

struct EquilibriumSuite {
  int instances = 0;
  int passed = 0;
  int unsolved = 0;          // no consistent leader/follower pair
  int with_violations = 0;   // solved but a follower or the leader could gain
  double max_leader_gap = 0.0;
  std::vector<std::uint64_t> failing_seeds;
};

/// verify_equilibrium_bruteforce on random_instance(seed + k), k < n.
EquilibriumSuite run_equilibrium_suite(int n, std::uint64_t seed, double tol = 1e-6);

struct MismatchSuite {
  int samples = 0;
  int mismatches = 0;
};

/// follower_best_response against the better of ud_utility(0) and ud_utility(1), ties to 0.
MismatchSuite run_follower_argmax_suite(int n, std::uint64_t seed);

/// Follower fixed points from all-zero and all-one starts at e in {0, .25, .5, .75, 1}
/// for every video of random_instance(seed + k). A mismatch is any differing or unconverged pair.
MismatchSuite run_uniqueness_suite(int n, std::uint64_t seed);

struct LeaderSuite {
  int samples = 0;
  double max_error = 0.0;  // |closed form - grid argmax|
  double max_jump = 0.0;   // around both kinks
};

LeaderSuite run_leader_suite(int n, std::uint64_t seed);

}  // namespace crvr
