#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "crvr/system_state.hpp"
#include "crvr/utility.hpp"

namespace crvr {

/// A UD's decision input for one video. `ctx.newcomers` carries the
/// (estimated or exact) first-time request count of the other users.
struct FollowerInput {
  UdContext ctx;
  bool genuine = false;  // x
};

/// How a follower turns its response into a binary action.
enum class FollowerRule {
  /// Exact argmax over {0,1} of the UD utility, ties to 0.
  kExactBinary,
  /// Relaxed argmax over y in [0,1], then floor(y + 1/2).
  kRoundedRelaxed,
};

/// Interior critical point of the relaxed follower objective,
///   gamma / (beta c eps_u - c d p (1-e)) + (n - dn) / (n - m - 2 dn),
/// with n = K - m. Empty when the first denominator is zero.
/// Throws DomainError unless K > 2(m + dn).
std::optional<double> omega(const FollowerInput& in);

/// Maximizer over y in [0,1] of the relaxed objective for a video the UD has
/// not requested before. The critical point only lies inside the logarithm's
/// domain when caching benefit exceeds cost; otherwise the objective decreases
/// in y and the maximizer is 0.
double relaxed_response(const FollowerInput& in);

/// Binary action a* of one UD for one video.
int follower_best_response(const FollowerInput& in, FollowerRule rule = FollowerRule::kExactBinary,
                           NewcomerConvention convention = NewcomerConvention::kExcludeSelf);

/// EC caching fraction maximizing its utility for a fixed request total:
/// 0 below beta_e*eps_e, 1 above beta_e*eps_e*(1+c), linear in between.
double leader_best_response(double request_total, double size, double beta_e, double eps_e);

/// One-slot game small enough for exhaustive checks.
struct GameInstance {
  int num_users = 0;
  int num_videos = 0;
  std::vector<double> sizes;                   // c_i
  std::vector<double> popularity;              // p-hat_i
  std::vector<std::uint8_t> genuine;           // x, row-major |U| x |I|
  std::vector<std::uint8_t> requested_before;  // r
  std::vector<double> view_pref;               // d
  GameParams params;

  std::size_t index(int u, int i) const { return static_cast<std::size_t>(u * num_videos + i); }
  int anchor() const { return params.resolved_anchor(num_users); }
  int requested_by(int i) const;
  /// Context for (u, i) with `newcomers` other first-time requesters.
  UdContext context(int u, int i, double ec, double newcomers) const;
};

/// Draws a reachable small state: a short random request history (with some
/// redundant requests) replayed through the state model, then a genuine slot.
GameInstance random_instance(std::uint64_t seed, int max_users = 4, int max_videos = 5,
                             const GameParams& params = {});

/// Snapshot of a simulator state for users' decisions at the current slot.
GameInstance instance_from_state(const SystemState& state, const VideoCatalog& catalog, const ActionProfile& genuine,
                                 const GameParams& params);

struct StrategyProfile {
  std::vector<double> ec;             // e per video
  std::vector<std::uint8_t> actions;  // a, row-major |U| x |I|
};

/// Follower equilibrium for one video at a fixed EC fraction, by synchronous
/// best-response sweeps from `start` (0 or 1 for every undecided follower).
/// Empty if no fixed point is reached within kMaxFixedPointSweeps.
std::optional<std::vector<std::uint8_t>> follower_fixed_point(
    const GameInstance& game, int video, double ec, int start, FollowerRule rule = FollowerRule::kExactBinary,
    NewcomerConvention convention = NewcomerConvention::kExcludeSelf);

struct SolveResult {
  std::optional<StrategyProfile> strategy;
  std::vector<int> unresolved_videos;  // no request total S with S = sum a*(e*(S))
};

/// Closed-form strategy pair: for each video, the smallest request total S
/// whose leader response e*(S) induces a follower fixed point summing to S.
SolveResult solve_equilibrium(const GameInstance& game, FollowerRule rule = FollowerRule::kExactBinary,
                              NewcomerConvention convention = NewcomerConvention::kExcludeSelf);

struct FollowerViolation {
  int user = 0;
  int video = 0;
  int action = 0;      // a* that was checked
  double gain = 0.0;   // utility improvement from deviating
  UdContext context;   // context at a*
};

struct EquilibriumReport {
  double leader_gap = 0.0;
  std::vector<FollowerViolation> follower_violations;
  bool solved = true;
  std::string diagnostic;
  bool passed = false;
};

/// Checks a strategy pair: grid search of each video's EC utility at the fixed
/// request totals, and every deviation of every follower over all 2^k subsets
/// of its non-genuine videos.
EquilibriumReport verify_equilibrium(const GameInstance& game, const StrategyProfile& strategy,
                                     double tol = 1e-6);

/// solve_equilibrium followed by verify_equilibrium.
EquilibriumReport verify_equilibrium_bruteforce(const GameInstance& game, double tol = 1e-6,
                                                FollowerRule rule = FollowerRule::kExactBinary,
                                                NewcomerConvention convention = NewcomerConvention::kExcludeSelf);

/// CSV: one `kind,user,video,action,gain,d,p,c,r,m,dn,K,e` row per violation
/// plus a leading summary row.
void write_report_csv(std::ostream& out, const EquilibriumReport& report);

struct StandardFunctionReport {
  int samples = 0;
  int positivity_violations = 0;
  int monotonicity_violations = 0;
  int scalability_violations = 0;
  /// k*Omega(dn) >= Omega(k*dn) on the unclamped critical point. Informational.
  int raw_scalability_violations = 0;
  std::vector<std::string> failures;

  bool passed() const {
    return positivity_violations == 0 && monotonicity_violations == 0 && scalability_violations == 0;
  }
};

/// Samples parameters satisfying K > 2(m + k*dn) and beta c eps_u > c d p (1-e),
/// and checks positivity of y* = clamp(Omega, 0, 1), monotonicity of Omega in
/// dn, and k*y*(dn) >= y*(k*dn) for k >= 1.
StandardFunctionReport check_standard_function(int num_samples, std::uint64_t seed);

}  // namespace crvr
