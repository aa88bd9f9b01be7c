#pragma once

#include <span>
#include <vector>

#include "crvr/catalog_trace.hpp"
#include "crvr/stackelberg.hpp"
#include "crvr/system_state.hpp"

namespace crvr {

/// (1 - rho) * observation + rho * prev.
double mav_update(double prev, double observation, double rho);

/// Per-video moving average starting from zero.
class MavEstimator {
public:
  MavEstimator(std::size_t size, double rho);

  void update(std::span<const double> observations);
  const std::vector<double>& estimate() const noexcept { return estimate_; }
  double rho() const noexcept { return rho_; }

private:
  std::vector<double> estimate_;
  double rho_;
};

/// Leader step at the start of a slot: folds last slot's public request totals
/// into the demand estimate, then announces e_i = leader_best_response(estimate).
/// Writes state.ec_estimate and state.ec_strategy; returns the new strategy.
const std::vector<double>& evc_step(SystemState& state, const VideoCatalog& catalog, const GameParams& params);

/// Folds last slot's first-time request counts into the shared newcomer
/// estimate. Called once per slot before any follower decides.
void refresh_newcomer_estimate(SystemState& state, const GameParams& params);

struct CrvrOptions {
  FollowerRule rule = FollowerRule::kExactBinary;
  NewcomerConvention convention = NewcomerConvention::kExcludeSelf;
};

struct CrvrDecision {
  std::vector<VideoId> actions;  // sorted a_u^t
  bool replayed = false;         // every genuine request hit the local cache
};

/// Follower step of user u. No genuine request: no action. All genuine
/// requests held locally: last slot's public actions are repeated. Otherwise
/// genuine videos not held locally are requested and every other video gets a
/// best response against the announced strategy and the newcomer estimate.
/// The estimate is capped so the anchor condition holds with u's own request.
CrvrDecision crvr_step(const SystemState& state, const VideoCatalog& catalog, UserId u,
                       std::span<const double> ec_strategy, std::span<const VideoId> genuine,
                       const GameParams& params, const CrvrOptions& options = {});

/// |a \ x| for sorted lists.
int redundant_request_count(std::span<const VideoId> actions, std::span<const VideoId> genuine);

}  // namespace crvr
