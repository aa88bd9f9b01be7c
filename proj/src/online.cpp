#include "crvr/online.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crvr/errors.hpp"

namespace crvr {

double mav_update(double prev, double observation, double rho) { return (1.0 - rho) * observation + rho * prev; }

MavEstimator::MavEstimator(std::size_t size, double rho) : estimate_(size, 0.0), rho_(rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in [0,1]");
}

void MavEstimator::update(std::span<const double> observations) {
  if (observations.size() != estimate_.size()) throw ContractViolation("observation length mismatch");
  for (std::size_t i = 0; i < estimate_.size(); ++i) estimate_[i] = mav_update(estimate_[i], observations[i], rho_);
}

const std::vector<double>& evc_step(SystemState& state, const VideoCatalog& catalog, const GameParams& params) {
  const auto totals = action_totals(state.last_public_actions, state.num_videos);
  for (int i = 0; i < state.num_videos; ++i) {
    const auto k = static_cast<std::size_t>(i);
    state.ec_estimate[k] = mav_update(state.ec_estimate[k], totals[k], params.rho);
    state.ec_strategy[k] = leader_best_response(state.ec_estimate[k], catalog.size_of(i), params.beta_e, params.eps_e);
  }
  return state.ec_strategy;
}

void refresh_newcomer_estimate(SystemState& state, const GameParams& params) {
  for (std::size_t i = 0; i < state.newcomer_estimate.size(); ++i) {
    state.newcomer_estimate[i] = mav_update(state.newcomer_estimate[i], state.last_first_time[i], params.rho);
  }
}

CrvrDecision crvr_step(const SystemState& state, const VideoCatalog& catalog, UserId u,
                       std::span<const double> ec_strategy, std::span<const VideoId> genuine,
                       const GameParams& params, const CrvrOptions& options) {
  CrvrDecision out;
  if (genuine.empty()) return out;

  const bool miss = std::any_of(genuine.begin(), genuine.end(), [&](VideoId i) { return !state.locally_cached(u, i); });
  if (!miss) {
    out.actions = state.last_public_actions[static_cast<std::size_t>(u)];
    out.replayed = true;
    return out;
  }

  const auto prefs = view_preferences_with(state, u, genuine);
  // Largest newcomer count that still leaves room for u's own first request: K > 2(m + dn + 1).
  const double room = (state.anchor - 1) / 2.0 - 1.0;

  for (VideoId i = 0; i < state.num_videos; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const bool is_genuine = std::binary_search(genuine.begin(), genuine.end(), i);
    if (is_genuine) {
      if (!state.locally_cached(u, i)) out.actions.push_back(i);
      continue;
    }
    FollowerInput in;
    UdContext& c = in.ctx;
    c.view_pref = prefs[k];
    c.popularity = state.popularity[k];
    c.size = catalog.size_of(i);
    c.requested_before = state.requested(u, i);
    c.requested_by = state.request_counts[k];
    c.anchor = state.anchor;
    c.ec_fraction = ec_strategy[k];
    c.params = params;
    if (!c.requested_before) {
      const double cap = room - c.requested_by;
      if (cap < 0.0) {
        throw DomainError("anchor K=" + std::to_string(state.anchor) + " too small for video " + std::to_string(i) +
                          " with m=" + std::to_string(state.request_counts[k]));
      }
      c.newcomers = std::min(state.newcomer_estimate[k], cap);
    }
    if (follower_best_response(in, options.rule, options.convention)) out.actions.push_back(i);
  }
  return out;
}

int redundant_request_count(std::span<const VideoId> actions, std::span<const VideoId> genuine) {
  int extra = 0;
  for (VideoId i : actions) {
    if (!std::binary_search(genuine.begin(), genuine.end(), i)) ++extra;
  }
  return extra;
}

}  // namespace crvr
