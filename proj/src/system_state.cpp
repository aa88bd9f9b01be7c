#include "crvr/system_state.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "crvr/csv.hpp"
#include "crvr/errors.hpp"

namespace crvr {

void GameParams::validate() const {
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
  if (!(beta > 0.0)) throw ConfigError("beta must be > 0");
  if (!(beta_e > 0.0)) throw ConfigError("beta_e must be > 0");
  if (!(eps_e > 0.0)) throw ConfigError("eps_e must be > 0");
  if (!(eps_u > 0.0)) throw ConfigError("eps_u must be > 0");
  if (!(delta > 0.0)) throw ConfigError("delta must be > 0");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in [0,1]");
  if (anchor_k < 0) throw ConfigError("anchor_k must be >= 0");
}

void check_anchor(const SystemState& state, std::span<const int> newcomers) {
  for (int i = 0; i < state.num_videos; ++i) {
    const long long load = state.request_counts[static_cast<std::size_t>(i)] +
                           (newcomers.empty() ? 0 : newcomers[static_cast<std::size_t>(i)]);
    if (!(state.anchor > 2 * load)) {
      throw ConfigError("anchor K=" + std::to_string(state.anchor) + " violates K > 2(m + dn) for video " +
                        std::to_string(i) + " (m + dn = " + std::to_string(load) + ")");
    }
  }
}

SystemState init_state(const VideoCatalog& catalog, int num_users, const GenuineTrace& warmup,
                       const GameParams& params) {
  params.validate();
  if (num_users < 0) throw ConfigError("negative user count");
  if (!warmup.slots.empty() && warmup.num_users != num_users) {
    throw ConfigError("warmup user count does not match");
  }
  warmup.validate(catalog);

  SystemState s;
  s.num_users = num_users;
  s.num_videos = static_cast<int>(catalog.size());
  s.num_categories = static_cast<int>(catalog.num_categories());
  s.anchor = params.resolved_anchor(num_users);
  const auto cells = static_cast<std::size_t>(num_users) * catalog.size();
  s.public_profile.assign(cells, 0);
  s.private_profile.assign(cells, 0);
  s.request_counts.assign(catalog.size(), 0);
  s.watch_counts.assign(catalog.size(), 0);
  s.category_watch.assign(static_cast<std::size_t>(num_users) * catalog.num_categories(), 0);
  s.video_category = catalog.category_indices();
  s.popularity.assign(catalog.size(), 0.0);
  s.ec_strategy.assign(catalog.size(), 0.0);
  s.ec_estimate.assign(catalog.size(), 0.0);
  s.newcomer_estimate.assign(catalog.size(), 0.0);
  s.last_public_actions.assign(static_cast<std::size_t>(num_users), {});
  s.last_first_time.assign(catalog.size(), 0);
  s.slot = warmup.first_slot;

  for (const auto& slot : warmup.slots) {
    check_anchor(s, first_time_request_count(s, slot));
    apply_round(s, slot, slot, params);
  }
  return s;
}

std::vector<int> first_time_request_count(const SystemState& state, const ActionProfile& actions) {
  std::vector<int> counts(static_cast<std::size_t>(state.num_videos), 0);
  for (std::size_t u = 0; u < actions.size(); ++u) {
    for (VideoId i : actions[u]) {
      if (!state.requested(static_cast<UserId>(u), i)) ++counts[static_cast<std::size_t>(i)];
    }
  }
  return counts;
}

std::vector<double> action_totals(const ActionProfile& actions, int num_videos) {
  std::vector<double> totals(static_cast<std::size_t>(num_videos), 0.0);
  for (const auto& list : actions)
    for (VideoId i : list) totals[static_cast<std::size_t>(i)] += 1.0;
  return totals;
}

std::vector<double> update_popularity(std::span<const double> popularity, std::span<const double> totals,
                                      double delta) {
  const double decay = std::exp(-delta);
  std::vector<double> next(popularity.size());
  for (std::size_t i = 0; i < popularity.size(); ++i) next[i] = decay * (popularity[i] + totals[i]);
  return next;
}

void apply_round(SystemState& s, const ActionProfile& actions, const ActionProfile& genuine,
                 const GameParams& params) {
  if (actions.size() != static_cast<std::size_t>(s.num_users) ||
      genuine.size() != static_cast<std::size_t>(s.num_users)) {
    throw ContractViolation("action/genuine profiles must have one entry per user");
  }
  for (std::size_t u = 0; u < genuine.size(); ++u) {
    const auto& a = actions[u];
    for (VideoId i : genuine[u]) {
      if (i < 0 || i >= s.num_videos) throw ContractViolation("genuine request for unknown video");
      if (!std::binary_search(a.begin(), a.end(), i) && !s.locally_cached(static_cast<UserId>(u), i)) {
        throw ContractViolation("user " + std::to_string(u) + " watches video " + std::to_string(i) +
                                " without requesting it or holding it locally");
      }
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k] < 0 || a[k] >= s.num_videos) throw ContractViolation("action for unknown video");
      if (k > 0 && a[k - 1] >= a[k]) throw ContractViolation("action list not sorted and unique");
    }
  }

  s.last_first_time = first_time_request_count(s, actions);
  const auto totals = action_totals(actions, s.num_videos);

  for (std::size_t u = 0; u < actions.size(); ++u) {
    for (VideoId i : actions[u]) {
      auto& bit = s.public_profile[s.index(static_cast<UserId>(u), i)];
      if (!bit) {
        bit = 1;
        ++s.request_counts[static_cast<std::size_t>(i)];
      }
    }
    for (VideoId i : genuine[u]) {
      auto& bit = s.private_profile[s.index(static_cast<UserId>(u), i)];
      if (!bit) {
        bit = 1;
        ++s.watch_counts[static_cast<std::size_t>(i)];
        ++s.category_watch[u * static_cast<std::size_t>(s.num_categories) +
                           static_cast<std::size_t>(s.video_category[static_cast<std::size_t>(i)])];
      }
    }
  }

  s.popularity = update_popularity(s.popularity, totals, params.delta);
  s.last_public_actions = actions;
  ++s.slot;
}

double view_preference(const SystemState& s, UserId u, VideoId i) {
  if (s.slot < 1) throw ContractViolation("view preference needs t >= 1");
  if (s.watched(u, i)) return 0.0;
  const int category = s.video_category[static_cast<std::size_t>(i)];
  return static_cast<double>(s.category_watch_count(u, category)) / static_cast<double>(s.slot);
}

std::vector<double> view_preferences_with(const SystemState& s, UserId u, std::span<const VideoId> genuine) {
  if (s.slot < 1) throw ContractViolation("view preference needs t >= 1");
  std::vector<int> counts(static_cast<std::size_t>(s.num_categories));
  for (int k = 0; k < s.num_categories; ++k) counts[static_cast<std::size_t>(k)] = s.category_watch_count(u, k);
  for (VideoId i : genuine) {
    if (!s.watched(u, i)) ++counts[static_cast<std::size_t>(s.video_category[static_cast<std::size_t>(i)])];
  }
  const double t = s.slot;
  std::vector<double> d(static_cast<std::size_t>(s.num_videos));
  for (VideoId i = 0; i < s.num_videos; ++i) {
    const bool seen = s.watched(u, i) || std::binary_search(genuine.begin(), genuine.end(), i);
    d[static_cast<std::size_t>(i)] =
        seen ? 0.0 : counts[static_cast<std::size_t>(s.video_category[static_cast<std::size_t>(i)])] / t;
  }
  return d;
}

void write_snapshot_header(std::ostream& out) { out << "slot,video_id,m,phat,e\n"; }

void write_snapshot(std::ostream& out, const SystemState& s) {
  for (int i = 0; i < s.num_videos; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out << s.slot << ',' << i << ',' << s.request_counts[k] << ',' << csv::format_double(s.popularity[k]) << ','
        << csv::format_double(s.ec_strategy[k]) << '\n';
  }
}

}  // namespace crvr
