#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "crvr/catalog_trace.hpp"

namespace crvr {

/// Scalar knobs of the game. Defaults follow the reference experiment settings.
struct GameParams {
  double gamma = 0.1;   // privacy weight (UD)
  double beta = 0.1;    // caching-cost weight (UD)
  double beta_e = 0.1;  // caching-cost weight (EC)
  double eps_e = 1.0;   // unit caching cost (EC)
  double eps_u = 1.0;   // unit caching cost (UD)
  double delta = 0.01;  // popularity decay
  double rho = 0.9;     // moving-average weight
  int anchor_k = 0;     // popularity anchor K; 0 selects 2|U|+1

  void validate() const;

  /// K to use for a population of `num_users`.
  int resolved_anchor(int num_users) const { return anchor_k > 0 ? anchor_k : 2 * num_users + 1; }
};

/// Public request vectors a_u^t for one slot, one sorted id list per user.
using ActionProfile = SlotRequests;

/// Evolving profiles and aggregates shared by the leader and followers.
///
/// Profiles are dense |U| x |I| bitmaps in row-major order. A user's local
/// cache holds every video it ever downloaded and never evicts, so it equals
/// the user's public profile row.
struct SystemState {
  int slot = 1;
  int num_users = 0;
  int num_videos = 0;
  int anchor = 1;

  std::vector<std::uint8_t> public_profile;   // r
  std::vector<std::uint8_t> private_profile;  // w
  std::vector<int> request_counts;            // m_i = sum_u r_{u,i}
  std::vector<int> watch_counts;              // sum_u w_{u,i}
  std::vector<int> category_watch;            // |U| x categories, sum of w over each category
  std::vector<int> video_category;            // dense category index per video
  int num_categories = 0;

  std::vector<double> popularity;         // p-hat
  std::vector<double> ec_strategy;        // e, as last announced
  std::vector<double> ec_estimate;        // a-hat
  std::vector<double> newcomer_estimate;  // delta-n-hat

  ActionProfile last_public_actions;  // a^{t-1}
  std::vector<int> last_first_time;   // delta-n^{t-1}

  std::size_t index(UserId u, VideoId i) const {
    return static_cast<std::size_t>(u) * static_cast<std::size_t>(num_videos) + static_cast<std::size_t>(i);
  }
  bool requested(UserId u, VideoId i) const { return public_profile[index(u, i)] != 0; }
  bool watched(UserId u, VideoId i) const { return private_profile[index(u, i)] != 0; }
  bool locally_cached(UserId u, VideoId i) const { return requested(u, i); }

  std::span<const std::uint8_t> public_row(UserId u) const {
    return std::span(public_profile).subspan(index(u, 0), static_cast<std::size_t>(num_videos));
  }
  std::span<const std::uint8_t> private_row(UserId u) const {
    return std::span(private_profile).subspan(index(u, 0), static_cast<std::size_t>(num_videos));
  }

  int category_watch_count(UserId u, int category) const {
    return category_watch[static_cast<std::size_t>(u) * static_cast<std::size_t>(num_categories) +
                          static_cast<std::size_t>(category)];
  }
};

/// Fresh state with every warmup slot replayed as genuine-only (a = x).
/// The slot counter ends at the first slot after the warmup.
SystemState init_state(const VideoCatalog& catalog, int num_users, const GenuineTrace& warmup,
                       const GameParams& params);

/// Merges one slot: r |= a, w |= x, refreshes m, decays popularity and
/// advances the slot. Genuine requests must be covered by `actions` unless the
/// video is already in the user's local cache.
void apply_round(SystemState& state, const ActionProfile& actions, const ActionProfile& genuine,
                 const GameParams& params);

/// p-hat^{t+1}_i = exp(-delta) * (p-hat^t_i + A^t_i).
std::vector<double> update_popularity(std::span<const double> popularity, std::span<const double> totals,
                                      double delta);

/// Average category preference of an unwatched video:
/// (1 - w_{u,i}) * sum_{i' in category(i)} w_{u,i'} / t.
double view_preference(const SystemState& state, UserId u, VideoId i);

/// View preference of u for every video after merging the slot's genuine
/// requests (sorted ids) into w_u; the slot counter is the current t.
std::vector<double> view_preferences_with(const SystemState& state, UserId u, std::span<const VideoId> genuine);

/// Number of users requesting each video for the first time in `actions`.
std::vector<int> first_time_request_count(const SystemState& state, const ActionProfile& actions);

/// Per-video request totals sum_u a_{u,i}.
std::vector<double> action_totals(const ActionProfile& actions, int num_videos);

/// Throws ConfigError naming the first video whose m_i + delta-n_i breaks K > 2(m + delta-n).
void check_anchor(const SystemState& state, std::span<const int> newcomers);

/// Diagnostic snapshot rows `slot,video_id,m,phat,e` for the current slot.
void write_snapshot_header(std::ostream& out);
void write_snapshot(std::ostream& out, const SystemState& state);

}  // namespace crvr
