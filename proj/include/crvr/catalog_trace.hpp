#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace crvr {

using VideoId = std::int32_t;
using UserId = std::int32_t;

/// Per-user request lists for one slot. Each inner list is sorted and duplicate-free.
using SlotRequests = std::vector<std::vector<VideoId>>;

struct Video {
  VideoId id = 0;
  int category_id = 0;
  double size = 1.0;  // normalized to the largest video, in (0, 1]

  bool operator==(const Video&) const = default;
};

/// Immutable set of videos with categories and normalized sizes.
///
/// Video ids are dense 0..N-1. Category ids may be arbitrary integers; they are
/// mapped to a dense category index used by per-user aggregate tables.
class VideoCatalog {
public:
  VideoCatalog() = default;

  /// Validates and indexes `videos` (any order). Throws IntegrityError when ids
  /// are not dense, a size is outside (0,1] or no video carries size 1.
  explicit VideoCatalog(std::vector<Video> videos);

  std::size_t size() const noexcept { return videos_.size(); }
  bool empty() const noexcept { return videos_.empty(); }

  const Video& video(VideoId i) const { return videos_.at(static_cast<std::size_t>(i)); }
  double size_of(VideoId i) const { return videos_[static_cast<std::size_t>(i)].size; }
  const std::vector<Video>& videos() const noexcept { return videos_; }

  std::size_t num_categories() const noexcept { return members_.size(); }
  int category_index(VideoId i) const { return category_index_[static_cast<std::size_t>(i)]; }
  int category_id_at(int index) const { return category_ids_.at(static_cast<std::size_t>(index)); }
  std::span<const VideoId> category_members(int index) const { return members_.at(static_cast<std::size_t>(index)); }
  const std::vector<int>& category_indices() const noexcept { return category_index_; }

  bool operator==(const VideoCatalog& other) const { return videos_ == other.videos_; }

private:
  std::vector<Video> videos_;
  std::vector<int> category_index_;
  std::vector<int> category_ids_;
  std::vector<std::vector<VideoId>> members_;
};

/// Genuine requests x_u^t for every user and slot.
struct GenuineTrace {
  int num_users = 0;
  int first_slot = 1;               // absolute number of slots[0]
  std::vector<SlotRequests> slots;  // slots[k] holds slot first_slot + k

  int num_slots() const noexcept { return static_cast<int>(slots.size()); }
  int last_slot() const noexcept { return first_slot + num_slots() - 1; }
  std::size_t total_requests() const;

  /// Requests of user u at absolute slot t.
  const std::vector<VideoId>& requests(int t, UserId u) const;

  /// Throws IntegrityError on a dangling video id, unsorted list or user count mismatch.
  void validate(const VideoCatalog& catalog) const;

  bool operator==(const GenuineTrace&) const = default;
};

struct TraceGenConfig {
  int num_videos = 2000;
  int num_categories = 20;
  int num_users = 100;
  int num_slots = 1000;
  double zipf_exponent = 0.8;
  double mean_requests_per_active_slot = 1.5;
  double user_activity_prob = 0.3;
  double pref_concentration = 0.5;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

/// Sizes uniform on (0,1] rescaled so the maximum is exactly 1; categories
/// uniform. Video ids follow global popularity rank (id 0 is the Zipf head).
VideoCatalog generate_catalog(const TraceGenConfig& cfg);

/// Each slot every user is active with `user_activity_prob`; an active user
/// draws a zero-truncated Poisson count of distinct videos from the product of
/// the global Zipf popularity and the user's Dirichlet category weights.
GenuineTrace generate_trace(const VideoCatalog& catalog, const TraceGenConfig& cfg);

struct LoadedTrace {
  VideoCatalog catalog;
  GenuineTrace trace;
};

VideoCatalog parse_catalog_csv(std::istream& in);

/// Parses `user_id,slot,video_id` rows. The user count is max(user_id)+1 unless
/// `num_users` is larger; T is the largest slot seen (0 for an empty file).
GenuineTrace parse_trace_csv(std::istream& in, const VideoCatalog& catalog, int num_users = 0);

LoadedTrace load_trace(const std::filesystem::path& catalog_csv, const std::filesystem::path& trace_csv);

/// Reads `<dir>/catalog.csv` and `<dir>/trace.csv`.
LoadedTrace load_trace(const std::filesystem::path& dir);

void write_catalog_csv(std::ostream& out, const VideoCatalog& catalog);
void write_trace_csv(std::ostream& out, const GenuineTrace& trace);

/// Writes `<dir>/catalog.csv` and `<dir>/trace.csv`.
void export_trace(const std::filesystem::path& dir, const VideoCatalog& catalog, const GenuineTrace& trace);

/// Warmup gets the first floor(fraction*T) slots, test the rest.
std::pair<GenuineTrace, GenuineTrace> split_trace(const GenuineTrace& trace, double warmup_fraction);

/// FNV-1a digest of the trace content, used to confirm experiment arms share input.
std::uint64_t trace_digest(const GenuineTrace& trace);

}  // namespace crvr
