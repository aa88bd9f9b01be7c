#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crvr/catalog_trace.hpp"
#include "crvr/system_state.hpp"

namespace crvr {

/// A genuine request for a video the user had not watched before.
struct WatchEvent {
  int slot = 0;
  UserId user = 0;
  VideoId video = 0;
  bool from_redundant_cache = false;  // prefetched by an earlier redundant request
};

/// A public request that had to be fetched from the edge (not held locally).
struct EdgeRequest {
  UserId user = 0;
  VideoId video = 0;
};

/// Per-slot means over users of the weighted utility terms, plus the EC utility.
struct UtilitySample {
  double benefit = 0.0;     // L
  double disclosure = 0.0;  // gamma * D
  double cost = 0.0;        // beta * C
  double ec = 0.0;          // U_E

  double ud_total() const { return benefit - disclosure - cost; }
};

enum class Phase : char { kLeader = 'L', kFollowers = 'F', kApply = 'A' };

struct RunResult {
  std::string label;
  GameParams params;
  int num_users = 0;
  int num_videos = 0;
  int first_slot = 1;
  std::uint64_t trace_digest = 0;

  // One entry per test slot.
  std::vector<ActionProfile> actions;
  std::vector<ActionProfile> genuine;
  std::vector<std::vector<std::uint8_t>> replayed;  // per user
  std::vector<std::vector<int>> fresh_redundant;    // per user: |a \ x| restricted to videos not requested before
  std::vector<std::vector<double>> ec_history;      // e^t, fixed before the slot's requests
  std::vector<double> cache_load;                   // sum_i e_i^t c_i
  std::vector<std::vector<EdgeRequest>> edge_requests;
  std::vector<UtilitySample> utility;
  std::vector<std::pair<int, Phase>> sequence;  // (slot, phase) in execution order

  std::vector<WatchEvent> watch_log;
  std::vector<std::uint8_t> final_public;   // r^T
  std::vector<std::uint8_t> final_private;  // w^T

  int num_slots() const noexcept { return static_cast<int>(actions.size()); }
  /// Fresh redundant requests per (user, slot) with at least one genuine request.
  double average_redundant_count() const;
};

enum class PdrDenominator {
  kGenuineAggregates,  // H(w) under the counts of w
  kPublicAggregates,   // H(w) under the counts of r
};

struct PdrReport {
  std::vector<std::optional<double>> per_user;  // empty when excluded
  std::vector<UserId> excluded;                 // zero or infinite denominator, or infinite numerator
  std::vector<UserId> infinite;                 // users with an infinite entropy term
  std::optional<double> mean;
};

/// sum_i H(r_{u,i}) / sum_i H(w_{u,i}) per user at the final slot.
PdrReport compute_pdr(const RunResult& result, PdrDenominator denominator = PdrDenominator::kGenuineAggregates);

/// Share of first-watch events served by an earlier redundant prefetch. Empty without watch events.
std::optional<double> compute_chr(const RunResult& result);

/// sum e_i^t c_i / sum c_i over edge-directed requests. Empty without such requests.
std::optional<double> compute_bor(const RunResult& result, const VideoCatalog& catalog);

struct UtilitySeries {
  std::vector<UtilitySample> samples;
  double first_variance = 0.0;  // of ud_total over the first 20% of slots
  double last_variance = 0.0;   // over the last 20%
};

UtilitySeries utility_timeseries(const RunResult& result);

/// Population variance; 0 for fewer than two values.
double variance(const std::vector<double>& values);

/// `metric,scope,value` rows. Undefined metrics are written as NA.
void write_metrics_csv(std::ostream& out, const RunResult& result, const VideoCatalog& catalog,
                       PdrDenominator denominator = PdrDenominator::kGenuineAggregates);

}  // namespace crvr
