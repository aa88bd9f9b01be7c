#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <tuple>
#include <span>
#include <unordered_map>
#include <vector>

#include "crvr/catalog_trace.hpp"

namespace crvr {

struct RunResult;

/// a = x.
std::vector<VideoId> nr_request(std::span<const VideoId> genuine);

/// x plus floor(budget) uniformly drawn videos (one more with probability
/// frac(budget)) that are neither genuine nor previously requested by the
/// user. When fewer remain, all of them are requested.
std::vector<VideoId> random_request(std::span<const VideoId> genuine, double budget, int num_videos,
                                    const std::function<bool(VideoId)>& requested_before, std::mt19937_64& rng);

enum class EvictionPolicy { kLru, kLfu };

/// Whole-object cache bounded by the sum of stored sizes.
class BoundedCache {
public:
  BoundedCache(double capacity, EvictionPolicy policy, const VideoCatalog& catalog);

  /// One access: hits refresh recency or bump frequency; misses insert after
  /// evicting until the new object fits. Objects larger than the capacity are
  /// not stored and counted in skipped().
  void access(VideoId i);

  bool contains(VideoId i) const { return entries_.count(i) != 0; }
  double used() const noexcept { return used_; }
  double capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t skipped() const noexcept { return skipped_; }
  EvictionPolicy policy() const noexcept { return policy_; }

  /// e_i = 1 for stored videos, 0 otherwise.
  std::vector<double> indicator() const;
  std::vector<VideoId> contents() const;

private:
  struct Entry {
    std::uint64_t last_use = 0;
    std::uint64_t inserted = 0;
    std::uint64_t hits = 0;
  };

  using Key = std::tuple<std::uint64_t, std::uint64_t, VideoId>;  // eviction order, smallest first
  Key key_of(VideoId i, const Entry& e) const;
  void evict_one();

  double capacity_;
  EvictionPolicy policy_;
  std::vector<double> sizes_;
  std::unordered_map<VideoId, Entry> entries_;
  std::set<Key> order_;
  double used_ = 0.0;
  std::uint64_t clock_ = 0;
  std::size_t skipped_ = 0;
};

/// Feeds `requests` in order and returns the cache indicator afterwards.
std::vector<double> lru_step(BoundedCache& cache, std::span<const VideoId> requests);
std::vector<double> lfu_step(BoundedCache& cache, std::span<const VideoId> requests);

/// Time average over the run's slots of sum_i e_i c_i. Throws ConfigError for an empty run.
double derive_equivalent_capacity(const RunResult& run);

}  // namespace crvr
