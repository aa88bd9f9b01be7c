#include "crvr/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "crvr/errors.hpp"
#include "crvr/metrics.hpp"

namespace crvr {

std::vector<VideoId> nr_request(std::span<const VideoId> genuine) { return {genuine.begin(), genuine.end()}; }

std::vector<VideoId> random_request(std::span<const VideoId> genuine, double budget, int num_videos,
                                    const std::function<bool(VideoId)>& requested_before, std::mt19937_64& rng) {
  if (!(budget >= 0.0)) throw ConfigError("redundant budget must be >= 0");
  const double whole = std::floor(budget);
  int want = static_cast<int>(whole);
  if (budget > whole && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < budget - whole) ++want;

  std::vector<VideoId> out(genuine.begin(), genuine.end());
  if (want == 0) return out;
  auto eligible = [&](VideoId i) {
    return !std::binary_search(genuine.begin(), genuine.end(), i) && !requested_before(i);
  };

  // Rejection sampling is cheap while unseen videos are plentiful; fall back to
  // an explicit candidate list when they are not.
  std::uniform_int_distribution<VideoId> pick(0, num_videos - 1);
  std::vector<VideoId> chosen;
  for (int attempt = 0; attempt < 32 * want && static_cast<int>(chosen.size()) < want; ++attempt) {
    const VideoId i = pick(rng);
    if (eligible(i) && std::find(chosen.begin(), chosen.end(), i) == chosen.end()) chosen.push_back(i);
  }
  if (static_cast<int>(chosen.size()) < want) {
    std::vector<VideoId> pool;
    for (VideoId i = 0; i < num_videos; ++i) {
      if (eligible(i) && std::find(chosen.begin(), chosen.end(), i) == chosen.end()) pool.push_back(i);
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    const auto take = std::min(pool.size(), static_cast<std::size_t>(want) - chosen.size());
    chosen.insert(chosen.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
  }
  out.insert(out.end(), chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

BoundedCache::BoundedCache(double capacity, EvictionPolicy policy, const VideoCatalog& catalog)
    : capacity_(capacity), policy_(policy) {
  if (!(capacity >= 0.0)) throw ConfigError("cache capacity must be >= 0");
  sizes_.reserve(catalog.size());
  for (const auto& v : catalog.videos()) sizes_.push_back(v.size);
}

BoundedCache::Key BoundedCache::key_of(VideoId i, const Entry& e) const {
  if (policy_ == EvictionPolicy::kLru) return {e.last_use, 0, i};
  return {e.hits, e.inserted, i};
}

void BoundedCache::evict_one() {
  const auto victim = std::get<2>(*order_.begin());
  order_.erase(order_.begin());
  used_ -= sizes_[static_cast<std::size_t>(victim)];
  entries_.erase(victim);
  if (entries_.empty()) used_ = 0.0;
}

void BoundedCache::access(VideoId i) {
  if (i < 0 || static_cast<std::size_t>(i) >= sizes_.size()) throw ContractViolation("access to unknown video");
  ++clock_;
  if (auto it = entries_.find(i); it != entries_.end()) {
    order_.erase(key_of(i, it->second));
    it->second.last_use = clock_;
    ++it->second.hits;
    order_.insert(key_of(i, it->second));
    return;
  }
  const double size = sizes_[static_cast<std::size_t>(i)];
  if (size > capacity_) {
    ++skipped_;
    return;
  }
  while (!entries_.empty() && used_ + size > capacity_) evict_one();
  Entry e{clock_, clock_, 1};
  entries_.emplace(i, e);
  order_.insert(key_of(i, e));
  used_ += size;
}

std::vector<double> BoundedCache::indicator() const {
  std::vector<double> e(sizes_.size(), 0.0);
  for (const auto& [i, entry] : entries_) e[static_cast<std::size_t>(i)] = 1.0;
  return e;
}

std::vector<VideoId> BoundedCache::contents() const {
  std::vector<VideoId> out;
  for (const auto& [i, entry] : entries_) out.push_back(i);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::vector<double> feed(BoundedCache& cache, std::span<const VideoId> requests, EvictionPolicy expected) {
  if (cache.policy() != expected) throw ContractViolation("cache policy does not match step");
  for (VideoId i : requests) cache.access(i);
  return cache.indicator();
}

}  // namespace

std::vector<double> lru_step(BoundedCache& cache, std::span<const VideoId> requests) {
  return feed(cache, requests, EvictionPolicy::kLru);
}

std::vector<double> lfu_step(BoundedCache& cache, std::span<const VideoId> requests) {
  return feed(cache, requests, EvictionPolicy::kLfu);
}

double derive_equivalent_capacity(const RunResult& run) {
  if (run.cache_load.empty()) throw ConfigError("equivalent capacity needs a run with at least one slot");
  double total = 0.0;
  for (double load : run.cache_load) total += load;
  return total / static_cast<double>(run.cache_load.size());
}

}  // namespace crvr
