#include "crvr/catalog_trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "crvr/constants.hpp"
#include "crvr/csv.hpp"
#include "crvr/errors.hpp"

namespace crvr {

VideoCatalog::VideoCatalog(std::vector<Video> videos) : videos_(std::move(videos)) {
  std::sort(videos_.begin(), videos_.end(), [](const Video& a, const Video& b) { return a.id < b.id; });
  double max_size = 0.0;
  for (std::size_t k = 0; k < videos_.size(); ++k) {
    const Video& v = videos_[k];
    if (v.id != static_cast<VideoId>(k)) {
      throw IntegrityError("video ids must be dense 0..N-1; missing or duplicate id near " + std::to_string(k));
    }
    if (!(v.size > 0.0 && v.size <= 1.0)) {
      throw IntegrityError("video " + std::to_string(v.id) + " has size outside (0,1]");
    }
    max_size = std::max(max_size, v.size);
  }
  if (!videos_.empty() && max_size < 1.0 - kSizeAnchorTol) {
    throw IntegrityError("no video has normalized size 1");
  }

  std::map<int, int> dense;
  for (const Video& v : videos_) dense.emplace(v.category_id, 0);
  int next = 0;
  for (auto& [id, index] : dense) {
    index = next++;
    category_ids_.push_back(id);
  }
  members_.resize(dense.size());
  category_index_.reserve(videos_.size());
  for (const Video& v : videos_) {
    const int index = dense.at(v.category_id);
    category_index_.push_back(index);
    members_[static_cast<std::size_t>(index)].push_back(v.id);
  }
}

std::size_t GenuineTrace::total_requests() const {
  std::size_t total = 0;
  for (const auto& slot : slots)
    for (const auto& user : slot) total += user.size();
  return total;
}

const std::vector<VideoId>& GenuineTrace::requests(int t, UserId u) const {
  const int k = t - first_slot;
  if (k < 0 || k >= num_slots()) throw ContractViolation("slot " + std::to_string(t) + " outside trace");
  return slots[static_cast<std::size_t>(k)].at(static_cast<std::size_t>(u));
}

void GenuineTrace::validate(const VideoCatalog& catalog) const {
  const auto n = static_cast<VideoId>(catalog.size());
  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (static_cast<int>(slots[k].size()) != num_users) {
      throw IntegrityError("slot " + std::to_string(first_slot + static_cast<int>(k)) + " has wrong user count");
    }
    for (const auto& list : slots[k]) {
      for (std::size_t j = 0; j < list.size(); ++j) {
        if (list[j] < 0 || list[j] >= n) {
          throw IntegrityError("trace references unknown video id " + std::to_string(list[j]));
        }
        if (j > 0 && list[j - 1] >= list[j]) throw IntegrityError("request list not sorted and unique");
      }
    }
  }
}

void TraceGenConfig::validate() const {
  if (num_videos < 1 || num_categories < 1 || num_users < 1 || num_slots < 1) {
    throw ConfigError("trace generator counts must all be >= 1");
  }
  if (!(zipf_exponent > 0.0)) throw ConfigError("zipf_exponent must be > 0");
  if (!(mean_requests_per_active_slot > 0.0)) throw ConfigError("mean_requests_per_active_slot must be > 0");
  if (!(user_activity_prob >= 0.0 && user_activity_prob <= 1.0)) {
    throw ConfigError("user_activity_prob must lie in [0,1]");
  }
  if (!(pref_concentration > 0.0)) throw ConfigError("pref_concentration must be > 0");
}

VideoCatalog generate_catalog(const TraceGenConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> category(0, cfg.num_categories - 1);

  std::vector<Video> videos(static_cast<std::size_t>(cfg.num_videos));
  double max_size = 0.0;
  for (int i = 0; i < cfg.num_videos; ++i) {
    auto& v = videos[static_cast<std::size_t>(i)];
    v.id = i;
    v.size = 1.0 - unit(rng);  // (0, 1]
    v.category_id = category(rng);
    max_size = std::max(max_size, v.size);
  }
  for (auto& v : videos) v.size /= max_size;
  // Division of the maximum by itself is exactly 1; pin it anyway in case of ties.
  for (auto& v : videos) v.size = std::min(v.size, 1.0);
  return VideoCatalog(std::move(videos));
}

GenuineTrace generate_trace(const VideoCatalog& catalog, const TraceGenConfig& cfg) {
  cfg.validate();
  if (catalog.empty()) throw ConfigError("cannot generate a trace over an empty catalog");

  // Separate stream from the catalog so both stay stable when one changes.
  std::mt19937_64 rng(cfg.rng_seed ^ 0x9e3779b97f4a7c15ULL);

  const std::size_t num_cat = catalog.num_categories();
  std::vector<double> zipf(catalog.size());
  for (std::size_t i = 0; i < zipf.size(); ++i) {
    zipf[i] = 1.0 / std::pow(static_cast<double>(i + 1), cfg.zipf_exponent);
  }

  // Two-stage sampling: category by (user weight x category Zipf mass), then
  // video within the category by Zipf weight.
  std::vector<double> category_mass(num_cat, 0.0);
  std::vector<std::discrete_distribution<std::size_t>> within(num_cat);
  for (std::size_t c = 0; c < num_cat; ++c) {
    const auto members = catalog.category_members(static_cast<int>(c));
    std::vector<double> w;
    w.reserve(members.size());
    for (VideoId i : members) {
      w.push_back(zipf[static_cast<std::size_t>(i)]);
      category_mass[c] += zipf[static_cast<std::size_t>(i)];
    }
    within[c] = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }

  std::gamma_distribution<double> gamma(cfg.pref_concentration, 1.0);
  std::vector<std::discrete_distribution<std::size_t>> user_category(static_cast<std::size_t>(cfg.num_users));
  for (auto& dist : user_category) {
    std::vector<double> w(num_cat);
    double total = 0.0;
    for (std::size_t c = 0; c < num_cat; ++c) {
      w[c] = gamma(rng);
      total += w[c];
    }
    // Degenerate all-zero draws (tiny concentration) fall back to uniform.
    for (std::size_t c = 0; c < num_cat; ++c) w[c] = (total > 0.0 ? w[c] / total : 1.0) * category_mass[c];
    dist = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }

  std::bernoulli_distribution active(cfg.user_activity_prob);
  std::poisson_distribution<int> count(cfg.mean_requests_per_active_slot);
  const int max_count = static_cast<int>(catalog.size());

  GenuineTrace trace;
  trace.num_users = cfg.num_users;
  trace.first_slot = 1;
  trace.slots.resize(static_cast<std::size_t>(cfg.num_slots));
  for (auto& slot : trace.slots) {
    slot.resize(static_cast<std::size_t>(cfg.num_users));
    for (std::size_t u = 0; u < slot.size(); ++u) {
      if (!active(rng)) continue;
      int k = 0;
      while (k < 1) k = count(rng);
      k = std::min(k, max_count);
      auto& list = slot[u];
      int attempts = 0;
      while (static_cast<int>(list.size()) < k && attempts < 64 * k) {
        ++attempts;
        const std::size_t c = user_category[u](rng);
        const VideoId i = catalog.category_members(static_cast<int>(c))[within[c](rng)];
        if (std::find(list.begin(), list.end(), i) == list.end()) list.push_back(i);
      }
      std::sort(list.begin(), list.end());
    }
  }
  return trace;
}

VideoCatalog parse_catalog_csv(std::istream& in) {
  csv::Reader reader(in, {"video_id", "category_id", "size"});
  std::vector<Video> videos;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    Video v;
    v.id = static_cast<VideoId>(csv::parse_int(fields[0], reader.line()));
    v.category_id = static_cast<int>(csv::parse_int(fields[1], reader.line()));
    v.size = csv::parse_double(fields[2], reader.line());
    if (!(v.size > 0.0 && v.size <= 1.0)) throw ParseError("size must lie in (0,1]", reader.line());
    videos.push_back(v);
  }
  return VideoCatalog(std::move(videos));
}

GenuineTrace parse_trace_csv(std::istream& in, const VideoCatalog& catalog, int num_users) {
  csv::Reader reader(in, {"user_id", "slot", "video_id"});
  struct Row {
    int user, slot;
    VideoId video;
  };
  std::vector<Row> rows;
  std::vector<std::string> fields;
  int max_user = num_users - 1;
  int max_slot = 0;
  while (reader.next(fields)) {
    Row row{};
    row.user = static_cast<int>(csv::parse_int(fields[0], reader.line()));
    row.slot = static_cast<int>(csv::parse_int(fields[1], reader.line()));
    row.video = static_cast<VideoId>(csv::parse_int(fields[2], reader.line()));
    if (row.user < 0) throw ParseError("negative user_id", reader.line());
    if (row.slot < 1) throw ParseError("slots are 1-based", reader.line());
    if (row.video < 0 || static_cast<std::size_t>(row.video) >= catalog.size()) {
      throw IntegrityError("line " + std::to_string(reader.line()) + ": video id " + std::to_string(row.video) +
                           " not in catalog");
    }
    max_user = std::max(max_user, row.user);
    max_slot = std::max(max_slot, row.slot);
    rows.push_back(row);
  }

  GenuineTrace trace;
  trace.num_users = max_user + 1;
  trace.first_slot = 1;
  trace.slots.assign(static_cast<std::size_t>(max_slot), SlotRequests(static_cast<std::size_t>(trace.num_users)));
  for (const Row& row : rows) {
    trace.slots[static_cast<std::size_t>(row.slot - 1)][static_cast<std::size_t>(row.user)].push_back(row.video);
  }
  for (auto& slot : trace.slots) {
    for (auto& list : slot) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
  }
  return trace;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

LoadedTrace load_trace(const std::filesystem::path& catalog_csv, const std::filesystem::path& trace_csv) {
  LoadedTrace loaded;
  {
    auto in = open_input(catalog_csv);
    loaded.catalog = parse_catalog_csv(in);
  }
  auto in = open_input(trace_csv);
  loaded.trace = parse_trace_csv(in, loaded.catalog);
  return loaded;
}

LoadedTrace load_trace(const std::filesystem::path& dir) {
  return load_trace(dir / "catalog.csv", dir / "trace.csv");
}

void write_catalog_csv(std::ostream& out, const VideoCatalog& catalog) {
  out << "video_id,category_id,size\n";
  for (const Video& v : catalog.videos()) {
    out << v.id << ',' << v.category_id << ',' << csv::format_double(v.size) << '\n';
  }
}

void write_trace_csv(std::ostream& out, const GenuineTrace& trace) {
  out << "user_id,slot,video_id\n";
  for (int k = 0; k < trace.num_slots(); ++k) {
    const auto& slot = trace.slots[static_cast<std::size_t>(k)];
    for (std::size_t u = 0; u < slot.size(); ++u) {
      for (VideoId i : slot[u]) out << u << ',' << trace.first_slot + k << ',' << i << '\n';
    }
  }
}

void export_trace(const std::filesystem::path& dir, const VideoCatalog& catalog, const GenuineTrace& trace) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_output(dir / "catalog.csv");
    write_catalog_csv(out, catalog);
  }
  auto out = open_output(dir / "trace.csv");
  write_trace_csv(out, trace);
  if (!out) throw IoError("failed writing " + (dir / "trace.csv").string());
}

std::pair<GenuineTrace, GenuineTrace> split_trace(const GenuineTrace& trace, double warmup_fraction) {
  if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) {
    throw ConfigError("warmup fraction must lie in (0,1)");
  }
  if (trace.slots.empty()) throw ConfigError("cannot split an empty trace");
  const int cut = static_cast<int>(std::floor(warmup_fraction * trace.num_slots()));
  if (cut <= 0) throw ConfigError("warmup fraction leaves no warmup slots");
  if (cut >= trace.num_slots()) throw ConfigError("warmup fraction leaves no test slots");

  GenuineTrace warmup, test;
  warmup.num_users = test.num_users = trace.num_users;
  warmup.first_slot = trace.first_slot;
  test.first_slot = trace.first_slot + cut;
  warmup.slots.assign(trace.slots.begin(), trace.slots.begin() + cut);
  test.slots.assign(trace.slots.begin() + cut, trace.slots.end());
  return {std::move(warmup), std::move(test)};
}

std::uint64_t trace_digest(const GenuineTrace& trace) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::int64_t value) {
    for (int b = 0; b < 8; ++b) {
      h ^= static_cast<std::uint64_t>(value >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(trace.num_users);
  mix(trace.first_slot);
  for (const auto& slot : trace.slots) {
    mix(-1);
    for (const auto& list : slot) {
      mix(-2);
      for (VideoId i : list) mix(i);
    }
  }
  return h;
}

}  // namespace crvr
