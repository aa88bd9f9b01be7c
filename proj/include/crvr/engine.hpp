#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crvr/baselines.hpp"
#include "crvr/catalog_trace.hpp"
#include "crvr/metrics.hpp"
#include "crvr/online.hpp"

namespace crvr {

enum class Requester { kCrvr, kNr, kRandom };
enum class CachePolicy { kEvc, kLru, kLfu };

struct Arm {
  Requester requester = Requester::kCrvr;
  CachePolicy cache = CachePolicy::kEvc;

  bool operator==(const Arm&) const = default;
  auto operator<=>(const Arm&) const = default;
};

/// "crvr-evc", "random-lfu", ...
std::string arm_name(const Arm& arm);
/// Inverse of arm_name; throws ConfigError.
Arm parse_arm(const std::string& name);

struct RunConfig {
  Arm arm;
  GameParams params;
  CrvrOptions follower;
  double random_budget = 0.0;   // RANDOM only
  double cache_capacity = 0.0;  // LRU/LFU only
  std::uint64_t seed = 1;
  std::string label;
  std::ostream* snapshots = nullptr;  // optional `slot,video_id,m,phat,e` stream
};

/// Replays `warmup` as genuine-only requests, then runs every test slot:
/// leader step, newcomer-estimate refresh, follower steps, state update.
RunResult run_simulation(const VideoCatalog& catalog, const GenuineTrace& warmup, const GenuineTrace& test,
                         const RunConfig& cfg);

enum class SweepAxis { kGamma, kBeta, kBetaE, kRedundantBudget };

std::string axis_name(SweepAxis axis);
SweepAxis parse_axis(const std::string& name);

struct ExperimentConfig {
  std::optional<std::filesystem::path> trace_dir;  // load instead of generating
  TraceGenConfig trace;
  double warmup_fraction = 0.4;
  GameParams params;
  CrvrOptions follower;
  PdrDenominator pdr_denominator = PdrDenominator::kGenuineAggregates;
  std::vector<Arm> arms;
  SweepAxis axis = SweepAxis::kGamma;
  std::vector<double> values;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "results";
  bool snapshots = false;

  void validate() const;
};

/// Defaults for the desk-scale experiment: 100 users, 2000 videos, 1000 slots
/// with a 0.4 warmup split (600 test slots), arms cRVR/NR/RANDOM with EVC.
ExperimentConfig default_experiment();

/// Reads `key = value` lines; `#` starts a comment. Unknown keys are errors.
void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);
void apply_config_text(ExperimentConfig& cfg, std::istream& in);
/// Sets one key; throws ConfigError on an unknown key or bad value.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

std::vector<double> parse_value_list(const std::string& text);
std::vector<Arm> parse_arm_list(const std::string& text);

struct SweepRow {
  SweepAxis axis = SweepAxis::kGamma;
  double value = 0.0;
  Arm arm;
  std::optional<double> pdr;
  std::optional<double> chr;
  std::optional<double> bor;
  double redundant = 0.0;
  double budget = 0.0;    // RANDOM's redundant budget
  double capacity = 0.0;  // LRU/LFU capacity
  std::string label;
};

struct SweepOutput {
  std::vector<SweepRow> rows;
  std::vector<RunResult> runs;  // aligned with rows
  VideoCatalog catalog;
  std::uint64_t trace_digest = 0;
};

/// Builds or loads the experiment trace and splits it.
LoadedTrace experiment_trace(const ExperimentConfig& cfg);

/// One run per (axis value, arm) on a shared trace and seed. RANDOM's budget
/// comes from the cRVR+EVC run at the same value (or from the value itself on
/// the redundant-budget axis); LRU/LFU capacity from the same requester with EVC.
SweepOutput sweep(const ExperimentConfig& cfg);
SweepOutput sweep(const ExperimentConfig& cfg, const LoadedTrace& data);

/// Safe file stem for a run label.
std::string file_stem(const std::string& label);

void write_actions_csv(std::ostream& out, const RunResult& run);
void write_utility_csv(std::ostream& out, const RunResult& run);
void write_summary_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Per run: metrics_<stem>.csv, actions_<stem>.csv, utility_<stem>.csv; plus
/// summary.csv. Throws IoError naming the path on failure.
void export_results(const SweepOutput& output, const std::filesystem::path& dir,
                    PdrDenominator denominator = PdrDenominator::kGenuineAggregates);

}  // namespace crvr
