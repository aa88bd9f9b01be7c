#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "crvr/engine.hpp"
#include "crvr/errors.hpp"

namespace crvr {
namespace fs = std::filesystem;
namespace {

GenuineTrace trace_of(int users, int first_slot, std::vector<SlotRequests> slots) {
  GenuineTrace t;
  t.num_users = users;
  t.first_slot = first_slot;
  t.slots = std::move(slots);
  return t;
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("crvr_engine_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig small_experiment() {
  auto cfg = default_experiment();
  cfg.trace.num_users = 12;
  cfg.trace.num_videos = 120;
  cfg.trace.num_categories = 4;
  cfg.trace.num_slots = 60;
  cfg.trace.rng_seed = 4;
  cfg.seed = 4;
  return cfg;
}

TEST(RunSimulation, ZeroSlotTestTrace) {
  const VideoCatalog catalog({{0, 0, 1.0}, {1, 0, 0.5}});
  const auto warm = trace_of(2, 1, {{{0}, {}}});
  const auto test = trace_of(2, 2, {});
  RunConfig cfg;
  const auto r = run_simulation(catalog, warm, test, cfg);
  EXPECT_EQ(r.num_slots(), 0);
  EXPECT_TRUE(r.utility.empty());
  EXPECT_FALSE(compute_chr(r).has_value());
  EXPECT_FALSE(compute_bor(r, catalog).has_value());
}

// Independent replay of the moving-average demand estimate and the piecewise
// leader rule for one video.
double replay_leader(double estimate, double c, const GameParams& p) {
  const double theta = p.beta_e * p.eps_e;
  if (estimate < theta) return 0.0;
  if (estimate > theta * (1 + c)) return 1.0;
  return (estimate - theta) / (theta * c);
}

TEST(RunSimulation, NoRedundancyWithEdgeCachingMatchesHandReplay) {
  const VideoCatalog catalog({{0, 0, 1.0}, {1, 0, 0.5}});
  const auto test = trace_of(3, 1, {{{0}, {0}, {1}}, {{}, {1}, {0}}, {{1}, {}, {}}});
  RunConfig cfg;
  cfg.arm = {Requester::kNr, CachePolicy::kEvc};
  const auto r = run_simulation(catalog, trace_of(3, 1, {}), test, cfg);
  const auto& p = cfg.params;

  double est[2] = {0, 0};
  double served = 0.0;
  double requested = 0.0;
  std::vector<std::vector<std::uint8_t>> held(3, std::vector<std::uint8_t>(2, 0));
  std::vector<double> prev_totals{0, 0};
  for (const auto& slot : test.slots) {
    double e[2];
    for (int i = 0; i < 2; ++i) {
      est[i] = (1 - p.rho) * prev_totals[i] + p.rho * est[i];
      e[i] = replay_leader(est[i], catalog.size_of(i), p);
    }
    prev_totals = {0, 0};
    for (int u = 0; u < 3; ++u) {
      for (VideoId i : slot[u]) {
        prev_totals[i] += 1;
        if (held[u][i]) continue;
        held[u][i] = 1;
        served += e[i] * catalog.size_of(i);
        requested += catalog.size_of(i);
      }
    }
  }
  ASSERT_TRUE(compute_bor(r, catalog).has_value());
  EXPECT_NEAR(*compute_bor(r, catalog), served / requested, 1e-12);
  EXPECT_NEAR(*compute_bor(r, catalog), 1.0 / 3.0, 1e-9);
  EXPECT_EQ(compute_chr(r), 0.0);
  // Every user ends up holding both videos, so no profile discloses anything.
  const auto pdr = compute_pdr(r);
  EXPECT_EQ(pdr.excluded.size(), 3u);
  EXPECT_FALSE(pdr.mean.has_value());
}

TEST(RunSimulation, LeaderActsFirstInEverySlot) {
  const auto cfg = small_experiment();
  const auto data = experiment_trace(cfg);
  const auto [warm, test] = split_trace(data.trace, cfg.warmup_fraction);
  for (auto cache : {CachePolicy::kEvc, CachePolicy::kLru}) {
    RunConfig rc;
    rc.arm = {Requester::kCrvr, cache};
    rc.cache_capacity = 2.0;
    const auto r = run_simulation(data.catalog, warm, test, rc);
    ASSERT_EQ(r.sequence.size(), 3u * static_cast<std::size_t>(test.num_slots()));
    for (std::size_t k = 0; k < r.sequence.size(); k += 3) {
      const int t = r.sequence[k].first;
      ASSERT_EQ(r.sequence[k], std::make_pair(t, Phase::kLeader));
      ASSERT_EQ(r.sequence[k + 1], std::make_pair(t, Phase::kFollowers));
      ASSERT_EQ(r.sequence[k + 2], std::make_pair(t, Phase::kApply));
    }
  }
}

TEST(Sweep, CardinalityDigestAndRedundancyTrend) {
  auto cfg = small_experiment();
  cfg.values = {0.01, 0.1, 1.0};
  const auto out = sweep(cfg);
  ASSERT_EQ(out.rows.size(), 3u * cfg.arms.size());
  for (const auto& run : out.runs) EXPECT_EQ(run.trace_digest, out.runs.front().trace_digest);
  for (const auto& row : out.rows) {
    if (row.arm.requester == Requester::kNr) {
      EXPECT_DOUBLE_EQ(*row.pdr, 1.0);
      EXPECT_EQ(*row.chr, 0.0);
    }
    if (row.bor) {
      EXPECT_GE(*row.bor, 0.0);
      EXPECT_LE(*row.bor, 1.0);
    }
  }
  std::vector<double> crvr;
  for (const auto& row : out.rows) {
    if (row.arm == Arm{Requester::kCrvr, CachePolicy::kEvc}) crvr.push_back(row.redundant);
  }
  ASSERT_EQ(crvr.size(), 3u);
  EXPECT_GE(crvr[0], crvr[1]);
  EXPECT_GE(crvr[1], crvr[2]);
}

TEST(Sweep, RedundancyFallsStrictlyWithPrivacyWeightOnDefaultTrace) {
  auto cfg = default_experiment();
  cfg.arms = {{Requester::kCrvr, CachePolicy::kEvc}};
  cfg.values = {0.01, 0.1, 1.0};
  const auto out = sweep(cfg);
  ASSERT_EQ(out.rows.size(), 3u);
  EXPECT_GT(out.rows[0].redundant, out.rows[1].redundant);
  EXPECT_GT(out.rows[1].redundant, out.rows[2].redundant);
}

TEST(Sweep, RandomBudgetAndBaselineCapacityComeFromHelperRuns) {
  auto cfg = small_experiment();
  cfg.arms = parse_arm_list("random-lru,crvr-evc");
  const auto out = sweep(cfg);
  ASSERT_EQ(out.rows.size(), 2u);
  const auto& random = out.rows[0];
  const auto& crvr = out.rows[1];
  EXPECT_DOUBLE_EQ(random.budget, crvr.redundant);
  EXPECT_GT(random.capacity, 0.0);
}

TEST(Export, FileSetAndStableBytes) {
  auto cfg = small_experiment();
  cfg.arms = {{Requester::kNr, CachePolicy::kEvc}};
  const auto out = sweep(cfg);
  const auto dir = scratch_dir("one");
  export_results(out, dir);
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 4);
  const auto summary = slurp(dir / "summary.csv");
  const auto dir2 = scratch_dir("two");
  export_results(out, dir2);
  for (const auto& e : fs::directory_iterator(dir)) {
    EXPECT_EQ(slurp(e.path()), slurp(dir2 / e.path().filename())) << e.path();
  }
  EXPECT_EQ(summary.rfind("axis,value,arm,pdr,chr,bor,redundant,budget,capacity\n", 0), 0u);
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST(Export, EmptyResultsGiveHeaderOnlySummary) {
  const auto dir = scratch_dir("empty");
  export_results(SweepOutput{}, dir);
  EXPECT_EQ(slurp(dir / "summary.csv"), "axis,value,arm,pdr,chr,bor,redundant,budget,capacity\n");
  fs::remove_all(dir);
}

TEST(Export, UnwritableDirectoryNamesPath) {
  const auto dir = scratch_dir("blocked");
  { std::ofstream(dir.string()) << "file"; }
  try {
    export_results(SweepOutput{}, dir / "sub");
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(dir.string()), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(Determinism, RepeatedSweepsAreByteIdentical) {
  auto cfg = small_experiment();
  cfg.arms = parse_arm_list("crvr-evc,random-evc,crvr-lfu");
  std::string first;
  for (int k = 0; k < 2; ++k) {
    const auto out = sweep(cfg);
    std::ostringstream all;
    write_summary_csv(all, out.rows);
    for (const auto& run : out.runs) {
      write_actions_csv(all, run);
      write_utility_csv(all, run);
    }
    if (k == 0) first = all.str();
    else EXPECT_EQ(all.str(), first);
  }
}

TEST(Config, TextParsingAndErrors) {
  auto cfg = default_experiment();
  std::istringstream in(
      "# experiment\n"
      "gamma = 0.5\n"
      "users = 7   # trailing comment\n"
      "arms = crvr-evc, nr-lru\n"
      "axis = beta_e\n"
      "values = 0.05,0.1,0.5\n"
      "follower_rule = rounded\n"
      "newcomers = include_self\n"
      "pdr_denominator = public\n"
      "snapshots = yes\n");
  apply_config_text(cfg, in);
  EXPECT_EQ(cfg.params.gamma, 0.5);
  EXPECT_EQ(cfg.trace.num_users, 7);
  EXPECT_EQ(cfg.arms, (std::vector<Arm>{{Requester::kCrvr, CachePolicy::kEvc}, {Requester::kNr, CachePolicy::kLru}}));
  EXPECT_EQ(cfg.axis, SweepAxis::kBetaE);
  EXPECT_EQ(cfg.values, (std::vector<double>{0.05, 0.1, 0.5}));
  EXPECT_EQ(cfg.follower.rule, FollowerRule::kRoundedRelaxed);
  EXPECT_EQ(cfg.follower.convention, NewcomerConvention::kIncludeSelf);
  EXPECT_EQ(cfg.pdr_denominator, PdrDenominator::kPublicAggregates);
  EXPECT_TRUE(cfg.snapshots);

  EXPECT_THROW(set_config_value(cfg, "colour", "blue"), ConfigError);
  EXPECT_THROW(set_config_value(cfg, "users", "3.5"), ConfigError);
  EXPECT_THROW(set_config_value(cfg, "gamma", "abc"), ConfigError);
  EXPECT_THROW(parse_arm("crvr-fifo"), ConfigError);
  EXPECT_THROW(parse_axis("delta"), ConfigError);
  std::istringstream bad("gamma 0.1\n");
  EXPECT_THROW(apply_config_text(cfg, bad), ConfigError);

  cfg.values = {0.1, -1.0};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.values = {0.1};
  cfg.arms.clear();
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Config, ArmNamesRoundTrip) {
  for (auto req : {Requester::kCrvr, Requester::kNr, Requester::kRandom}) {
    for (auto cache : {CachePolicy::kEvc, CachePolicy::kLru, CachePolicy::kLfu}) {
      const Arm arm{req, cache};
      EXPECT_EQ(parse_arm(arm_name(arm)), arm);
    }
  }
  EXPECT_EQ(file_stem("crvr-evc_gamma-0.1"), "crvr-evc_gamma-0.1");
  EXPECT_EQ(file_stem("a/b c"), "a_b_c");
}

}  // namespace
}  // namespace crvr
