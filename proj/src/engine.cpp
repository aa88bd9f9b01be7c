#include "crvr/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "crvr/csv.hpp"
#include "crvr/errors.hpp"
#include "crvr/utility.hpp"

namespace crvr {

std::string arm_name(const Arm& arm) {
  std::string out;
  switch (arm.requester) {
    case Requester::kCrvr: out = "crvr"; break;
    case Requester::kNr: out = "nr"; break;
    case Requester::kRandom: out = "random"; break;
  }
  switch (arm.cache) {
    case CachePolicy::kEvc: return out + "-evc";
    case CachePolicy::kLru: return out + "-lru";
    case CachePolicy::kLfu: return out + "-lfu";
  }
  return out;
}

Arm parse_arm(const std::string& name) {
  const auto dash = name.find('-');
  const std::string req = name.substr(0, dash);
  const std::string cache = dash == std::string::npos ? "evc" : name.substr(dash + 1);
  Arm arm;
  if (req == "crvr") arm.requester = Requester::kCrvr;
  else if (req == "nr") arm.requester = Requester::kNr;
  else if (req == "random") arm.requester = Requester::kRandom;
  else throw ConfigError("unknown requesting strategy '" + req + "' in arm '" + name + "'");
  if (cache == "evc") arm.cache = CachePolicy::kEvc;
  else if (cache == "lru") arm.cache = CachePolicy::kLru;
  else if (cache == "lfu") arm.cache = CachePolicy::kLfu;
  else throw ConfigError("unknown caching policy '" + cache + "' in arm '" + name + "'");
  return arm;
}

namespace {

constexpr std::uint64_t kRandomStream = 0x5851f42d4c957f2dULL;

// Mean over users of the weighted utility terms for the slot about to be
// applied, with the realized first-time counts.
UtilitySample slot_utility(const SystemState& s, const VideoCatalog& catalog, const ActionProfile& actions,
                           const ActionProfile& genuine, const GameParams& params) {
  UtilitySample sample;
  const auto first_time = first_time_request_count(s, actions);
  const auto totals = action_totals(actions, s.num_videos);
  std::vector<VideoId> contested;
  for (VideoId i = 0; i < s.num_videos; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (first_time[k] > 0) contested.push_back(i);
    sample.ec += ec_video_utility(s.ec_strategy[k], totals[k], catalog.size_of(i), params);
  }
  if (s.num_users == 0) return sample;

  std::vector<int> extra(static_cast<std::size_t>(s.num_categories));
  std::vector<VideoId> videos;
  for (UserId u = 0; u < s.num_users; ++u) {
    const auto& a = actions[static_cast<std::size_t>(u)];
    const auto& x = genuine[static_cast<std::size_t>(u)];
    std::fill(extra.begin(), extra.end(), 0);
    for (VideoId i : x) {
      if (!s.watched(u, i)) ++extra[static_cast<std::size_t>(s.video_category[static_cast<std::size_t>(i)])];
    }
    videos.clear();
    std::set_union(contested.begin(), contested.end(), a.begin(), a.end(), std::back_inserter(videos));
    for (VideoId i : videos) {
      const auto k = static_cast<std::size_t>(i);
      const bool act = std::binary_search(a.begin(), a.end(), i);
      const bool seen = s.watched(u, i) || std::binary_search(x.begin(), x.end(), i);
      const int cat = s.video_category[k];
      UdContext c;
      c.view_pref =
          seen ? 0.0 : (s.category_watch_count(u, cat) + extra[static_cast<std::size_t>(cat)]) / double(s.slot);
      c.popularity = s.popularity[k];
      c.size = catalog.size_of(i);
      c.requested_before = s.requested(u, i);
      c.requested_by = s.request_counts[k];
      c.newcomers = first_time[k] - ((act && !c.requested_before) ? 1 : 0);
      c.anchor = s.anchor;
      c.ec_fraction = s.ec_strategy[k];
      c.params = params;
      const auto terms = ud_terms(c, act);
      sample.benefit += terms.benefit;
      sample.disclosure += params.gamma * terms.disclosure;
      sample.cost += params.beta * terms.cost;
    }
  }
  sample.benefit /= s.num_users;
  sample.disclosure /= s.num_users;
  sample.cost /= s.num_users;
  return sample;
}

}  // namespace

RunResult run_simulation(const VideoCatalog& catalog, const GenuineTrace& warmup, const GenuineTrace& test,
                         const RunConfig& cfg) {
  cfg.params.validate();
  test.validate(catalog);
  const int users = test.num_users;
  SystemState state = init_state(catalog, users, warmup, cfg.params);
  if (warmup.slots.empty()) state.slot = test.first_slot;
  if (state.slot != test.first_slot) throw ConfigError("test trace does not start right after the warmup");

  std::optional<BoundedCache> cache;
  if (cfg.arm.cache == CachePolicy::kLru) cache.emplace(cfg.cache_capacity, EvictionPolicy::kLru, catalog);
  if (cfg.arm.cache == CachePolicy::kLfu) cache.emplace(cfg.cache_capacity, EvictionPolicy::kLfu, catalog);
  std::mt19937_64 rng(cfg.seed ^ kRandomStream);

  RunResult r;
  r.label = cfg.label.empty() ? arm_name(cfg.arm) : cfg.label;
  r.params = cfg.params;
  r.num_users = users;
  r.num_videos = static_cast<int>(catalog.size());
  r.first_slot = test.first_slot;
  r.trace_digest = trace_digest(test);
  if (cfg.snapshots) write_snapshot_header(*cfg.snapshots);

  for (int k = 0; k < test.num_slots(); ++k) {
    const int t = test.first_slot + k;
    const ActionProfile& genuine = test.slots[static_cast<std::size_t>(k)];

    if (cfg.arm.cache == CachePolicy::kEvc) {
      evc_step(state, catalog, cfg.params);
    } else {
      state.ec_strategy = cache->indicator();
    }
    r.sequence.emplace_back(t, Phase::kLeader);

    refresh_newcomer_estimate(state, cfg.params);
    ActionProfile actions(static_cast<std::size_t>(users));
    std::vector<std::uint8_t> replayed(static_cast<std::size_t>(users), 0);
    for (UserId u = 0; u < users; ++u) {
      const auto& x = genuine[static_cast<std::size_t>(u)];
      auto& a = actions[static_cast<std::size_t>(u)];
      switch (cfg.arm.requester) {
        case Requester::kCrvr: {
          auto d = crvr_step(state, catalog, u, state.ec_strategy, x, cfg.params, cfg.follower);
          a = std::move(d.actions);
          replayed[static_cast<std::size_t>(u)] = d.replayed;
          break;
        }
        case Requester::kNr: a = nr_request(x); break;
        case Requester::kRandom:
          if (!x.empty()) {
            a = random_request(x, cfg.random_budget, state.num_videos,
                               [&](VideoId i) { return state.requested(u, i); }, rng);
          }
          break;
      }
    }
    r.sequence.emplace_back(t, Phase::kFollowers);

    std::vector<EdgeRequest> edge;
    std::vector<int> fresh(static_cast<std::size_t>(users), 0);
    for (UserId u = 0; u < users; ++u) {
      const auto& x = genuine[static_cast<std::size_t>(u)];
      for (VideoId i : actions[static_cast<std::size_t>(u)]) {
        if (state.locally_cached(u, i)) continue;
        edge.push_back({u, i});
        if (!std::binary_search(x.begin(), x.end(), i)) ++fresh[static_cast<std::size_t>(u)];
      }
      for (VideoId i : x) {
        if (!state.watched(u, i)) r.watch_log.push_back({t, u, i, state.requested(u, i)});
      }
    }

    check_anchor(state, first_time_request_count(state, actions));
    r.utility.push_back(slot_utility(state, catalog, actions, genuine, cfg.params));
    double load = 0.0;
    for (VideoId i = 0; i < state.num_videos; ++i) load += state.ec_strategy[static_cast<std::size_t>(i)] * catalog.size_of(i);
    r.cache_load.push_back(load);
    r.ec_history.push_back(state.ec_strategy);
    if (cfg.snapshots) write_snapshot(*cfg.snapshots, state);

    apply_round(state, actions, genuine, cfg.params);
    r.sequence.emplace_back(t, Phase::kApply);

    if (cache) {
      for (const auto& req : edge) cache->access(req.video);
    }
    r.actions.push_back(std::move(actions));
    r.genuine.push_back(genuine);
    r.replayed.push_back(std::move(replayed));
    r.fresh_redundant.push_back(std::move(fresh));
    r.edge_requests.push_back(std::move(edge));
  }

  r.final_public = state.public_profile;
  r.final_private = state.private_profile;
  return r;
}

std::string axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kGamma: return "gamma";
    case SweepAxis::kBeta: return "beta";
    case SweepAxis::kBetaE: return "beta_e";
    case SweepAxis::kRedundantBudget: return "budget";
  }
  return "";
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "gamma") return SweepAxis::kGamma;
  if (name == "beta") return SweepAxis::kBeta;
  if (name == "beta_e") return SweepAxis::kBetaE;
  if (name == "budget") return SweepAxis::kRedundantBudget;
  throw ConfigError("unknown sweep axis '" + name + "' (gamma, beta, beta_e, budget)");
}

void ExperimentConfig::validate() const {
  params.validate();
  if (!trace_dir) trace.validate();
  if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) throw ConfigError("warmup_fraction must lie in (0,1)");
  if (arms.empty()) throw ConfigError("at least one arm is required");
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  for (double v : values) {
    if (!(v > 0.0)) throw ConfigError("sweep values must be positive");
  }
}

ExperimentConfig default_experiment() {
  ExperimentConfig cfg;
  cfg.trace.num_users = 100;
  cfg.trace.num_videos = 2000;
  cfg.trace.num_categories = 20;
  cfg.trace.num_slots = 1000;
  cfg.arms = {{Requester::kCrvr, CachePolicy::kEvc}, {Requester::kNr, CachePolicy::kEvc},
              {Requester::kRandom, CachePolicy::kEvc}};
  cfg.axis = SweepAxis::kGamma;
  cfg.values = {0.1};
  return cfg;
}

std::vector<double> parse_value_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& field : csv::split(text)) {
    if (field.empty()) continue;
    out.push_back(csv::parse_double(field, 0));
  }
  return out;
}

std::vector<Arm> parse_arm_list(const std::string& text) {
  std::vector<Arm> out;
  for (auto field : csv::split(text)) {
    const auto b = field.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    field = field.substr(b, field.find_last_not_of(" \t") - b + 1);
    out.push_back(parse_arm(field));
  }
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("bad boolean for " + key + ": '" + v + "'");
}

}  // namespace

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  auto num = [&] {
    try {
      return csv::parse_double(value, 0);
    } catch (const ParseError&) {
      throw ConfigError("bad number for " + key + ": '" + value + "'");
    }
  };
  auto integer = [&] {
    const double v = num();
    if (v != std::floor(v)) throw ConfigError("expected an integer for " + key);
    return static_cast<long long>(v);
  };

  if (key == "trace_dir") cfg.trace_dir = value;
  else if (key == "users") cfg.trace.num_users = static_cast<int>(integer());
  else if (key == "videos") cfg.trace.num_videos = static_cast<int>(integer());
  else if (key == "categories") cfg.trace.num_categories = static_cast<int>(integer());
  else if (key == "slots") cfg.trace.num_slots = static_cast<int>(integer());
  else if (key == "zipf_exponent") cfg.trace.zipf_exponent = num();
  else if (key == "mean_requests") cfg.trace.mean_requests_per_active_slot = num();
  else if (key == "activity") cfg.trace.user_activity_prob = num();
  else if (key == "pref_concentration") cfg.trace.pref_concentration = num();
  else if (key == "trace_seed") cfg.trace.rng_seed = static_cast<std::uint64_t>(integer());
  else if (key == "warmup_fraction") cfg.warmup_fraction = num();
  else if (key == "gamma") cfg.params.gamma = num();
  else if (key == "beta") cfg.params.beta = num();
  else if (key == "beta_e") cfg.params.beta_e = num();
  else if (key == "eps_e") cfg.params.eps_e = num();
  else if (key == "eps_u") cfg.params.eps_u = num();
  else if (key == "delta") cfg.params.delta = num();
  else if (key == "rho") cfg.params.rho = num();
  else if (key == "anchor_k") cfg.params.anchor_k = static_cast<int>(integer());
  else if (key == "arms") cfg.arms = parse_arm_list(value);
  else if (key == "axis") cfg.axis = parse_axis(value);
  else if (key == "values") cfg.values = parse_value_list(value);
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(integer());
  else if (key == "out") cfg.output_dir = value;
  else if (key == "snapshots") cfg.snapshots = parse_bool(key, value);
  else if (key == "follower_rule") {
    if (value == "exact") cfg.follower.rule = FollowerRule::kExactBinary;
    else if (value == "rounded") cfg.follower.rule = FollowerRule::kRoundedRelaxed;
    else throw ConfigError("follower_rule must be exact or rounded");
  } else if (key == "newcomers") {
    if (value == "exclude_self") cfg.follower.convention = NewcomerConvention::kExcludeSelf;
    else if (value == "include_self") cfg.follower.convention = NewcomerConvention::kIncludeSelf;
    else throw ConfigError("newcomers must be exclude_self or include_self");
  } else if (key == "pdr_denominator") {
    if (value == "genuine") cfg.pdr_denominator = PdrDenominator::kGenuineAggregates;
    else if (value == "public") cfg.pdr_denominator = PdrDenominator::kPublicAggregates;
    else throw ConfigError("pdr_denominator must be genuine or public");
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void apply_config_text(ExperimentConfig& cfg, std::istream& in) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    try {
      set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(number) + ": " + e.what());
    }
  }
}

void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  apply_config_text(cfg, in);
}

LoadedTrace experiment_trace(const ExperimentConfig& cfg) {
  if (cfg.trace_dir) return load_trace(*cfg.trace_dir);
  LoadedTrace data;
  data.catalog = generate_catalog(cfg.trace);
  data.trace = generate_trace(data.catalog, cfg.trace);
  return data;
}

SweepOutput sweep(const ExperimentConfig& cfg) { return sweep(cfg, experiment_trace(cfg)); }

namespace {

std::string value_text(double v) { return csv::format_double(v); }

GameParams params_at(const ExperimentConfig& cfg, double value) {
  GameParams p = cfg.params;
  switch (cfg.axis) {
    case SweepAxis::kGamma: p.gamma = value; break;
    case SweepAxis::kBeta: p.beta = value; break;
    case SweepAxis::kBetaE: p.beta_e = value; break;
    case SweepAxis::kRedundantBudget: break;
  }
  return p;
}

}  // namespace

SweepOutput sweep(const ExperimentConfig& cfg, const LoadedTrace& data) {
  cfg.validate();
  const auto [warmup, test] = split_trace(data.trace, cfg.warmup_fraction);

  SweepOutput out;
  out.catalog = data.catalog;
  out.trace_digest = trace_digest(data.trace);

  for (double value : cfg.values) {
    const GameParams params = params_at(cfg, value);
    std::map<Arm, RunResult> done;

    // Runs memoized per value so helper arms (budget and capacity sources) are computed once.
    std::function<const RunResult&(const Arm&)> get = [&](const Arm& arm) -> const RunResult& {
      if (auto it = done.find(arm); it != done.end()) return it->second;
      RunConfig rc;
      rc.arm = arm;
      rc.params = params;
      rc.follower = cfg.follower;
      rc.seed = cfg.seed;
      rc.label = arm_name(arm) + "_" + axis_name(cfg.axis) + "-" + value_text(value);
      if (arm.requester == Requester::kRandom) {
        rc.random_budget = cfg.axis == SweepAxis::kRedundantBudget
                               ? value
                               : get({Requester::kCrvr, CachePolicy::kEvc}).average_redundant_count();
      }
      if (arm.cache != CachePolicy::kEvc) {
        rc.cache_capacity = derive_equivalent_capacity(get({arm.requester, CachePolicy::kEvc}));
      }
      std::ofstream snap;
      if (cfg.snapshots) {
        std::filesystem::create_directories(cfg.output_dir);
        const auto path = cfg.output_dir / ("snapshot_" + file_stem(rc.label) + ".csv");
        snap.open(path);
        if (!snap) throw IoError("cannot write " + path.string());
        rc.snapshots = &snap;
      }
      RunResult run = run_simulation(data.catalog, warmup, test, rc);
      return done.emplace(arm, std::move(run)).first->second;
    };

    for (const Arm& arm : cfg.arms) {
      const RunResult& run = get(arm);
      SweepRow row;
      row.axis = cfg.axis;
      row.value = value;
      row.arm = arm;
      row.label = run.label;
      row.pdr = compute_pdr(run, cfg.pdr_denominator).mean;
      row.chr = compute_chr(run);
      row.bor = compute_bor(run, data.catalog);
      row.redundant = run.average_redundant_count();
      if (arm.requester == Requester::kRandom) {
        row.budget = cfg.axis == SweepAxis::kRedundantBudget
                         ? value
                         : get({Requester::kCrvr, CachePolicy::kEvc}).average_redundant_count();
      }
      if (arm.cache != CachePolicy::kEvc) row.capacity = derive_equivalent_capacity(get({arm.requester, CachePolicy::kEvc}));
      out.rows.push_back(row);
      out.runs.push_back(run);
    }
  }
  return out;
}

std::string file_stem(const std::string& label) {
  std::string out = label;
  for (char& ch : out) {
    const bool keep = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                      ch == '-' || ch == '_' || ch == '.';
    if (!keep) ch = '_';
  }
  return out;
}

void write_actions_csv(std::ostream& out, const RunResult& run) {
  out << "slot,user_id,video_id,genuine,replayed\n";
  for (std::size_t k = 0; k < run.actions.size(); ++k) {
    const int t = run.first_slot + static_cast<int>(k);
    for (std::size_t u = 0; u < run.actions[k].size(); ++u) {
      const auto& x = run.genuine[k][u];
      for (VideoId i : run.actions[k][u]) {
        out << t << ',' << u << ',' << i << ',' << (std::binary_search(x.begin(), x.end(), i) ? 1 : 0) << ','
            << int(run.replayed[k][u]) << '\n';
      }
    }
  }
}

void write_utility_csv(std::ostream& out, const RunResult& run) {
  using csv::format_double;
  out << "slot,benefit,disclosure,cost,ud_total,ec\n";
  for (std::size_t k = 0; k < run.utility.size(); ++k) {
    const auto& s = run.utility[k];
    out << run.first_slot + static_cast<int>(k) << ',' << format_double(s.benefit) << ','
        << format_double(s.disclosure) << ',' << format_double(s.cost) << ',' << format_double(s.ud_total()) << ','
        << format_double(s.ec) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  using csv::format_double;
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
  out << "axis,value,arm,pdr,chr,bor,redundant,budget,capacity\n";
  for (const auto& r : rows) {
    out << axis_name(r.axis) << ',' << format_double(r.value) << ',' << arm_name(r.arm) << ',' << opt(r.pdr) << ','
        << opt(r.chr) << ',' << opt(r.bor) << ',' << format_double(r.redundant) << ',' << format_double(r.budget)
        << ',' << format_double(r.capacity) << '\n';
  }
}

namespace {

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  fn(out);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void export_results(const SweepOutput& output, const std::filesystem::path& dir, PdrDenominator denominator) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& run : output.runs) {
    const auto stem = file_stem(run.label);
    write_file(dir / ("metrics_" + stem + ".csv"),
               [&](std::ostream& o) { write_metrics_csv(o, run, output.catalog, denominator); });
    write_file(dir / ("actions_" + stem + ".csv"), [&](std::ostream& o) { write_actions_csv(o, run); });
    write_file(dir / ("utility_" + stem + ".csv"), [&](std::ostream& o) { write_utility_csv(o, run); });
  }
  write_file(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, output.rows); });
}

}  // namespace crvr
