#include "crvr/stackelberg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "crvr/constants.hpp"
#include "crvr/csv.hpp"
#include "crvr/errors.hpp"

namespace crvr {
namespace {

// d p (1-e) - beta eps_u: per-unit-size net caching gain of a request.
double net_gain_rate(const UdContext& c) {
  return c.view_pref * c.popularity * (1.0 - c.ec_fraction) - c.params.beta * c.params.eps_u;
}

void require_anchor(const UdContext& c, double newcomers) {
  if (!(c.anchor > 2.0 * (c.requested_by + newcomers))) {
    std::ostringstream msg;
    msg << "anchor K=" << c.anchor << " violates K > 2(m + dn) with m=" << c.requested_by << " dn=" << newcomers;
    throw DomainError(msg.str());
  }
}

int exact_binary(const UdContext& c, NewcomerConvention convention) {
  const double benefit = c.size * net_gain_rate(c);
  if (c.requested_before) return benefit > 0.0 ? 1 : 0;

  // Disclosure rises by ln((n - dn_0) / (m + dn_1)) when the UD switches to a=1.
  const double dn0 = c.newcomers;
  const double dn1 = convention == NewcomerConvention::kExcludeSelf ? c.newcomers + 1.0 : c.newcomers;
  require_anchor(c, dn1);
  if (c.params.gamma == 0.0) return benefit > 0.0 ? 1 : 0;
  const double m_plus = c.requested_by + dn1;
  if (m_plus <= 0.0) return 0;
  const double n = c.anchor - c.requested_by;
  return benefit > c.params.gamma * std::log((n - dn0) / m_plus) ? 1 : 0;
}

}  // namespace

std::optional<double> omega(const FollowerInput& in) {
  const UdContext& c = in.ctx;
  require_anchor(c, c.newcomers);
  const double denom = -c.size * net_gain_rate(c);
  if (denom == 0.0) return std::nullopt;
  const double n = c.anchor - c.requested_by;
  const double big_n = n - c.requested_by - 2.0 * c.newcomers;
  return c.params.gamma / denom + (n - c.newcomers) / big_n;
}

double relaxed_response(const FollowerInput& in) {
  const UdContext& c = in.ctx;
  if (c.requested_before) return net_gain_rate(c) > 0.0 ? 1.0 : 0.0;
  const auto om = omega(in);
  if (!om) return exact_binary(c, NewcomerConvention::kIncludeSelf);
  if (c.size * net_gain_rate(c) <= 0.0) return 0.0;
  return std::clamp(*om, 0.0, 1.0);
}

int follower_best_response(const FollowerInput& in, FollowerRule rule, NewcomerConvention convention) {
  if (in.genuine) return 1;
  if (rule == FollowerRule::kExactBinary || in.ctx.requested_before) return exact_binary(in.ctx, convention);
  if (!omega(in)) return exact_binary(in.ctx, convention);
  return std::floor(relaxed_response(in) + 0.5) >= 1.0 ? 1 : 0;
}

double leader_best_response(double request_total, double size, double beta_e, double eps_e) {
  const double theta = beta_e * eps_e;
  if (request_total < theta) return 0.0;
  if (request_total > theta * (1.0 + size)) return 1.0;
  return std::min(1.0, (request_total - theta) / (theta * size));
}

int GameInstance::requested_by(int i) const {
  int m = 0;
  for (int u = 0; u < num_users; ++u) m += requested_before[index(u, i)];
  return m;
}

UdContext GameInstance::context(int u, int i, double ec, double newcomers) const {
  UdContext c;
  c.view_pref = view_pref[index(u, i)];
  c.popularity = popularity[static_cast<std::size_t>(i)];
  c.size = sizes[static_cast<std::size_t>(i)];
  c.requested_before = requested_before[index(u, i)] != 0;
  c.requested_by = requested_by(i);
  c.newcomers = newcomers;
  c.anchor = anchor();
  c.ec_fraction = ec;
  c.params = params;
  return c;
}

GameInstance instance_from_state(const SystemState& state, const VideoCatalog& catalog, const ActionProfile& genuine,
                                 const GameParams& params) {
  GameInstance g;
  g.num_users = state.num_users;
  g.num_videos = state.num_videos;
  g.params = params;
  g.params.anchor_k = state.anchor;
  g.sizes.resize(catalog.size());
  for (std::size_t i = 0; i < catalog.size(); ++i) g.sizes[i] = catalog.size_of(static_cast<VideoId>(i));
  g.popularity = state.popularity;
  g.requested_before = state.public_profile;
  g.genuine.assign(state.public_profile.size(), 0);
  g.view_pref.assign(state.public_profile.size(), 0.0);
  for (int u = 0; u < g.num_users; ++u) {
    const auto& x = genuine[static_cast<std::size_t>(u)];
    for (VideoId i : x) g.genuine[g.index(u, i)] = 1;
    const auto d = view_preferences_with(state, u, x);
    std::copy(d.begin(), d.end(), g.view_pref.begin() + static_cast<std::ptrdiff_t>(g.index(u, 0)));
  }
  return g;
}

GameInstance random_instance(std::uint64_t seed, int max_users, int max_videos, const GameParams& params) {
  if (max_users < 2 || max_videos < 1) throw ConfigError("random instance needs >= 2 users and >= 1 video");
  std::mt19937_64 rng(seed);
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int users = uniform_int(2, max_users);
  const int videos = uniform_int(1, max_videos);
  const int categories = uniform_int(1, std::min(2, videos));

  std::vector<Video> list;
  double largest = 0.0;
  for (int i = 0; i < videos; ++i) {
    const double size = 1.0 - unit(rng);
    largest = std::max(largest, size);
    list.push_back({i, i < categories ? i : uniform_int(0, categories - 1), size});
  }
  for (auto& v : list) v.size /= largest;
  const VideoCatalog catalog(std::move(list));

  GenuineTrace empty;
  empty.num_users = users;
  SystemState state = init_state(catalog, users, empty, params);

  auto draw = [&](double p_genuine, double p_extra, ActionProfile& x, ActionProfile& a) {
    x.assign(static_cast<std::size_t>(users), {});
    a.assign(static_cast<std::size_t>(users), {});
    for (int u = 0; u < users; ++u) {
      for (int i = 0; i < videos; ++i) {
        if (unit(rng) < p_genuine) {
          x[static_cast<std::size_t>(u)].push_back(i);
          a[static_cast<std::size_t>(u)].push_back(i);
        } else if (unit(rng) < p_extra) {
          a[static_cast<std::size_t>(u)].push_back(i);
        }
      }
    }
  };

  ActionProfile x;
  ActionProfile a;
  const int history = uniform_int(1, 6);
  for (int t = 0; t < history; ++t) {
    draw(0.3, 0.15, x, a);
    apply_round(state, a, x, params);
  }
  draw(0.3, 0.0, x, a);
  return instance_from_state(state, catalog, x, params);
}

std::optional<std::vector<std::uint8_t>> follower_fixed_point(const GameInstance& game, int video, double ec,
                                                              int start, FollowerRule rule,
                                                              NewcomerConvention convention) {
  const int users = game.num_users;
  std::vector<std::uint8_t> cur(static_cast<std::size_t>(users));
  for (int u = 0; u < users; ++u) {
    cur[static_cast<std::size_t>(u)] = game.genuine[game.index(u, video)] ? 1 : static_cast<std::uint8_t>(start != 0);
  }
  std::vector<std::uint8_t> next(cur.size());
  for (int sweep = 0; sweep < kMaxFixedPointSweeps; ++sweep) {
    int first_time = 0;
    for (int u = 0; u < users; ++u) {
      if (!game.requested_before[game.index(u, video)]) first_time += cur[static_cast<std::size_t>(u)];
    }
    for (int u = 0; u < users; ++u) {
      const bool fresh = !game.requested_before[game.index(u, video)];
      double others = first_time - (fresh ? cur[static_cast<std::size_t>(u)] : 0);
      if (convention == NewcomerConvention::kIncludeSelf && fresh) others += cur[static_cast<std::size_t>(u)];
      FollowerInput in{game.context(u, video, ec, others), game.genuine[game.index(u, video)] != 0};
      next[static_cast<std::size_t>(u)] = static_cast<std::uint8_t>(follower_best_response(in, rule, convention));
    }
    if (next == cur) return cur;
    cur.swap(next);
  }
  return std::nullopt;
}

SolveResult solve_equilibrium(const GameInstance& game, FollowerRule rule, NewcomerConvention convention) {
  StrategyProfile profile;
  profile.ec.assign(static_cast<std::size_t>(game.num_videos), 0.0);
  profile.actions.assign(static_cast<std::size_t>(game.num_users * game.num_videos), 0);
  SolveResult result;

  for (int i = 0; i < game.num_videos; ++i) {
    bool found = false;
    for (int total = 0; total <= game.num_users && !found; ++total) {
      const double e = leader_best_response(total, game.sizes[static_cast<std::size_t>(i)], game.params.beta_e,
                                            game.params.eps_e);
      const auto fp = follower_fixed_point(game, i, e, 0, rule, convention);
      if (!fp) continue;
      int sum = 0;
      for (auto v : *fp) sum += v;
      if (sum != total) continue;
      found = true;
      profile.ec[static_cast<std::size_t>(i)] = e;
      for (int u = 0; u < game.num_users; ++u) profile.actions[game.index(u, i)] = (*fp)[static_cast<std::size_t>(u)];
    }
    if (!found) result.unresolved_videos.push_back(i);
  }
  if (result.unresolved_videos.empty()) result.strategy = std::move(profile);
  return result;
}

namespace {

// Utility of u over videos in `mask` given everyone's actions, with the exact
// realized first-time count.
double follower_payoff(const GameInstance& game, const StrategyProfile& s, const std::vector<std::uint8_t>& actions,
                       int u) {
  double total = 0.0;
  for (int i = 0; i < game.num_videos; ++i) {
    if (game.genuine[game.index(u, i)]) continue;
    int others = 0;
    for (int v = 0; v < game.num_users; ++v) {
      if (v != u && !game.requested_before[game.index(v, i)]) others += actions[game.index(v, i)];
    }
    const UdContext ctx = game.context(u, i, s.ec[static_cast<std::size_t>(i)], others);
    total += ud_utility(ctx, actions[game.index(u, i)] != 0, NewcomerConvention::kExcludeSelf);
  }
  return total;
}

}  // namespace

EquilibriumReport verify_equilibrium(const GameInstance& game, const StrategyProfile& s, double tol) {
  EquilibriumReport report;

  // Stage I: each video's EC utility at the fixed request totals against a grid.
  const int steps = static_cast<int>(std::lround(1.0 / kLeaderGridStep));
  for (int i = 0; i < game.num_videos; ++i) {
    double total = 0.0;
    for (int u = 0; u < game.num_users; ++u) total += s.actions[game.index(u, i)];
    const double c = game.sizes[static_cast<std::size_t>(i)];
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= steps; ++k) {
      best = std::max(best, ec_video_utility(static_cast<double>(k) / steps, total, c, game.params));
    }
    const double chosen = ec_video_utility(s.ec[static_cast<std::size_t>(i)], total, c, game.params);
    report.leader_gap = std::max(report.leader_gap, std::abs(best - chosen));
  }

  // Stage II: every deviation over the UD's non-genuine videos.
  std::vector<std::uint8_t> actions = s.actions;
  for (int u = 0; u < game.num_users; ++u) {
    std::vector<int> free;
    for (int i = 0; i < game.num_videos; ++i) {
      if (!game.genuine[game.index(u, i)]) free.push_back(i);
      else if (!s.actions[game.index(u, i)]) {
        FollowerViolation v{u, i, 0, std::numeric_limits<double>::infinity(), game.context(u, i, s.ec[static_cast<std::size_t>(i)], 0)};
        report.follower_violations.push_back(v);
      }
    }
    const double base = follower_payoff(game, s, actions, u);
    const auto subsets = 1u << free.size();
    double worst_gain = 0.0;
    unsigned worst_mask = 0;
    for (unsigned mask = 1; mask < subsets; ++mask) {
      for (std::size_t k = 0; k < free.size(); ++k) {
        if (mask & (1u << k)) actions[game.index(u, free[k])] ^= 1;
      }
      const double gain = follower_payoff(game, s, actions, u) - base;
      if (gain > worst_gain) {
        worst_gain = gain;
        worst_mask = mask;
      }
      for (std::size_t k = 0; k < free.size(); ++k) {
        if (mask & (1u << k)) actions[game.index(u, free[k])] ^= 1;
      }
    }
    if (worst_gain > tol) {
      // Payoffs separate by video, so each flipped video in the best deviation is itself a violation.
      for (std::size_t k = 0; k < free.size(); ++k) {
        if (!(worst_mask & (1u << k))) continue;
        const int i = free[k];
        int others = 0;
        for (int v = 0; v < game.num_users; ++v) {
          if (v != u && !game.requested_before[game.index(v, i)]) others += actions[game.index(v, i)];
        }
        const UdContext ctx = game.context(u, i, s.ec[static_cast<std::size_t>(i)], others);
        const int a = actions[game.index(u, i)];
        const double gain = ud_utility(ctx, a == 0) - ud_utility(ctx, a != 0);
        report.follower_violations.push_back({u, i, a, gain, ctx});
      }
    }
  }

  report.passed = report.leader_gap <= tol && report.follower_violations.empty();
  return report;
}

EquilibriumReport verify_equilibrium_bruteforce(const GameInstance& game, double tol, FollowerRule rule,
                                                NewcomerConvention convention) {
  const auto solved = solve_equilibrium(game, rule, convention);
  if (!solved.strategy) {
    EquilibriumReport report;
    report.solved = false;
    std::ostringstream msg;
    msg << "no request total S with S = sum a*(e*(S)) for video";
    for (int i : solved.unresolved_videos) msg << ' ' << i;
    report.diagnostic = msg.str();
    report.passed = false;
    return report;
  }
  return verify_equilibrium(game, *solved.strategy, tol);
}

void write_report_csv(std::ostream& out, const EquilibriumReport& report) {
  using csv::format_double;
  out << "kind,user,video,action,gain,d,p,c,r,m,dn,K,e\n";
  out << "summary,,," << (report.passed ? 1 : 0) << ',' << format_double(report.leader_gap) << ",,,,,,,,";
  if (!report.diagnostic.empty()) out << ' ' << report.diagnostic;
  out << '\n';
  for (const auto& v : report.follower_violations) {
    const auto& c = v.context;
    out << "follower," << v.user << ',' << v.video << ',' << v.action << ',' << format_double(v.gain) << ','
        << format_double(c.view_pref) << ',' << format_double(c.popularity) << ',' << format_double(c.size) << ','
        << (c.requested_before ? 1 : 0) << ',' << format_double(c.requested_by) << ','
        << format_double(c.newcomers) << ',' << c.anchor << ',' << format_double(c.ec_fraction) << '\n';
  }
}

StandardFunctionReport check_standard_function(int num_samples, std::uint64_t seed) {
  StandardFunctionReport report;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  auto describe = [](const char* what, const UdContext& c, double k) {
    std::ostringstream s;
    s << what << ": d=" << c.view_pref << " p=" << c.popularity << " c=" << c.size << " e=" << c.ec_fraction
      << " m=" << c.requested_by << " dn=" << c.newcomers << " K=" << c.anchor << " k=" << k;
    return s.str();
  };

  while (report.samples < num_samples) {
    FollowerInput in;
    UdContext& c = in.ctx;
    c.params.gamma = 0.01 + unit(rng);
    c.params.beta = 0.01 + unit(rng);
    c.params.eps_u = 0.1 + unit(rng);
    const int users = uniform_int(2, 200);
    c.anchor = 2 * users + 1;
    c.requested_by = uniform_int(0, users - 1);
    c.size = 1.0 - unit(rng);
    c.ec_fraction = unit(rng);
    c.view_pref = unit(rng);
    c.popularity = 4.0 * unit(rng);
    // Appendix-B region: the caching cost dominates the caching benefit.
    if (!(c.params.beta * c.params.eps_u > c.view_pref * c.popularity * (1.0 - c.ec_fraction))) continue;
    const double slack = (c.anchor / 2.0) - c.requested_by;  // K > 2(m + dn) <=> dn < slack
    if (slack <= 1.0) continue;
    c.newcomers = uniform_int(0, static_cast<int>(std::ceil(slack)) - 1);
    if (!(c.newcomers < slack)) continue;
    const double k_max = c.newcomers > 0 ? std::nextafter(slack / c.newcomers, 0.0) : 4.0;
    const double k = 1.0 + (std::min(k_max, 4.0) - 1.0) * unit(rng);
    if (c.newcomers * k >= slack) continue;
    ++report.samples;

    auto om_at = [&](double dn) {
      FollowerInput probe = in;
      probe.ctx.newcomers = dn;
      return *omega(probe);
    };
    auto y_at = [&](double dn) { return std::clamp(om_at(dn), 0.0, 1.0); };

    const double y = y_at(c.newcomers);
    if (!(y >= 0.0)) {
      ++report.positivity_violations;
      report.failures.push_back(describe("positivity", c, 1.0));
    }
    if (c.newcomers + 1.0 < slack && om_at(c.newcomers + 1.0) < om_at(c.newcomers)) {
      ++report.monotonicity_violations;
      report.failures.push_back(describe("monotonicity", c, 1.0));
    }
    const double scaled = c.newcomers * k;
    if (k * y < y_at(scaled) - 1e-12) {
      ++report.scalability_violations;
      report.failures.push_back(describe("scalability", c, k));
    }
    if (k * om_at(c.newcomers) < om_at(scaled) - 1e-12) ++report.raw_scalability_violations;
  }
  return report;
}

}  // namespace crvr
