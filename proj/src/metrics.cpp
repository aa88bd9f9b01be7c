#include "crvr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "crvr/csv.hpp"
#include "crvr/errors.hpp"
#include "crvr/privacy_model.hpp"

namespace crvr {

double RunResult::average_redundant_count() const {
  long long redundant = 0;
  long long active = 0;
  for (std::size_t t = 0; t < actions.size(); ++t) {
    for (std::size_t u = 0; u < actions[t].size(); ++u) {
      if (genuine[t][u].empty()) continue;
      ++active;
      redundant += fresh_redundant[t][u];
    }
  }
  return active == 0 ? 0.0 : static_cast<double>(redundant) / static_cast<double>(active);
}

namespace {

std::vector<int> column_counts(const std::vector<std::uint8_t>& profile, int users, int videos) {
  std::vector<int> counts(static_cast<std::size_t>(videos), 0);
  for (int u = 0; u < users; ++u) {
    for (int i = 0; i < videos; ++i) counts[static_cast<std::size_t>(i)] += profile[static_cast<std::size_t>(u * videos + i)];
  }
  return counts;
}

}  // namespace

PdrReport compute_pdr(const RunResult& r, PdrDenominator denominator) {
  const auto cells = static_cast<std::size_t>(r.num_users) * static_cast<std::size_t>(r.num_videos);
  if (r.final_public.size() != cells || r.final_private.size() != cells) {
    throw ContractViolation("final profiles do not match the run dimensions");
  }
  const auto public_counts = column_counts(r.final_public, r.num_users, r.num_videos);
  const auto genuine_counts = denominator == PdrDenominator::kGenuineAggregates
                                  ? column_counts(r.final_private, r.num_users, r.num_videos)
                                  : public_counts;

  PdrReport report;
  report.per_user.resize(static_cast<std::size_t>(r.num_users));
  double sum = 0.0;
  int included = 0;
  for (int u = 0; u < r.num_users; ++u) {
    const auto row = static_cast<std::size_t>(u) * static_cast<std::size_t>(r.num_videos);
    const auto pub = std::span(r.final_public).subspan(row, static_cast<std::size_t>(r.num_videos));
    const auto priv = std::span(r.final_private).subspan(row, static_cast<std::size_t>(r.num_videos));
    const double num = user_disclosure(pub, public_counts, r.num_users);
    const double den = user_disclosure(priv, genuine_counts, r.num_users);
    if (std::isinf(num) || std::isinf(den)) report.infinite.push_back(u);
    if (std::isinf(num) || std::isinf(den) || den == 0.0) {
      report.excluded.push_back(u);
      continue;
    }
    report.per_user[static_cast<std::size_t>(u)] = num / den;
    sum += num / den;
    ++included;
  }
  if (included > 0) report.mean = sum / included;
  return report;
}

std::optional<double> compute_chr(const RunResult& r) {
  if (r.watch_log.empty()) return std::nullopt;
  const auto hits = std::count_if(r.watch_log.begin(), r.watch_log.end(),
                                  [](const WatchEvent& w) { return w.from_redundant_cache; });
  return static_cast<double>(hits) / static_cast<double>(r.watch_log.size());
}

std::optional<double> compute_bor(const RunResult& r, const VideoCatalog& catalog) {
  double served = 0.0;
  double requested = 0.0;
  for (std::size_t t = 0; t < r.edge_requests.size(); ++t) {
    for (const auto& req : r.edge_requests[t]) {
      const double c = catalog.size_of(req.video);
      served += r.ec_history[t][static_cast<std::size_t>(req.video)] * c;
      requested += c;
    }
  }
  if (requested == 0.0) return std::nullopt;
  return served / requested;
}

double variance(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(values.size());
}

UtilitySeries utility_timeseries(const RunResult& r) {
  UtilitySeries s;
  s.samples = r.utility;
  const std::size_t window = s.samples.size() / 5;
  std::vector<double> head;
  std::vector<double> tail;
  for (std::size_t k = 0; k < window; ++k) {
    head.push_back(s.samples[k].ud_total());
    tail.push_back(s.samples[s.samples.size() - window + k].ud_total());
  }
  s.first_variance = variance(head);
  s.last_variance = variance(tail);
  return s;
}

void write_metrics_csv(std::ostream& out, const RunResult& r, const VideoCatalog& catalog,
                       PdrDenominator denominator) {
  using csv::format_double;
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
  const auto pdr = compute_pdr(r, denominator);
  const auto series = utility_timeseries(r);

  out << "metric,scope,value\n";
  out << "pdr,mean," << opt(pdr.mean) << '\n';
  out << "chr,all," << opt(compute_chr(r)) << '\n';
  out << "bor,all," << opt(compute_bor(r, catalog)) << '\n';
  out << "redundant_per_active_slot,mean," << format_double(r.average_redundant_count()) << '\n';
  out << "pdr_excluded_users,count," << pdr.excluded.size() << '\n';
  out << "pdr_infinite_users,count," << pdr.infinite.size() << '\n';
  out << "ud_utility_variance,first_20pct," << format_double(series.first_variance) << '\n';
  out << "ud_utility_variance,last_20pct," << format_double(series.last_variance) << '\n';
  for (int u = 0; u < r.num_users; ++u) {
    out << "pdr,user_" << u << ',' << opt(pdr.per_user[static_cast<std::size_t>(u)]) << '\n';
  }
}

}  // namespace crvr
